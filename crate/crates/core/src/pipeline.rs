//! End-to-end runs: sample, metric, persistence, then comparison with the
//! closed forms or footprint detection.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::error::{bad, Result};
use crate::filtration::{cech_witness_stream, ComplexKind, Convention};
use crate::footprint::{apply_localization, detect, localize, Bar, DetectConfig, FootprintReport};
use crate::metric::{circle_metric, flat_torus_metric, graph_geodesic_metric, FiniteMetric};
use crate::nullhomology::{
    build_tube_cycle, cech_fan_nullhomology, grid_row_loop, rips_fan_nullhomology,
    select_equidistant_triple, select_square_quadruple, snap_grid, sphere_latitude_grid,
    LoopSample,
};
use crate::oracle::{circle_barcode, critical_value, minimal_basis_barcode};
use crate::persistence::{compute_persistence, Barcode, Interval, Options, Persistence};
use crate::sampler::{
    farthest_point_subsample, rng, sample_flat_torus, sample_sphere_minus_cap, Mode,
};

/// One expected bar next to the computed bar matched to it.
#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub dim: usize,
    pub expected: (f64, f64),
    pub found: Option<(f64, f64)>,
    /// Largest endpoint difference (infinite when nothing matched).
    pub residual: f64,
    pub ok: bool,
}

/// Matches each expected bar against the significant computed bars of its
/// dimension: it passes when exactly one is present and both endpoints lie
/// within `tol`. Significant bars in `dims` left unmatched are returned as
/// extras.
pub fn match_bars(
    barcode: &Barcode,
    expected: &[Bar],
    dims: std::ops::RangeInclusive<usize>,
    noise: f64,
    tol: f64,
) -> (Vec<Residual>, Vec<Bar>) {
    let significant = |dim: usize| -> Vec<&Interval> {
        barcode
            .in_dim(dim)
            .filter(|i| i.persistence() > noise)
            .collect()
    };
    let mut rows = Vec::new();
    let mut extra = Vec::new();
    for dim in dims {
        let want: Vec<&Bar> = expected.iter().filter(|b| b.0 == dim).collect();
        let mut have = significant(dim);
        for &&(_, b, d) in &want {
            let best = have
                .iter()
                .enumerate()
                .map(|(k, i)| {
                    (
                        k,
                        (i.birth - b)
                            .abs()
                            .max(if d.is_infinite() && i.death.is_infinite() {
                                0.0
                            } else {
                                (i.death - d).abs()
                            }),
                    )
                })
                .min_by(|x, y| x.1.total_cmp(&y.1));
            let (found, residual) = match best {
                Some((k, res)) => {
                    let i = have.remove(k);
                    (Some((i.birth, i.death)), res)
                }
                None => (None, f64::INFINITY),
            };
            rows.push(Residual {
                dim,
                expected: (b, d),
                found,
                residual,
                ok: residual <= tol,
            });
        }
        extra.extend(have.into_iter().map(|i| (i.dim, i.birth, i.death)));
    }
    (rows, extra)
}

#[derive(Clone, Debug, Serialize)]
pub struct CircleCheckConfig {
    pub n: usize,
    pub length: f64,
    pub kind: ComplexKind,
    pub convention: Convention,
    pub max_dim: usize,
    pub tol: f64,
    /// Witness count for the Čech variant (landmarks are every
    /// `witnesses / n`-th witness).
    pub witnesses: usize,
    /// Bars at most this long are ignored.
    pub noise: f64,
}

impl Default for CircleCheckConfig {
    fn default() -> Self {
        CircleCheckConfig {
            n: 64,
            length: 1.0,
            kind: ComplexKind::Rips,
            convention: Convention::Open,
            max_dim: 3,
            tol: 0.02,
            witnesses: 480,
            noise: 0.05,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CircleCheck {
    pub pass: bool,
    pub rows: Vec<Residual>,
    pub extra: Vec<Bar>,
    #[serde(skip)]
    pub barcode: Barcode,
}

/// Persistence of a regular sample of the circle compared with the closed
/// form, bar by bar.
pub fn verify_circle(cfg: &CircleCheckConfig) -> Result<CircleCheck> {
    if cfg.n < 3 {
        return Err(bad(format!("need at least 3 circle points, got {}", cfg.n)));
    }
    let l = cfg.length;
    let top = (cfg.max_dim.saturating_sub(1)) / 2;
    // a little past the last expected death, never past the diameter
    let threshold = (critical_value(cfg.kind, l, top + 1) + 0.1 * l).min(0.5 * l);
    let barcode = match cfg.kind {
        ComplexKind::Rips => {
            let pos: Vec<f64> = (0..cfg.n).map(|k| l * k as f64 / cfg.n as f64).collect();
            let metric = circle_metric(&pos, l)?;
            Persistence::rips(
                &metric,
                cfg.max_dim,
                threshold,
                cfg.convention,
                Options::default(),
            )?
            .barcode
        }
        ComplexKind::CechWitness => {
            let m = cfg.witnesses.max(cfg.n);
            let pos: Vec<f64> = (0..m).map(|k| l * k as f64 / m as f64).collect();
            let metric = circle_metric(&pos, l)?;
            let landmarks: Vec<usize> = (0..cfg.n).map(|i| i * m / cfg.n).collect();
            let stream = cech_witness_stream(
                &metric,
                &landmarks,
                None,
                cfg.max_dim as i64 + 1,
                threshold,
                cfg.convention,
            )?;
            compute_persistence(&stream)?
        }
    };
    let oracle = circle_barcode(l, cfg.max_dim, cfg.kind, cfg.convention, false)?;
    let expected: Vec<Bar> = oracle
        .barcode
        .triples()
        .into_iter()
        .filter(|b| b.0 >= 1)
        .collect();
    let (rows, extra) = match_bars(&barcode, &expected, 1..=cfg.max_dim, cfg.noise, cfg.tol);
    let components = barcode.in_dim(0).filter(|i| i.is_infinite()).count();
    let pass = components == 1 && extra.is_empty() && rows.iter().all(|r| r.ok);
    Ok(CircleCheck {
        pass,
        rows,
        extra,
        barcode,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TorusCheck {
    pub pass: bool,
    pub rows: Vec<Residual>,
    pub extra: Vec<Bar>,
}

/// Dim-1 bars of a uniform flat-torus sample against the minimal-basis
/// closed form; `rel_tol` is relative to each expected death.
pub fn verify_flat_torus(
    n: usize,
    a: f64,
    b: f64,
    seed: u64,
    noise: f64,
    rel_tol: f64,
) -> Result<TorusCheck> {
    let pts = sample_flat_torus(n, a, b, Mode::Uniform, seed)?;
    let metric = flat_torus_metric(&pts, a, b)?;
    let (short, long) = if a <= b { (a, b) } else { (b, a) };
    let threshold = long / 3.0 * (1.0 + 2.0 * rel_tol);
    let barcode =
        Persistence::rips(&metric, 1, threshold, Convention::Open, Options::default())?.barcode;
    let oracle = minimal_basis_barcode(&[short, long])?;
    let (mut rows, extra) = match_bars(
        &barcode,
        &oracle.barcode.triples(),
        1..=1,
        noise,
        f64::INFINITY,
    );
    for r in &mut rows {
        r.ok = r
            .found
            .is_some_and(|(_, d)| (d - r.expected.1).abs() <= rel_tol * r.expected.1);
    }
    let pass = extra.is_empty() && rows.iter().all(|r| r.ok);
    Ok(TorusCheck { pass, rows, extra })
}

/// A sphere-minus-cap sample with its approximate geodesic metric and a
/// farthest-point ordering that starts with the boundary points, so every
/// prefix is a well-spread subsample containing the boundary circle.
pub struct SphereCapSample {
    pub radius: f64,
    pub cap_radius: f64,
    pub boundary_m: usize,
    pub points: Vec<[f64; 3]>,
    pub metric: FiniteMetric,
    pub order: Vec<usize>,
}

impl SphereCapSample {
    /// `n_total` uniform points plus `boundary_m` evenly spaced points on
    /// the boundary parallel; `order_len` is the longest prefix needed.
    pub fn build(
        n_total: usize,
        radius: f64,
        cap_radius: f64,
        boundary_m: usize,
        k: usize,
        seed: u64,
        order_len: usize,
    ) -> Result<Self> {
        let points = sample_sphere_minus_cap(n_total, radius, cap_radius, seed, boundary_m)?;
        let metric = graph_geodesic_metric(&points, k)?;
        let boundary: Vec<usize> = (n_total..n_total + boundary_m).collect();
        let order_len = order_len.min(points.len());
        // too few points to spare a whole boundary circle: spread them all
        let seeds = if boundary_m > 0 && order_len > boundary_m {
            boundary
        } else {
            vec![0]
        };
        let order =
            farthest_point_subsample(points.len(), order_len, &seeds, |i, j| metric.dist(i, j))?;
        Ok(SphereCapSample {
            radius,
            cap_radius,
            boundary_m,
            points,
            metric,
            order,
        })
    }

    /// Global indices and metric of the first `n` points of the ordering.
    pub fn prefix(&self, n: usize) -> Result<(Vec<usize>, FiniteMetric)> {
        if n > self.order.len() {
            return Err(bad(format!(
                "ordering only has {} points, asked for {n}",
                self.order.len()
            )));
        }
        let idx = self.order[..n].to_vec();
        let m = self.metric.subset(&idx)?;
        Ok((idx, m))
    }

    /// Polar angle of the boundary parallel.
    pub fn boundary_polar(&self) -> f64 {
        (self.cap_radius / self.radius).asin()
    }

    /// Geodesic distance on the sphere from a point to the boundary parallel.
    pub fn distance_to_boundary(&self, point: usize) -> f64 {
        let [_, _, z] = self.points[point];
        let polar = (z / self.radius).clamp(-1.0, 1.0).acos();
        self.radius * (polar - self.boundary_polar()).abs()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub n_total: usize,
    pub n_sub: usize,
    pub n_sub_long: usize,
    pub radius: f64,
    pub cap_radius: f64,
    pub boundary_m: usize,
    pub k: usize,
    pub seed: u64,
    pub threshold_short: f64,
    pub threshold_long: f64,
    pub detect: DetectConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_total: 4000,
            n_sub: 400,
            n_sub_long: 300,
            radius: 1.0,
            cap_radius: 0.25,
            boundary_m: 60,
            k: 8,
            seed: 1,
            threshold_short: 0.8,
            threshold_long: 2.3,
            detect: DetectConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizationSummary {
    pub candidate: usize,
    pub measured_length: f64,
    pub length_estimate: f64,
    pub max_boundary_distance: f64,
    /// Global sample indices in tour order.
    pub tour: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub footprints: FootprintReport,
    pub localizations: Vec<LocalizationSummary>,
    pub errors: Vec<String>,
    #[serde(skip)]
    pub short_pass: Barcode,
    #[serde(skip)]
    pub long_pass: Barcode,
    #[serde(skip)]
    pub merged: Barcode,
}

/// Combines a dimension-3 pass at a short threshold with a dimension-2
/// pass at a long one. Everything comes from the short pass except dim-2
/// bars still alive at its threshold, which are replaced by the long
/// pass's dim-2 bars that outlive that threshold.
pub fn merge_passes(short: &Barcode, long: &Barcode) -> Barcode {
    let cut = short.threshold;
    let mut all: Vec<Interval> = short
        .intervals()
        .iter()
        .filter(|i| !(i.dim == 2 && i.death.is_infinite()))
        .cloned()
        .collect();
    all.extend(long.in_dim(2).filter(|i| i.death > cut).cloned());
    Barcode::new(
        short.kind,
        short.convention,
        short.max_dim.max(long.max_dim),
        long.threshold,
        all,
    )
}

/// The sphere-with-a-hole experiment: footprint bars of the boundary circle
/// from two persistence passes, detection, and localization.
pub fn experiment_sphere_cap(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.n_sub_long > cfg.n_sub {
        return Err(bad(
            "the long pass must use at most as many points as the short one",
        ));
    }
    let sample = SphereCapSample::build(
        cfg.n_total,
        cfg.radius,
        cfg.cap_radius,
        cfg.boundary_m,
        cfg.k,
        cfg.seed,
        cfg.n_sub,
    )?;
    let (idx, metric_short) = sample.prefix(cfg.n_sub)?;
    let short = Persistence::rips(
        &metric_short,
        3,
        cfg.threshold_short,
        Convention::Open,
        Options {
            raw: false,
            keep_pairs: true,
        },
    )?;
    // a prefix of the same ordering, so local indices agree across passes
    let (_, metric_long) = sample.prefix(cfg.n_sub_long)?;
    let long = Persistence::rips(
        &metric_long,
        2,
        cfg.threshold_long,
        Convention::Open,
        Options::default(),
    )?
    .barcode;
    let merged = merge_passes(&short.barcode, &long);
    let mut footprints = detect(&merged, &cfg.detect);
    let mut localizations = Vec::new();
    let mut errors = Vec::new();
    for (c, cand) in footprints.candidates.iter_mut().enumerate() {
        match localize(cand, &short, &metric_short) {
            Ok(loc) => {
                apply_localization(cand, &loc);
                let tour: Vec<usize> = loc.tour.points.iter().map(|&v| idx[v as usize]).collect();
                let max_boundary_distance = tour
                    .iter()
                    .map(|&g| sample.distance_to_boundary(g))
                    .fold(0.0, f64::max);
                localizations.push(LocalizationSummary {
                    candidate: c,
                    measured_length: loc.measured_length,
                    length_estimate: loc.length_estimate,
                    max_boundary_distance,
                    tour,
                });
            }
            Err(e) => errors.push(format!("candidate {c}: {e}")),
        }
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        footprints,
        localizations,
        errors,
        short_pass: short.barcode,
        long_pass: long,
        merged,
    })
}

impl ExperimentReport {
    /// Writes the three diagrams and the JSON report into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (name, b) in [
            ("short_pass.pd", &self.short_pass),
            ("long_pass.pd", &self.long_pass),
            ("merged.pd", &self.merged),
        ] {
            let mut buf = Vec::new();
            b.write_pd(&mut buf, false)?;
            fs::write(dir.join(name), buf)?;
        }
        fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(self).expect("report serializes"),
        )?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TubeCheck {
    pub boundary_is_zero: bool,
    pub triangles: usize,
    /// Largest Rips value among the tube's triangles.
    pub max_value: f64,
    pub low_scale: f64,
    pub bounds_at_low: bool,
    pub high_scale: f64,
    pub bounds_at_high: bool,
}

/// Builds the latitude tube between the boundary parallel and a small loop
/// around the opposite pole on the first `n_sub` points of `sample`, capped
/// by fan lids at scale `low`, and tests whether it bounds at `low` and at
/// `high` in the Rips filtration of those points.
pub fn tube_check(
    sample: &SphereCapSample,
    n_sub: usize,
    m_steps: usize,
    bottom_polar: f64,
    low: f64,
    high: f64,
) -> Result<TubeCheck> {
    let (idx, metric) = sample.prefix(n_sub)?;
    let coords: Vec<[f64; 3]> = idx.iter().map(|&g| sample.points[g]).collect();
    let top_polar = sample.boundary_polar();
    let grid = snap_grid(
        &sphere_latitude_grid(m_steps, sample.radius, top_polar, bottom_polar)?,
        &coords,
    )?;
    let lid = |row: usize, polar: f64| {
        let len = 2.0 * PI * sample.radius * polar.sin();
        let lp = grid_row_loop(&grid, row, vec![len / m_steps as f64; m_steps])?;
        let triple = select_equidistant_triple(&lp, low)?;
        rips_fan_nullhomology(&lp, triple, low)
    };
    let top = lid(0, top_polar)?;
    let bottom = lid(m_steps, bottom_polar)?;
    let tube = build_tube_cycle(&grid, &top, &bottom)?;
    let max_value = tube
        .simplices
        .iter()
        .map(|s| {
            let v = s.vertices();
            let mut d: f64 = 0.0;
            for a in 0..v.len() {
                for b in a + 1..v.len() {
                    d = d.max(metric.dist(v[a] as usize, v[b] as usize));
                }
            }
            d
        })
        .fold(0.0, f64::max);
    let p = Persistence::rips(
        &metric,
        2,
        high,
        Convention::Open,
        Options {
            raw: false,
            keep_pairs: true,
        },
    )?;
    Ok(TubeCheck {
        boundary_is_zero: tube.is_cycle(),
        triangles: tube.len(),
        max_value,
        low_scale: low,
        bounds_at_low: p.is_boundary(&tube, low)?,
        high_scale: high,
        bounds_at_high: p.is_boundary(&tube, high)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EphemeralRow {
    pub birth: f64,
    pub persistence: f64,
    /// Distance to the nearest closed-convention marker.
    pub offset: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EphemeralProbe {
    pub n: usize,
    pub markers: Vec<f64>,
    pub rows: Vec<EphemeralRow>,
}

/// Raw dim-2 bars of a regular `n`-gon in the closed Rips filtration that
/// lie within `window` of a closed-convention marker.
pub fn ephemeral_probe(n: usize, length: f64, window: f64) -> Result<EphemeralProbe> {
    let pos: Vec<f64> = (0..n).map(|k| length * k as f64 / n as f64).collect();
    let metric = circle_metric(&pos, length)?;
    let threshold = 0.45 * length;
    let p = Persistence::rips(
        &metric,
        2,
        threshold,
        Convention::Closed,
        Options {
            raw: true,
            keep_pairs: false,
        },
    )?;
    let oracle = circle_barcode(length, 2, ComplexKind::Rips, Convention::Closed, true)?;
    let markers: Vec<f64> = oracle
        .barcode
        .ephemeral()
        .iter()
        .filter(|i| i.dim == 2)
        .map(|i| i.birth)
        .collect();
    let rows = p
        .barcode
        .raw()
        .filter(|i| i.dim == 2)
        .filter_map(|i| {
            let offset = markers
                .iter()
                .map(|m| (i.birth - m).abs())
                .fold(f64::INFINITY, f64::min);
            (offset <= window).then(|| EphemeralRow {
                birth: i.birth,
                persistence: i.persistence(),
                offset,
            })
        })
        .collect();
    Ok(EphemeralProbe { n, markers, rows })
}

#[derive(Clone, Debug, Serialize)]
pub struct NullhomologySuite {
    pub trials: usize,
    pub failures: Vec<String>,
}

impl NullhomologySuite {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random loops of `3..=max_size` points with uneven gaps, each filled by
/// both fans at a random scale above the density bound (`L/3` or `L/4`
/// plus the largest gap). Every fan must bound the loop exactly; Rips fans
/// must also keep every triangle's pairs closer than `r`.
pub fn nullhomology_suite(trials: usize, max_size: usize, seed: u64) -> Result<NullhomologySuite> {
    if max_size < 3 {
        return Err(bad(format!(
            "loops need at least 3 points, got max size {max_size}"
        )));
    }
    let mut rng = rng(seed);
    let mut failures = Vec::new();
    for trial in 0..trials {
        let k = rng.gen_range(3..=max_size);
        let length = rng.gen_range(0.5..5.0);
        let mut pos: Vec<f64> = (1..k).map(|_| rng.gen::<f64>() * length).collect();
        pos.push(0.0);
        pos.sort_by(f64::total_cmp);
        pos.dedup();
        if pos.len() < 3 {
            continue;
        }
        let sample = LoopSample::from_positions(&pos, length)?;
        let gap = sample.max_gap();
        let r_rips = (length / 3.0 + gap) * rng.gen_range(1.001..1.5);
        let r_cech = (length / 4.0 + gap) * rng.gen_range(1.001..1.5);
        let mut fail = |what: &str, msg: String| {
            failures.push(format!(
                "trial {trial} ({} points): {what}: {msg}",
                pos.len()
            ))
        };
        match select_equidistant_triple(&sample, r_rips)
            .and_then(|t| rips_fan_nullhomology(&sample, t, r_rips))
        {
            Ok(f) if !f.validate() => fail("rips", "boundary differs from the loop".into()),
            Ok(f) if f.max_pair_arc >= r_rips => fail(
                "rips",
                format!("pair arc {} not below {r_rips}", f.max_pair_arc),
            ),
            Ok(_) => {}
            Err(e) => fail("rips", e.to_string()),
        }
        match select_square_quadruple(&sample, r_cech)
            .and_then(|q| cech_fan_nullhomology(&sample, q, r_cech))
        {
            Ok(f) if !f.validate() => fail("cech", "boundary differs from the loop".into()),
            Ok(_) => {}
            Err(e) => fail("cech", e.to_string()),
        }
    }
    Ok(NullhomologySuite { trials, failures })
}

//! Reading geodesic circles off a barcode.
//!
//! A geodesic circle of length `l` that is isolated enough leaves a short
//! dim-3 bar near `(l/3, 2l/5]`. If the circle belongs to a shortest
//! homology basis there is also a dim-1 bar dying near `l/3`; if instead it
//! is contractible, a dim-2 bar is born near `l/3` and lives until a third
//! of the longest curve any contraction has to pass through.

use serde::Serialize;

use crate::error::{bad, Error, Result};
use crate::filtration::Simplex;
use crate::metric::FiniteMetric;
use crate::nullhomology::LoopSample;
use crate::persistence::complex::RipsComplex;
use crate::persistence::{Barcode, Chain, Interval, Options, Persistence};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DetectConfig {
    /// Relative tolerance when matching bar endpoints to `l/3`.
    pub rel_tol: f64,
    /// Bars shorter than this (in metric units) are noise.
    pub min_persistence: f64,
    /// Accepted death/birth ratios of a dim-3 bar (ideal 6/5).
    pub ratio_window: (f64, f64),
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            rel_tol: 0.12,
            min_persistence: 0.05,
            ratio_window: (1.05, 1.35),
        }
    }
}

impl DetectConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.ratio_window;
        if !(self.rel_tol > 0.0 && self.min_persistence > 0.0) {
            return Err(bad("rel_tol and min_persistence must be positive"));
        }
        if !(1.0 < lo && lo < hi && hi < 3.0) {
            return Err(bad(format!(
                "ratio window ({lo}, {hi}) must lie inside (1, 3)"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    /// Matched by a dim-1 bar: a member of a shortest homology basis.
    Topological,
    /// Matched by a dim-2 bar: contractible, with a height estimate.
    Geometric,
    Undetermined,
}

pub type Bar = (usize, f64, f64);

fn bar(i: &Interval) -> Bar {
    (i.dim, i.birth, i.death)
}

#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    /// Three times the dim-3 birth.
    pub length_estimate: f64,
    pub source_bar: Bar,
    pub classification: Classification,
    pub paired_bar: Option<Bar>,
    /// Three times the death of the matched dim-2 bar; an upper estimate of
    /// the height of a contraction.
    pub height_upper_bound: Option<f64>,
    pub provenance: &'static str,
    #[serde(skip)]
    pub source: Interval,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FootprintReport {
    pub candidates: Vec<Candidate>,
    pub unexplained_bars: Vec<Bar>,
    pub warnings: Vec<String>,
}

impl FootprintReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn near(x: f64, target: f64, rel_tol: f64) -> bool {
    (x - target).abs() <= rel_tol * target.abs()
}

/// Candidates seeded by dim-3 bars, each classified against the dim-1 and
/// dim-2 bars. Bars in dimensions 1 to 3 that are significant but not used
/// are reported as unexplained.
pub fn detect(barcode: &Barcode, cfg: &DetectConfig) -> FootprintReport {
    let mut report = FootprintReport::default();
    if barcode.max_dim < 3 {
        report.warnings.push(format!(
            "barcode only reaches dimension {}; dim-3 footprints cannot be detected",
            barcode.max_dim
        ));
    }
    let mut bars: Vec<&Interval> = barcode.intervals().iter().collect();
    bars.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.total_cmp(&b.death))
    });
    let significant = |i: &Interval| i.persistence() >= cfg.min_persistence;
    let mut used = vec![false; bars.len()];

    let (lo, hi) = cfg.ratio_window;
    let seeds: Vec<usize> = (0..bars.len())
        .filter(|&k| {
            let i = bars[k];
            i.dim == 3
                && i.birth > 0.0
                && i.death.is_finite()
                && (lo..=hi).contains(&(i.death / i.birth))
        })
        .collect();
    // dim-3 bars born within tolerance of each other describe one circle;
    // the most persistent one speaks for the group
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in seeds {
        match groups.last_mut() {
            Some(g) if near(bars[k].birth, bars[g[0]].birth, cfg.rel_tol) => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    for g in groups {
        for &k in &g {
            used[k] = true;
        }
        let src = *g
            .iter()
            .max_by(|&&a, &&b| {
                bars[a]
                    .persistence()
                    .total_cmp(&bars[b].persistence())
                    .then(b.cmp(&a))
            })
            .expect("non-empty group");
        let source = bars[src];
        let length = 3.0 * source.birth;
        let third = length / 3.0;
        let best_match = |dim: usize, key: &dyn Fn(&Interval) -> f64, used: &[bool]| {
            (0..bars.len())
                .filter(|&k| {
                    !used[k]
                        && bars[k].dim == dim
                        && significant(bars[k])
                        && near(key(bars[k]), third, cfg.rel_tol)
                })
                .max_by(|&a, &b| {
                    bars[a]
                        .persistence()
                        .total_cmp(&bars[b].persistence())
                        .then(b.cmp(&a))
                })
        };
        let mut cand = Candidate {
            length_estimate: length,
            source_bar: bar(source),
            classification: Classification::Undetermined,
            paired_bar: None,
            height_upper_bound: None,
            provenance: "dim-3 bar of a geodesic circle",
            source: source.clone(),
        };
        if let Some(k) = best_match(1, &|i| i.death, &used) {
            used[k] = true;
            cand.classification = Classification::Topological;
            cand.paired_bar = Some(bar(bars[k]));
            cand.provenance = "dim-1 bar of a shortest homology basis";
        } else if let Some(k) = best_match(2, &|i| i.birth, &used) {
            used[k] = true;
            cand.classification = Classification::Geometric;
            cand.paired_bar = Some(bar(bars[k]));
            cand.height_upper_bound = Some(3.0 * bars[k].death);
            cand.provenance = "dim-2 bar of a contracting tube";
        }
        report.candidates.push(cand);
    }
    report.unexplained_bars = (0..bars.len())
        .filter(|&k| !used[k] && (1..=3).contains(&bars[k].dim) && significant(bars[k]))
        .map(|k| bar(bars[k]))
        .collect();
    report
}

/// A candidate traced back to sample points.
#[derive(Clone, Debug, Serialize)]
pub struct Localization {
    /// Vertices in tour order.
    pub tour: LoopSample,
    /// Closed tour length under the metric.
    pub measured_length: f64,
    pub length_estimate: f64,
}

impl Localization {
    pub fn relative_mismatch(&self) -> f64 {
        (self.measured_length - self.length_estimate).abs() / self.length_estimate
    }
}

/// Orders vertices by a greedy nearest-neighbor tour starting from the
/// first one, closing back to it.
pub fn greedy_tour(vertices: &[u32], metric: &FiniteMetric) -> Result<LoopSample> {
    let mut rest: Vec<u32> = vertices.to_vec();
    rest.sort_unstable();
    rest.dedup();
    if rest.len() < 3 {
        return Err(Error::TooFewVertices(rest.len()));
    }
    if let Some(&v) = rest.iter().find(|&&v| v as usize >= metric.len()) {
        return Err(bad(format!("vertex {v} is not a point of the metric")));
    }
    let mut tour = vec![rest.remove(0)];
    while !rest.is_empty() {
        let last = *tour.last().expect("non-empty") as usize;
        let (k, _) = rest
            .iter()
            .enumerate()
            .min_by(|a, b| {
                metric
                    .dist(last, *a.1 as usize)
                    .total_cmp(&metric.dist(last, *b.1 as usize))
            })
            .expect("non-empty");
        tour.push(rest.remove(k));
    }
    let k = tour.len();
    let arcs: Vec<f64> = (0..k)
        .map(|i| metric.dist(tour[i] as usize, tour[(i + 1) % k] as usize))
        .collect();
    if arcs.iter().any(|&a| a <= 0.0) {
        return Err(bad("tour visits two points at distance zero"));
    }
    LoopSample::new(tour, arcs)
}

/// Tours the vertices of a tightened dim-3 representative of the
/// candidate's bar. `persistence` must be the computation the candidate's
/// bar came from, run with retained pairs.
pub fn localize(
    candidate: &Candidate,
    persistence: &Persistence<RipsComplex>,
    metric: &FiniteMetric,
) -> Result<Localization> {
    let cycle = tighten_representative(persistence, metric, &candidate.source)?;
    let tour = greedy_tour(&cycle.vertices(), metric)?;
    let measured_length = tour.length();
    Ok(Localization {
        tour,
        measured_length,
        length_estimate: candidate.length_estimate,
    })
}

fn tour_length(vertices: &[u32], metric: &FiniteMetric) -> f64 {
    greedy_tour(vertices, metric).map_or(f64::INFINITY, |t| t.length())
}

/// A representative of `interval` on as few detour vertices as it can
/// manage. The reduced column at the birth scale often reaches off the
/// circle wherever the sample is sparse; just below the death scale there
/// is more room. Vertices are dropped greedily, largest tour saving first,
/// as long as the vertices left still carry a cycle homologous to the
/// current one at that scale.
pub fn tighten_representative(
    persistence: &Persistence<RipsComplex>,
    metric: &FiniteMetric,
    interval: &Interval,
) -> Result<Chain> {
    let mut cycle = persistence.representative_cycle(interval)?;
    if interval.dim == 0 {
        return Ok(cycle);
    }
    // the largest scale still inside the bar
    let scale = metric
        .lower()
        .iter()
        .copied()
        .filter(|&d| d < interval.death && d <= persistence.barcode.threshold)
        .fold(interval.birth, f64::max);
    loop {
        let vertices = cycle.vertices();
        let full = tour_length(&vertices, metric);
        let mut order: Vec<(f64, u32)> = vertices
            .iter()
            .map(|&v| {
                let rest: Vec<u32> = vertices.iter().copied().filter(|&w| w != v).collect();
                (full - tour_length(&rest, metric), v)
            })
            .filter(|&(saving, _)| saving > 0.0)
            .collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut replaced = false;
        for (_, v) in order {
            let keep: Vec<u32> = vertices.iter().copied().filter(|&w| w != v).collect();
            if let Some(c) = homologous_on(persistence, metric, &cycle, &keep, interval.dim, scale)?
            {
                cycle = c;
                replaced = true;
                break;
            }
        }
        if !replaced {
            return Ok(cycle);
        }
    }
}

/// A cycle on the vertices `keep` homologous to `cycle` at `scale`, if the
/// Rips complex on `keep` carries one as a single bar.
fn homologous_on(
    persistence: &Persistence<RipsComplex>,
    metric: &FiniteMetric,
    cycle: &Chain,
    keep: &[u32],
    dim: usize,
    scale: f64,
) -> Result<Option<Chain>> {
    let idx: Vec<usize> = keep.iter().map(|&v| v as usize).collect();
    let sub = metric.subset(&idx)?;
    let local = Persistence::rips(
        &sub,
        dim,
        scale,
        persistence.barcode.convention,
        Options {
            raw: false,
            keep_pairs: true,
        },
    )?;
    for iv in local
        .barcode
        .in_dim(dim)
        .filter(|i| i.birth <= scale && i.death > scale)
    {
        let z = local.representative_cycle(iv)?;
        let mapped = Chain::from_simplices(
            dim,
            z.simplices.iter().map(|s| {
                Simplex::from_sorted(
                    &s.vertices()
                        .iter()
                        .map(|&v| keep[v as usize])
                        .collect::<Vec<_>>(),
                )
            }),
        )?;
        let mut sum = mapped.clone();
        sum.add(cycle)?;
        if persistence.is_boundary(&sum, scale)? {
            return Ok(Some(mapped));
        }
    }
    Ok(None)
}

/// Localized lengths off by more than this fraction make the candidate
/// undetermined.
pub const MAX_LENGTH_MISMATCH: f64 = 0.25;

pub fn apply_localization(candidate: &mut Candidate, loc: &Localization) {
    if loc.relative_mismatch() > MAX_LENGTH_MISMATCH {
        candidate.classification = Classification::Undetermined;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::{ComplexKind, Convention};
    use crate::metric::circle_metric;

    fn barcode(bars: &[Bar]) -> Barcode {
        let all = bars
            .iter()
            .map(|&(d, b, e)| Interval::new(d, b, e, Convention::Open))
            .collect();
        Barcode::new(ComplexKind::Rips, Convention::Open, 3, 10.0, all)
    }

    #[test]
    fn geometric_candidate() {
        let r = detect(
            &barcode(&[(3, 0.524, 0.628), (2, 0.515, 2.09)]),
            &DetectConfig::default(),
        );
        assert_eq!(r.candidates.len(), 1);
        let c = &r.candidates[0];
        assert_eq!(c.classification, Classification::Geometric);
        assert!((c.length_estimate - std::f64::consts::FRAC_PI_2).abs() < 0.01);
        assert!((c.height_upper_bound.unwrap() - 6.27).abs() < 0.01);
        assert!(r.unexplained_bars.is_empty());
    }

    #[test]
    fn topological_candidate() {
        let r = detect(
            &barcode(&[(1, 0.0, 1.0 / 3.0), (3, 1.0 / 3.0, 0.4)]),
            &DetectConfig::default(),
        );
        assert_eq!(r.candidates.len(), 1);
        assert_eq!(r.candidates[0].classification, Classification::Topological);
        assert!((r.candidates[0].length_estimate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_barcode() {
        let r = detect(&barcode(&[]), &DetectConfig::default());
        assert!(r.candidates.is_empty() && r.unexplained_bars.is_empty() && r.warnings.is_empty());
    }

    #[test]
    fn low_dimensional_barcode_warns() {
        let b = Barcode::new(ComplexKind::Rips, Convention::Open, 1, 1.0, vec![]);
        assert_eq!(detect(&b, &DetectConfig::default()).warnings.len(), 1);
    }

    #[test]
    fn two_circles_two_candidates() {
        let bars = [
            (3, 1.0 / 3.0, 0.4),
            (3, 2.0 / 3.0, 0.8),
            (1, 0.0, 1.0 / 3.0),
            (1, 0.0, 2.0 / 3.0),
        ];
        let r = detect(&barcode(&bars), &DetectConfig::default());
        assert_eq!(r.candidates.len(), 2);
        assert!(r
            .candidates
            .iter()
            .all(|c| c.classification == Classification::Topological));
    }

    #[test]
    fn tour_of_a_shuffled_polygon() {
        let pos: Vec<f64> = (0..20).map(|k| k as f64 / 20.0).collect();
        let m = circle_metric(&pos, 1.0).unwrap();
        let verts = [
            7u32, 3, 19, 0, 12, 5, 1, 14, 9, 2, 18, 4, 11, 6, 16, 8, 13, 10, 17, 15,
        ];
        let t = greedy_tour(&verts, &m).unwrap();
        assert!((t.length() - 1.0).abs() < 0.05);
        assert!(matches!(
            greedy_tour(&[1, 2, 2], &m),
            Err(Error::TooFewVertices(2))
        ));
    }

    #[test]
    fn report_serializes() {
        let r = detect(
            &barcode(&[(3, 0.524, 0.628), (2, 0.515, 2.09)]),
            &DetectConfig::default(),
        );
        let json = r.to_json();
        assert!(json.contains("\"classification\": \"geometric\""));
    }
}

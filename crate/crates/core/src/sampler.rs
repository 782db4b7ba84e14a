//! Reproducible point samples of circles, flat tori and spheres with a
//! polar cap removed.
//!
//! Every generator draws from a xoshiro256++ stream seeded through
//! splitmix64, so a seed pins the output bit-for-bit on every platform.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{bad, Error, Result};

pub type SampleRng = Xoshiro256PlusPlus;

pub fn rng(seed: u64) -> SampleRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Regular,
    Uniform,
}

impl std::str::FromStr for Mode {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regular" => Ok(Mode::Regular),
            "uniform" => Ok(Mode::Uniform),
            _ => Err(bad(format!("unknown sampling mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Space {
    Circle {
        circumference: f64,
    },
    FlatTorus {
        a: f64,
        b: f64,
    },
    SphereMinusCap {
        radius: f64,
        cap_radius: f64,
        boundary_m: usize,
    },
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Circle { circumference } => write!(f, "space=circle L={circumference}"),
            Space::FlatTorus { a, b } => write!(f, "space=flat_torus a={a} b={b}"),
            Space::SphereMinusCap {
                radius,
                cap_radius,
                boundary_m,
            } => write!(
                f,
                "space=sphere_minus_cap R={radius} rho={cap_radius} boundary_m={boundary_m}"
            ),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleSpec {
    pub space: Space,
    pub n: usize,
    pub mode: Mode,
    pub seed: u64,
}

/// A generated sample: each point is a coordinate row (arc position,
/// `(u, v)` or `(x, y, z)`).
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub spec: SampleSpec,
    pub points: Vec<Vec<f64>>,
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(bad("sample size must be at least 1"));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(bad(format!("{name} must be positive, got {v}")))
            }
        };
        match self.space {
            Space::Circle { circumference } => positive("L", circumference),
            Space::FlatTorus { a, b } => positive("a", a).and(positive("b", b)),
            Space::SphereMinusCap {
                radius, cap_radius, ..
            } => {
                positive("R", radius)?;
                positive("rho", cap_radius)?;
                if cap_radius >= radius {
                    return Err(bad(format!(
                        "need rho < R, got rho={cap_radius}, R={radius}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn generate(&self) -> Result<Sample> {
        self.validate()?;
        let points = match self.space {
            Space::Circle { circumference } => {
                sample_circle(self.n, circumference, self.mode, self.seed)?
                    .into_iter()
                    .map(|s| vec![s])
                    .collect()
            }
            Space::FlatTorus { a, b } => sample_flat_torus(self.n, a, b, self.mode, self.seed)?
                .into_iter()
                .map(|p| p.to_vec())
                .collect(),
            Space::SphereMinusCap {
                radius,
                cap_radius,
                boundary_m,
            } => sample_sphere_minus_cap(self.n, radius, cap_radius, self.seed, boundary_m)?
                .into_iter()
                .map(|p| p.to_vec())
                .collect(),
        };
        Ok(Sample {
            spec: *self,
            points,
        })
    }
}

impl Sample {
    /// Comma-separated rows after a one-line `#` header naming the space.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let mode = match self.spec.mode {
            Mode::Regular => "regular",
            Mode::Uniform => "uniform",
        };
        writeln!(
            out,
            "# {} n={} mode={mode} seed={}",
            self.spec.space,
            self.points.len(),
            self.spec.seed
        )?;
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Reads coordinate rows as written by [`Sample::write_text`]; `#` lines
/// and blank lines are skipped.
pub fn read_points<R: BufRead>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        if let Some(first) = rows.first().map(|r: &Vec<f64>| r.len()) {
            if row.len() != first {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {first} coordinates, got {}", row.len()),
                });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Arc positions on a circle of circumference `l`; uniform samples are sorted.
pub fn sample_circle(n: usize, l: f64, mode: Mode, seed: u64) -> Result<Vec<f64>> {
    SampleSpec {
        space: Space::Circle { circumference: l },
        n,
        mode,
        seed,
    }
    .validate()?;
    Ok(match mode {
        Mode::Regular => (0..n).map(|k| k as f64 * l / n as f64).collect(),
        Mode::Uniform => {
            let mut rng = rng(seed);
            let mut s: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * l).collect();
            s.sort_by(f64::total_cmp);
            s
        }
    })
}

pub fn sample_flat_torus(n: usize, a: f64, b: f64, mode: Mode, seed: u64) -> Result<Vec<[f64; 2]>> {
    SampleSpec {
        space: Space::FlatTorus { a, b },
        n,
        mode,
        seed,
    }
    .validate()?;
    match mode {
        Mode::Regular => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                return Err(bad(format!(
                    "regular torus grid needs a square count, got {n}"
                )));
            }
            let mut out = Vec::with_capacity(n);
            for i in 0..side {
                for j in 0..side {
                    out.push([i as f64 * a / side as f64, j as f64 * b / side as f64]);
                }
            }
            Ok(out)
        }
        Mode::Uniform => {
            let mut rng = rng(seed);
            Ok((0..n)
                .map(|_| [rng.gen::<f64>() * a, rng.gen::<f64>() * b])
                .collect())
        }
    }
}

/// Height of the boundary parallel of Euclidean radius `cap_radius`.
pub fn cap_height(radius: f64, cap_radius: f64) -> f64 {
    (radius * radius - cap_radius * cap_radius).sqrt()
}

/// `n` points uniform by area on the sphere of radius `radius` below the
/// parallel of Euclidean radius `cap_radius`, followed by `boundary_m`
/// regularly spaced points on that parallel.
pub fn sample_sphere_minus_cap(
    n: usize,
    radius: f64,
    cap_radius: f64,
    seed: u64,
    boundary_m: usize,
) -> Result<Vec<[f64; 3]>> {
    SampleSpec {
        space: Space::SphereMinusCap {
            radius,
            cap_radius,
            boundary_m,
        },
        n,
        mode: Mode::Uniform,
        seed,
    }
    .validate()?;
    let z_max = cap_height(radius, cap_radius);
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(n + boundary_m);
    // z uniform on [-R, R] with uniform longitude is uniform by area
    // (Archimedes); reject the removed cap
    while out.len() < n {
        let z = radius * (2.0 * rng.gen::<f64>() - 1.0);
        let phi = 2.0 * PI * rng.gen::<f64>();
        if z > z_max {
            continue;
        }
        let rho = (radius * radius - z * z).max(0.0).sqrt();
        out.push([rho * phi.cos(), rho * phi.sin(), z]);
    }
    for j in 0..boundary_m {
        let phi = 2.0 * PI * j as f64 / boundary_m as f64;
        out.push([cap_radius * phi.cos(), cap_radius * phi.sin(), z_max]);
    }
    Ok(out)
}

/// `k` distinct indices out of `0..n`, uniform without replacement, sorted.
pub fn subsample_indices(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k > n {
        return Err(bad(format!("cannot draw {k} of {n} points")));
    }
    let mut rng = rng(seed);
    let mut idx = index::sample(&mut rng, n, k).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Greedy farthest-point subsample of size `k` under `dist`, starting from
/// the given seed points (which are always kept, in order).
pub fn farthest_point_subsample(
    n: usize,
    k: usize,
    seeds: &[usize],
    dist: impl Fn(usize, usize) -> f64,
) -> Result<Vec<usize>> {
    if k > n || seeds.is_empty() || seeds.len() > k {
        return Err(bad(format!(
            "cannot pick {k} of {n} points from {} seeds",
            seeds.len()
        )));
    }
    let mut chosen = seeds.to_vec();
    let mut nearest = vec![f64::INFINITY; n];
    for &s in seeds {
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(dist(s, i));
        }
    }
    while chosen.len() < k {
        let (far, _) = nearest
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty");
        chosen.push(far);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(dist(far, i));
        }
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_circle() {
        assert_eq!(
            sample_circle(4, 1.0, Mode::Regular, 0).unwrap(),
            vec![0.0, 0.25, 0.5, 0.75]
        );
        assert_eq!(sample_circle(1, 1.0, Mode::Uniform, 3).unwrap().len(), 1);
        assert_eq!(sample_circle(1, 1.0, Mode::Regular, 3).unwrap(), vec![0.0]);
        assert!(sample_circle(0, 1.0, Mode::Regular, 0).is_err());
    }

    #[test]
    fn uniform_circle_max_gap() {
        // 1000 uniform points: the max gap exceeds 0.02 with probability
        // about 1000 * exp(-20), so all 100 seeds should pass
        let mut fails = 0;
        for seed in 0..100 {
            let s = sample_circle(1000, 1.0, Mode::Uniform, seed).unwrap();
            let mut gap = 1.0 - s[s.len() - 1] + s[0];
            for w in s.windows(2) {
                gap = gap.max(w[1] - w[0]);
            }
            if gap >= 0.02 {
                fails += 1;
            }
        }
        assert!(fails <= 1, "{fails} seeds with a large gap");
    }

    #[test]
    fn torus_grid_and_errors() {
        let g = sample_flat_torus(4, 1.0, 1.0, Mode::Regular, 0).unwrap();
        assert_eq!(g, vec![[0.0, 0.0], [0.0, 0.5], [0.5, 0.0], [0.5, 0.5]]);
        assert!(sample_flat_torus(3, 1.0, 1.0, Mode::Regular, 0).is_err());
        assert!(sample_flat_torus(4, 0.0, 1.0, Mode::Uniform, 0).is_err());
    }

    #[test]
    fn torus_uniform_points_distinct() {
        for seed in 0..20 {
            let p = sample_flat_torus(500, 1.0, 1.3, Mode::Uniform, seed).unwrap();
            let m = crate::metric::flat_torus_metric(&p, 1.0, 1.3).unwrap();
            assert!(m.lower().iter().all(|&d| d > 0.0));
        }
    }

    #[test]
    fn sphere_cap_constraints() {
        let r = 1.0;
        for &rho in &[0.25, 0.999] {
            let zmax = cap_height(r, rho);
            let pts = sample_sphere_minus_cap(2000, r, rho, 11, 16).unwrap();
            assert_eq!(pts.len(), 2016);
            for p in &pts {
                let norm2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                assert!((norm2 - r * r).abs() < 1e-12);
                assert!(p[2] <= zmax + 1e-12);
            }
        }
        assert!(sample_sphere_minus_cap(10, 1.0, 1.0, 0, 0).is_err());
    }

    #[test]
    fn boundary_parallel_length() {
        let pts = sample_sphere_minus_cap(1, 1.0, 0.25, 0, 400).unwrap();
        let ring = &pts[1..];
        let mut len = 0.0;
        for i in 0..ring.len() {
            let a = ring[i];
            let b = ring[(i + 1) % ring.len()];
            len += ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        }
        assert!((len - PI / 2.0).abs() < 1e-4, "len = {len}");
    }

    #[test]
    fn sphere_area_density_is_uniform_across_bands() {
        let (r, rho) = (1.0, 0.25);
        let zmax = cap_height(r, rho);
        let pts = sample_sphere_minus_cap(2000, r, rho, 5, 0).unwrap();
        let bands = 4;
        let width = (zmax + r) / bands as f64;
        let mut counts = vec![0usize; bands];
        for p in &pts {
            let b = (((p[2] + r) / width) as usize).min(bands - 1);
            counts[b] += 1;
        }
        // each band has area 2 pi R dz, so all expected counts are equal
        let expected = 2000.0 / bands as f64;
        for c in counts {
            assert!((c as f64 - expected).abs() / expected < 0.10, "count {c}");
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let spec = SampleSpec {
            space: Space::SphereMinusCap {
                radius: 1.0,
                cap_radius: 0.25,
                boundary_m: 3,
            },
            n: 50,
            mode: Mode::Uniform,
            seed: 99,
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        spec.generate().unwrap().write_text(&mut a).unwrap();
        spec.generate().unwrap().write_text(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn subsample_is_sorted_and_distinct() {
        let s = subsample_indices(4000, 400, 1).unwrap();
        assert_eq!(s.len(), 400);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!(subsample_indices(3, 4, 1).is_err());
    }

    #[test]
    fn points_text_round_trip() {
        let spec = SampleSpec {
            space: Space::FlatTorus { a: 1.0, b: 1.3 },
            n: 7,
            mode: Mode::Uniform,
            seed: 5,
        };
        let sample = spec.generate().unwrap();
        let mut buf = Vec::new();
        sample.write_text(&mut buf).unwrap();
        assert_eq!(read_points(&buf[..]).unwrap(), sample.points);
        assert!(read_points("1,2\n3\n".as_bytes()).is_err());
    }
}

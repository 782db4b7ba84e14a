//! Explicit 2-chains over Z/2: fan null-homologies of sampled loops and
//! tube cycles swept out by a homotopy grid between two capped loops.
//!
//! Loops are cyclic sequences of point references. References may repeat
//! (grids snapped onto a sample do this); every chain here is the image of
//! an abstract triangulation under the reference map, so triangles and
//! edges that collapse are dropped and coinciding ones cancel in pairs.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{bad, Error, Result};
use crate::filtration::Simplex;
use crate::persistence::Chain;

/// Relative slack for comparing accumulated arc lengths with fractions of
/// the circumference.
const ARC_EPS: f64 = 1e-9;

/// A cyclic sample `x_0, ..., x_{k-1}` of a loop. `arcs[i]` is the length
/// of the loop between `x_i` and `x_{i+1}` (indices mod `k`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopSample {
    pub points: Vec<u32>,
    pub arcs: Vec<f64>,
}

impl LoopSample {
    pub fn new(points: Vec<u32>, arcs: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != arcs.len() {
            return Err(bad(format!(
                "{} points need as many arcs, got {}",
                points.len(),
                arcs.len()
            )));
        }
        if let Some(a) = arcs.iter().find(|&&a| !(a > 0.0 && a.is_finite())) {
            return Err(bad(format!("arc lengths must be positive, got {a}")));
        }
        Ok(LoopSample { points, arcs })
    }

    /// `k` equally spaced samples of a loop of length `length`, referring to
    /// points `0..k`.
    pub fn regular(k: usize, length: f64) -> Result<Self> {
        Self::new((0..k as u32).collect(), vec![length / k as f64; k])
    }

    /// Samples at the given positions along a loop of length `length`
    /// (positions strictly increasing in `[0, length)`), referring to
    /// points `0..k`.
    pub fn from_positions(positions: &[f64], length: f64) -> Result<Self> {
        let k = positions.len();
        if k == 0 {
            return Err(bad("empty loop"));
        }
        let arcs = (0..k)
            .map(|i| {
                if i + 1 < k {
                    positions[i + 1] - positions[i]
                } else {
                    length - positions[k - 1] + positions[0]
                }
            })
            .collect();
        Self::new((0..k as u32).collect(), arcs)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.arcs.iter().sum()
    }

    pub fn max_gap(&self) -> f64 {
        self.arcs.iter().copied().fold(0.0, f64::max)
    }

    /// Length of the loop going forward from sample `i` to sample `j`.
    pub fn forward_arc(&self, i: usize, j: usize) -> f64 {
        let k = self.len();
        let steps = (j + k - i % k) % k;
        (0..steps).map(|s| self.arcs[(i + s) % k]).sum()
    }

    pub fn shortest_arc(&self, i: usize, j: usize) -> f64 {
        let f = self.forward_arc(i, j);
        f.min(self.length() - f)
    }

    /// The edge cycle `x_0 x_1 + x_1 x_2 + ... + x_{k-1} x_0` over Z/2.
    pub fn cycle(&self) -> Chain {
        let k = self.len();
        let mut c = Chain::new(1);
        for i in 0..k {
            if let Some(e) = Simplex::new([self.points[i], self.points[(i + 1) % k]]) {
                c.toggle(e).expect("edges have dimension 1");
            }
        }
        c
    }
}

/// Whether every consecutive arc is shorter than `r`.
pub fn is_r_sample(sample: &LoopSample, r: f64) -> bool {
    sample.arcs.iter().all(|&a| a < r)
}

/// A 2-chain built by a fan construction, with the 1-cycle it fills.
#[derive(Clone, Debug)]
pub struct TriangleChain {
    pub chain: Chain,
    /// The cycle the chain was built to fill.
    pub boundary: Chain,
    /// Loop positions of the fan apexes, in order.
    pub apexes: Vec<usize>,
    /// Triangles as loop positions, before the reference map (degenerate
    /// ones omitted).
    pub triangles: Vec<[usize; 3]>,
    /// Largest shortest-arc distance between two vertices of one triangle.
    pub max_pair_arc: f64,
}

impl TriangleChain {
    /// Checks that the chain's boundary is the declared cycle.
    pub fn validate(&self) -> bool {
        self.chain.boundary() == self.boundary
    }
}

/// Picks `m` apexes greedily: `t_0 = 0`, then the smallest positions whose
/// forward arc from `x_0` reaches `L/m, 2L/m, ...`. Positions equal to `k`
/// wrap to `0`.
fn greedy_apexes(sample: &LoopSample, m: usize) -> Vec<usize> {
    let k = sample.len();
    let total = sample.length();
    let mut out = vec![0];
    let mut pos = 0;
    let mut acc = 0.0;
    for i in 1..m {
        let target = total * i as f64 / m as f64 - ARC_EPS * total;
        while pos < k && acc < target {
            acc += sample.arcs[pos];
            pos += 1;
        }
        out.push(pos % k);
    }
    out
}

/// Forward position gaps between consecutive apexes; they must add up to
/// one trip around the loop.
fn apex_gaps(sample: &LoopSample, apexes: &[usize]) -> Result<Vec<usize>> {
    let k = sample.len();
    if let Some(&t) = apexes.iter().find(|&&t| t >= k) {
        return Err(Error::BadTriple(format!(
            "apex position {t} out of range for a {k}-point loop"
        )));
    }
    let m = apexes.len();
    let mut gaps: Vec<usize> = (0..m)
        .map(|i| (apexes[(i + 1) % m] + k - apexes[i]) % k)
        .collect();
    let sum: usize = gaps.iter().sum();
    if sum == 0 {
        // every apex at the same point: the first arc is the whole loop
        gaps[0] = k;
    } else if sum != k {
        return Err(Error::BadTriple(format!(
            "apexes {apexes:?} are not in cyclic order"
        )));
    }
    Ok(gaps)
}

/// Rejects apex arcs of length `>= r`, or `NotDenseEnough` when selecting.
fn check_apex_arcs(
    sample: &LoopSample,
    apexes: &[usize],
    gaps: &[usize],
    r: f64,
) -> Option<String> {
    for (i, (&t, &g)) in apexes.iter().zip(gaps).enumerate() {
        let arc: f64 = (0..g).map(|s| sample.arcs[(t + s) % sample.len()]).sum();
        if arc >= r {
            return Some(format!(
                "arc {i} from position {t} has length {arc}, not below {r}"
            ));
        }
    }
    None
}

fn select_apexes(sample: &LoopSample, r: f64, m: usize) -> Result<Vec<usize>> {
    let total = sample.length();
    if r <= total / m as f64 {
        return Err(Error::NotDenseEnough(format!(
            "scale {r} does not exceed L/{m} = {}",
            total / m as f64
        )));
    }
    let apexes = greedy_apexes(sample, m);
    let gaps = apex_gaps(sample, &apexes).map_err(|e| Error::NotDenseEnough(e.to_string()))?;
    match check_apex_arcs(sample, &apexes, &gaps, r) {
        Some(msg) => Err(Error::NotDenseEnough(msg)),
        None => Ok(apexes),
    }
}

/// Three positions splitting the loop into arcs shorter than `r`. Any
/// `(r - L/3)`-sample admits one; sparser loops succeed when the greedy
/// split happens to fit.
pub fn select_equidistant_triple(sample: &LoopSample, r: f64) -> Result<(usize, usize, usize)> {
    let t = select_apexes(sample, r, 3)?;
    Ok((t[0], t[1], t[2]))
}

/// Four positions in square-like formation, splitting the loop into arcs
/// shorter than `r`.
pub fn select_square_quadruple(
    sample: &LoopSample,
    r: f64,
) -> Result<(usize, usize, usize, usize)> {
    let t = select_apexes(sample, r, 4)?;
    Ok((t[0], t[1], t[2], t[3]))
}

fn fan(
    sample: &LoopSample,
    apexes: &[usize],
    r: f64,
    central: &[[usize; 3]],
) -> Result<TriangleChain> {
    let k = sample.len();
    let gaps = apex_gaps(sample, apexes)?;
    if let Some(msg) = check_apex_arcs(sample, apexes, &gaps, r) {
        return Err(Error::BadTriple(msg));
    }
    let mut triangles: Vec<[usize; 3]> = central.to_vec();
    for (&t, &g) in apexes.iter().zip(&gaps) {
        // cone from x_t over the segments (x_{p-1}, x_p), t+2 <= p <= t+g
        for p in t + 2..=t + g {
            triangles.push([t % k, (p - 1) % k, p % k]);
        }
    }
    let mut chain = Chain::new(2);
    let mut kept = Vec::with_capacity(triangles.len());
    let mut max_pair_arc: f64 = 0.0;
    for tri in triangles {
        let Some(s) = Simplex::new(tri.map(|i| sample.points[i])) else {
            continue;
        };
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            max_pair_arc = max_pair_arc.max(sample.shortest_arc(tri[a], tri[b]));
        }
        chain.toggle(s).expect("triangles have dimension 2");
        kept.push(tri);
    }
    let out = TriangleChain {
        chain,
        boundary: sample.cycle(),
        apexes: apexes.to_vec(),
        triangles: kept,
        max_pair_arc,
    };
    debug_assert!(out.validate(), "fan boundary differs from the loop cycle");
    Ok(out)
}

/// Fan null-homology of a loop in its Rips complex: the central triangle on
/// the triple plus, for each apex, the cone from it over the segments up to
/// the next apex. Degenerate triangles are dropped.
pub fn rips_fan_nullhomology(
    sample: &LoopSample,
    triple: (usize, usize, usize),
    r: f64,
) -> Result<TriangleChain> {
    let (a, b, c) = triple;
    fan(sample, &[a, b, c], r, &[[a, b, c]])
}

/// Čech variant: two central triangles on the quadruple and four cones.
pub fn cech_fan_nullhomology(
    sample: &LoopSample,
    quad: (usize, usize, usize, usize),
    r: f64,
) -> Result<TriangleChain> {
    let (a, b, c, d) = quad;
    fan(sample, &[a, b, c, d], r, &[[a, b, c], [a, c, d]])
}

/// Closed row of a homotopy grid as a loop sample, with the given arc
/// lengths between consecutive columns.
pub fn grid_row_loop(grid: &[Vec<u32>], row: usize, arcs: Vec<f64>) -> Result<LoopSample> {
    let cols = grid
        .get(row)
        .ok_or_else(|| Error::BadGrid(format!("no row {row}")))?;
    LoopSample::new(cols[..cols.len() - 1].to_vec(), arcs)
}

/// The 2-cycle made of the two lids and the triangulated homotopy grid
/// between their boundary loops. `grid[m][n]`: row `m` runs from the top
/// loop (`m = 0`) to the bottom loop (last row); the last column repeats the
/// first. Cells get alternating diagonals by row parity.
pub fn build_tube_cycle(
    grid: &[Vec<u32>],
    lid_top: &TriangleChain,
    lid_bottom: &TriangleChain,
) -> Result<Chain> {
    let rows = grid.len();
    if rows < 2 {
        return Err(Error::BadGrid(format!(
            "need at least two rows, got {rows}"
        )));
    }
    let cols = grid[0].len();
    if cols < 2 {
        return Err(Error::BadGrid(format!(
            "need at least two columns, got {cols}"
        )));
    }
    for (m, row) in grid.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::BadGrid(format!(
                "row {m} has {} columns, expected {cols}",
                row.len()
            )));
        }
        if row[0] != row[cols - 1] {
            return Err(Error::BadGrid(format!(
                "row {m} is not cyclic: first and last columns differ"
            )));
        }
    }
    let row_cycle = |m: usize| {
        let mut c = Chain::new(1);
        for n in 0..cols - 1 {
            if let Some(e) = Simplex::new([grid[m][n], grid[m][n + 1]]) {
                c.toggle(e).expect("edges have dimension 1");
            }
        }
        c
    };
    if lid_top.chain.boundary() != row_cycle(0) {
        return Err(Error::LidMismatch(0));
    }
    if lid_bottom.chain.boundary() != row_cycle(rows - 1) {
        return Err(Error::LidMismatch(rows - 1));
    }
    let mut chain = lid_top.chain.clone();
    chain.add(&lid_bottom.chain)?;
    for m in 0..rows - 1 {
        for n in 0..cols - 1 {
            let (a, b, c, d) = (
                grid[m][n],
                grid[m][n + 1],
                grid[m + 1][n],
                grid[m + 1][n + 1],
            );
            let cell = if m % 2 == 1 {
                [[a, b, d], [a, c, d]]
            } else {
                [[a, b, c], [b, c, d]]
            };
            for tri in cell {
                if let Some(s) = Simplex::new(tri) {
                    chain.toggle(s)?;
                }
            }
        }
    }
    Ok(chain)
}

/// Latitude homotopy on the sphere of radius `radius`: row `m` is the
/// parallel at polar angle interpolating linearly from `polar_top` to
/// `polar_bottom`, sampled at `m_steps` equally spaced longitudes (the
/// first longitude repeated at the end). Returns `(m_steps+1)` rows.
pub fn sphere_latitude_grid(
    m_steps: usize,
    radius: f64,
    polar_top: f64,
    polar_bottom: f64,
) -> Result<Vec<Vec<[f64; 3]>>> {
    if m_steps < 3 {
        return Err(bad(format!("grid needs at least 3 steps, got {m_steps}")));
    }
    if !(0.0 < polar_top && polar_top < polar_bottom && polar_bottom < PI) {
        return Err(bad(format!(
            "polar angles must satisfy 0 < {polar_top} < {polar_bottom} < pi"
        )));
    }
    Ok((0..=m_steps)
        .map(|m| {
            let theta = polar_top + (polar_bottom - polar_top) * m as f64 / m_steps as f64;
            (0..=m_steps)
                .map(|n| {
                    let phi = 2.0 * PI * (n % m_steps) as f64 / m_steps as f64;
                    let s = radius * theta.sin();
                    [s * phi.cos(), s * phi.sin(), radius * theta.cos()]
                })
                .collect()
        })
        .collect())
}

/// Replaces every grid point by the index of its nearest sample point
/// (Euclidean in the embedding).
pub fn snap_grid<P: AsRef<[f64]>>(grid: &[Vec<[f64; 3]>], sample: &[P]) -> Result<Vec<Vec<u32>>> {
    if sample.is_empty() {
        return Err(bad("cannot snap onto an empty sample"));
    }
    let nearest = |q: &[f64; 3]| {
        let d2 = |p: &P| {
            p.as_ref()
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        };
        (0..sample.len())
            .min_by(|&i, &j| d2(&sample[i]).total_cmp(&d2(&sample[j])))
            .expect("non-empty") as u32
    };
    Ok(grid
        .iter()
        .map(|row| row.iter().map(nearest).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_sample_is_strict() {
        let l = LoopSample::regular(12, 1.0).unwrap();
        assert!(is_r_sample(&l, 0.1));
        assert!(!is_r_sample(&l, 1.0 / 12.0));
    }

    #[test]
    fn triples() {
        let l = LoopSample::regular(12, 1.0).unwrap();
        assert_eq!(select_equidistant_triple(&l, 0.4).unwrap(), (0, 4, 8));
        let l3 = LoopSample::regular(3, 1.0).unwrap();
        assert_eq!(select_equidistant_triple(&l3, 0.4).unwrap(), (0, 1, 2));
        assert!(matches!(
            select_equidistant_triple(&l, 0.33),
            Err(Error::NotDenseEnough(_))
        ));
    }

    #[test]
    fn rips_fan_on_regular_polygons() {
        let l = LoopSample::regular(12, 1.0).unwrap();
        let t = rips_fan_nullhomology(&l, (0, 4, 8), 0.4).unwrap();
        assert_eq!(t.chain.len(), 10);
        assert!(t.validate());
        assert!(t.max_pair_arc < 0.4);
        let l3 = LoopSample::regular(3, 1.0).unwrap();
        assert_eq!(
            rips_fan_nullhomology(&l3, (0, 1, 2), 0.4)
                .unwrap()
                .chain
                .len(),
            1
        );
    }

    #[test]
    fn degenerate_triple_drops_collapsed_triangles() {
        let l = LoopSample::regular(6, 1.0).unwrap();
        let t = rips_fan_nullhomology(&l, (0, 0, 3), 0.55).unwrap();
        assert!(t.validate());
        assert_eq!(t.boundary, l.cycle());
    }

    #[test]
    fn bad_triples() {
        let l = LoopSample::regular(12, 1.0).unwrap();
        assert!(matches!(
            rips_fan_nullhomology(&l, (0, 2, 8), 0.4),
            Err(Error::BadTriple(_))
        ));
        assert!(matches!(
            rips_fan_nullhomology(&l, (0, 8, 4), 0.4),
            Err(Error::BadTriple(_))
        ));
    }

    #[test]
    fn cech_fans() {
        let l = LoopSample::regular(12, 1.0).unwrap();
        let t = cech_fan_nullhomology(&l, (2, 5, 8, 11), 0.3).unwrap();
        assert!(t.validate());
        assert_eq!(t.apexes, vec![2, 5, 8, 11]);
        let l4 = LoopSample::regular(4, 1.0).unwrap();
        let q = select_square_quadruple(&l4, 0.3).unwrap();
        assert_eq!(cech_fan_nullhomology(&l4, q, 0.3).unwrap().chain.len(), 2);
    }

    #[test]
    fn constant_homotopy_tube_is_a_cycle() {
        let row: Vec<u32> = (0..6).chain([0]).collect();
        let grid = vec![row.clone(); 4];
        let l = LoopSample::regular(6, 1.0).unwrap();
        let lid =
            rips_fan_nullhomology(&l, select_equidistant_triple(&l, 0.5).unwrap(), 0.5).unwrap();
        let tube = build_tube_cycle(&grid, &lid, &lid).unwrap();
        assert!(tube.is_cycle());
    }

    #[test]
    fn shifted_row_is_a_lid_mismatch() {
        let l = LoopSample::regular(6, 1.0).unwrap();
        let lid = rips_fan_nullhomology(&l, (0, 2, 4), 0.5).unwrap();
        let mut grid: Vec<Vec<u32>> = (0..3).map(|_| (0..6).chain([0]).collect()).collect();
        grid[2] = (10..16).chain([10]).collect();
        assert!(matches!(
            build_tube_cycle(&grid, &lid, &lid),
            Err(Error::LidMismatch(2))
        ));
        grid[1].pop();
        assert!(matches!(
            build_tube_cycle(&grid, &lid, &lid),
            Err(Error::BadGrid(_))
        ));
    }

    #[test]
    fn latitude_grid_rows_are_cyclic() {
        let g = sphere_latitude_grid(24, 1.0, 0.25, 3.0).unwrap();
        assert_eq!(g.len(), 25);
        assert!(g.iter().all(|row| row.len() == 25 && row[0] == row[24]));
        let snapped = snap_grid(&g, &g.iter().flatten().copied().collect::<Vec<_>>()).unwrap();
        assert!(snapped.iter().all(|row| row[0] == row[24]));
    }
}

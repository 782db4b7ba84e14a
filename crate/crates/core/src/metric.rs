//! Finite metric spaces: exact circle and flat-torus metrics, and graph
//! geodesic approximations of sampled surfaces.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{bad, Error, Result};

/// Default neighbor count of the k-nearest-neighbor graph.
pub const DEFAULT_K: usize = 8;

/// Per-point payload carried along with a metric.
#[derive(Clone, Debug, PartialEq)]
pub enum Labels {
    /// Arc coordinates on a circle of the given circumference.
    Arc {
        positions: Vec<f64>,
        circumference: f64,
    },
    /// Embedded coordinates (any ambient dimension).
    Coords(Vec<Vec<f64>>),
}

/// Symmetric distance table over `n` points, stored as a condensed lower
/// triangle: entry `(i, j)` with `i > j` lives at `i * (i - 1) / 2 + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetric {
    n: usize,
    lower: Vec<f64>,
    labels: Option<Labels>,
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    i * (i - 1) / 2 + j
}

impl FiniteMetric {
    /// Builds a metric from a condensed lower triangle, rejecting negative or
    /// non-finite entries.
    pub fn from_lower(n: usize, lower: Vec<f64>) -> Result<Self> {
        if lower.len() != n * n.saturating_sub(1) / 2 {
            return Err(bad(format!(
                "lower triangle of {n} points needs {} entries, got {}",
                n * n.saturating_sub(1) / 2,
                lower.len()
            )));
        }
        if let Some(pos) = lower.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(bad(format!(
                "distance entry {pos} is negative or not finite"
            )));
        }
        Ok(FiniteMetric {
            n,
            lower,
            labels: None,
        })
    }

    /// Builds a metric by evaluating `f(i, j)` for every `i > j`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut lower = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 1..n {
            for j in 0..i {
                lower.push(f(i, j));
            }
        }
        Self::from_lower(n, lower)
    }

    pub fn with_labels(mut self, labels: Labels) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    /// The condensed lower triangle, row by row.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            Ordering::Equal => 0.0,
            Ordering::Greater => self.lower[tri(i, j)],
            Ordering::Less => self.lower[tri(j, i)],
        }
    }

    pub fn max_distance(&self) -> f64 {
        self.lower.iter().copied().fold(0.0, f64::max)
    }

    /// Full row-major `n * n` copy of the table.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 1..n {
            for j in 0..i {
                let d = self.lower[tri(i, j)];
                out[i * n + j] = d;
                out[j * n + i] = d;
            }
        }
        out
    }

    /// Restriction to the given points, in the given order. Labels are
    /// restricted along with the distances.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad_idx) = indices.iter().find(|&&i| i >= self.n) {
            return Err(bad(format!(
                "index {bad_idx} out of range for {} points",
                self.n
            )));
        }
        let mut sub = Self::from_fn(indices.len(), |i, j| self.dist(indices[i], indices[j]))?;
        sub.labels = self.labels.as_ref().map(|l| match l {
            Labels::Arc {
                positions,
                circumference,
            } => Labels::Arc {
                positions: indices.iter().map(|&i| positions[i]).collect(),
                circumference: *circumference,
            },
            Labels::Coords(c) => Labels::Coords(indices.iter().map(|&i| c[i].clone()).collect()),
        });
        Ok(sub)
    }

    /// Checks symmetry-by-construction invariants: zero diagonal, finite
    /// non-negative entries, and the triangle inequality up to `tol`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        if let Some(pos) = self.lower.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(bad(format!(
                "distance entry {pos} is negative or not finite"
            )));
        }
        let n = self.n;
        let dense = self.to_dense();
        for i in 0..n {
            for j in 0..n {
                let dij = dense[i * n + j];
                for k in 0..n {
                    if dense[i * n + k] > dij + dense[j * n + k] + tol {
                        return Err(bad(format!(
                            "triangle inequality fails for ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Writes the lower triangle as comma-separated text: row `i` lists
    /// `d(i, 0..i)`, so row 0 is empty. Values use shortest round-trip
    /// formatting, so reading the text back is bit-exact.
    pub fn write_lower_triangular<W: Write>(&self, mut out: W) -> Result<()> {
        let mut line = String::new();
        for i in 0..self.n {
            line.clear();
            for j in 0..i {
                if j > 0 {
                    line.push(',');
                }
                write!(line, "{}", self.lower[tri(i, j)]).expect("string write");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_lower_triangular<R: BufRead>(input: R) -> Result<Self> {
        let mut lower = Vec::new();
        let mut n = 0;
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.starts_with('#') {
                continue;
            }
            let mut count = 0;
            if !line.is_empty() {
                for tok in line.split(',') {
                    let v: f64 = tok.trim().parse().map_err(|e| Error::Parse {
                        line: lineno + 1,
                        msg: format!("{tok:?}: {e}"),
                    })?;
                    lower.push(v);
                    count += 1;
                }
            }
            if count != n {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("row {n} must hold {n} entries, found {count}"),
                });
            }
            n += 1;
        }
        Self::from_lower(n, lower)
    }
}

/// Geodesic metric of a circle of circumference `circumference`, sampled at
/// the given arc positions.
pub fn circle_metric(positions: &[f64], circumference: f64) -> Result<FiniteMetric> {
    if !(circumference > 0.0) || !circumference.is_finite() {
        return Err(bad(format!(
            "circumference must be positive, got {circumference}"
        )));
    }
    let reduced: Vec<f64> = positions
        .iter()
        .map(|s| s.rem_euclid(circumference))
        .collect();
    let mut order: Vec<usize> = (0..reduced.len()).collect();
    order.sort_by(|&a, &b| reduced[a].total_cmp(&reduced[b]));
    for w in order.windows(2) {
        if reduced[w[0]] == reduced[w[1]] {
            return Err(Error::DuplicatePoint(w[1].max(w[0])));
        }
    }
    let l = circumference;
    let m = FiniteMetric::from_fn(reduced.len(), |i, j| {
        let delta = (reduced[i] - reduced[j]).abs();
        delta.min(l - delta)
    })?;
    Ok(m.with_labels(Labels::Arc {
        positions: positions.to_vec(),
        circumference,
    }))
}

/// Flat torus `[0,a) x [0,b)` with the quotient Euclidean metric.
pub fn flat_torus_metric(positions: &[[f64; 2]], a: f64, b: f64) -> Result<FiniteMetric> {
    if !(a > 0.0 && b > 0.0) {
        return Err(bad(format!(
            "torus periods must be positive, got a={a}, b={b}"
        )));
    }
    let wrap = |delta: f64, period: f64| {
        let delta = delta.abs().rem_euclid(period);
        delta.min(period - delta)
    };
    let m = FiniteMetric::from_fn(positions.len(), |i, j| {
        let du = wrap(positions[i][0] - positions[j][0], a);
        let dv = wrap(positions[i][1] - positions[j][1], b);
        du.hypot(dv)
    })?;
    Ok(m.with_labels(Labels::Coords(
        positions.iter().map(|p| p.to_vec()).collect(),
    )))
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Undirected k-nearest-neighbor graph (union of the directed kNN edges)
/// with Euclidean edge weights.
pub fn knn_graph<P: AsRef<[f64]> + Sync>(points: &[P], k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = points.len();
    let directed: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pi = points[i].as_ref();
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (euclid(pi, points[j].as_ref()), j))
                .collect();
            let take = k.min(cand.len());
            if take < cand.len() {
                cand.select_nth_unstable_by(take, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            }
            cand.truncate(take);
            cand.into_iter().map(|(d, j)| (j, d)).collect()
        })
        .collect();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, nbrs) in directed.iter().enumerate() {
        for &(j, d) in nbrs {
            adj[i].push((j, d));
            adj[j].push((i, d));
        }
    }
    for list in &mut adj {
        list.sort_by_key(|a| a.0);
        list.dedup_by_key(|e| e.0);
    }
    adj
}

/// Sizes of the connected components, largest first.
pub fn component_sizes(adj: &[Vec<(usize, f64)>]) -> Vec<usize> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        stack.push(s);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    // reversed: BinaryHeap pops the smallest tentative distance first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Single-source shortest path lengths over a weighted adjacency list.
pub fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem(0.0, source));
    while let Some(HeapItem(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len) in &adj[v] {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(HeapItem(nd, w));
            }
        }
    }
    dist
}

/// Approximate geodesic metric of an embedded sample: all-pairs shortest
/// paths in the symmetric k-nearest-neighbor graph.
pub fn graph_geodesic_metric<P: AsRef<[f64]> + Sync>(
    points: &[P],
    k: usize,
) -> Result<FiniteMetric> {
    let n = points.len();
    if n < 2 {
        return Err(bad(format!("need at least 2 points, got {n}")));
    }
    if k < 1 {
        return Err(bad("neighbor count k must be at least 1"));
    }
    let adj = knn_graph(points, k);
    let sizes = component_sizes(&adj);
    if sizes.len() > 1 {
        return Err(Error::Disconnected(sizes));
    }
    // row i of the condensed table holds d(i, 0..i)
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut d = dijkstra(&adj, i);
            d.truncate(i);
            d
        })
        .collect();
    let lower: Vec<f64> = rows.into_iter().flatten().collect();
    let m = FiniteMetric::from_lower(n, lower)?;
    Ok(m.with_labels(Labels::Coords(
        points.iter().map(|p| p.as_ref().to_vec()).collect(),
    )))
}

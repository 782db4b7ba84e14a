//! Filtered complexes the reduction engine can walk: an explicit one backed
//! by a materialized stream, and an implicit Vietoris–Rips complex that
//! names simplices by their combinatorial index and never stores cofaces.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{bad, Error, Result};
use crate::filtration::{FiltrationStream, Simplex};
use crate::metric::FiniteMetric;

/// A filtered simplicial complex. `Cell`'s `Ord` is the filtration order
/// among cells of one dimension; faces always precede their cofaces.
pub trait FilteredComplex: Sync {
    type Cell: Copy + Ord + Eq + Hash + Debug + Send + Sync;

    /// Largest cell dimension present.
    fn top_dim(&self) -> usize;
    fn value(&self, cell: Self::Cell) -> f64;
    /// All cells of the given dimension, in no particular order.
    fn cells(&self, dim: usize) -> Vec<Self::Cell>;
    fn cofacets(&self, cell: Self::Cell, dim: usize, out: &mut Vec<Self::Cell>);
    fn facets(&self, cell: Self::Cell, dim: usize, out: &mut Vec<Self::Cell>);
    /// The earliest cofacet, if it enters at the same value as `cell`.
    fn zero_apparent_cofacet(&self, cell: Self::Cell, dim: usize) -> Option<Self::Cell>;
    fn simplex(&self, cell: Self::Cell, dim: usize) -> Simplex;
    fn cell_of(&self, simplex: &Simplex) -> Option<Self::Cell>;
}

/// Complex backed by an explicit stream; cells are stream positions.
pub struct ExplicitComplex {
    simplices: Vec<Simplex>,
    values: Vec<f64>,
    facets: Vec<SmallVec<[u32; 6]>>,
    cofacet_start: Vec<u32>,
    cofacet_list: Vec<u32>,
    by_dim: Vec<Vec<u32>>,
    index: FxHashMap<Simplex, u32>,
    top_dim: usize,
}

impl ExplicitComplex {
    pub fn new(stream: &FiltrationStream) -> Result<Self> {
        let m = stream.entries.len();
        if m > u32::MAX as usize {
            return Err(bad("stream too large"));
        }
        let mut index = FxHashMap::with_capacity_and_hasher(m, Default::default());
        let mut facets = Vec::with_capacity(m);
        let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); stream.max_dim + 1];
        let mut prev: Option<&(Simplex, f64)> = None;
        for (pos, e) in stream.entries.iter().enumerate() {
            if let Some(p) = prev {
                if crate::filtration::entry_order(p, e) != Ordering::Less {
                    return Err(Error::InvalidFiltration(format!(
                        "entry {pos} is out of order"
                    )));
                }
            }
            prev = Some(e);
            let dim = e.0.dim();
            if dim > stream.max_dim {
                return Err(Error::InvalidFiltration(format!(
                    "{:?} exceeds max_dim",
                    e.0
                )));
            }
            let mut fs = SmallVec::new();
            for f in e.0.facets() {
                match index.get(&f) {
                    Some(&fp) => {
                        if stream.entries[fp as usize].1 > e.1 {
                            return Err(Error::InvalidFiltration(format!(
                                "face {f:?} enters after {:?}",
                                e.0
                            )));
                        }
                        fs.push(fp)
                    }
                    None => {
                        return Err(Error::InvalidFiltration(format!(
                            "face {f:?} of {:?} missing or later in the stream",
                            e.0
                        )))
                    }
                }
            }
            facets.push(fs);
            index.insert(e.0.clone(), pos as u32);
            by_dim[dim].push(pos as u32);
        }
        // invert facets into a CSR cofacet table; positions come out ascending
        let mut counts = vec![0u32; m + 1];
        for fs in &facets {
            for &f in fs {
                counts[f as usize + 1] += 1;
            }
        }
        for i in 0..m {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut cofacet_list = vec![0u32; counts[m] as usize];
        for (pos, fs) in facets.iter().enumerate() {
            for &f in fs {
                cofacet_list[fill[f as usize] as usize] = pos as u32;
                fill[f as usize] += 1;
            }
        }
        Ok(ExplicitComplex {
            simplices: stream.entries.iter().map(|e| e.0.clone()).collect(),
            values: stream.entries.iter().map(|e| e.1).collect(),
            facets,
            cofacet_start: counts,
            cofacet_list,
            by_dim,
            index,
            top_dim: stream.max_dim,
        })
    }

    fn cofacet_slice(&self, cell: u32) -> &[u32] {
        let c = cell as usize;
        &self.cofacet_list[self.cofacet_start[c] as usize..self.cofacet_start[c + 1] as usize]
    }
}

impl FilteredComplex for ExplicitComplex {
    type Cell = u32;

    fn top_dim(&self) -> usize {
        self.top_dim
    }

    fn value(&self, cell: u32) -> f64 {
        self.values[cell as usize]
    }

    fn cells(&self, dim: usize) -> Vec<u32> {
        self.by_dim.get(dim).cloned().unwrap_or_default()
    }

    fn cofacets(&self, cell: u32, _dim: usize, out: &mut Vec<u32>) {
        out.extend_from_slice(self.cofacet_slice(cell));
    }

    fn facets(&self, cell: u32, _dim: usize, out: &mut Vec<u32>) {
        out.extend_from_slice(&self.facets[cell as usize]);
    }

    fn zero_apparent_cofacet(&self, cell: u32, _dim: usize) -> Option<u32> {
        let first = *self.cofacet_slice(cell).first()?;
        (self.values[first as usize] == self.values[cell as usize]).then_some(first)
    }

    fn simplex(&self, cell: u32, _dim: usize) -> Simplex {
        self.simplices[cell as usize].clone()
    }

    fn cell_of(&self, simplex: &Simplex) -> Option<u32> {
        self.index.get(simplex).copied()
    }
}

/// A Rips simplex named by its diameter and combinatorial index.
///
/// Within one dimension the filtration order is diameter ascending, then
/// index descending.
#[derive(Clone, Copy, Debug)]
pub struct RipsCell {
    pub diam: f64,
    pub index: u64,
}

impl PartialEq for RipsCell {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index
    }
}

impl Eq for RipsCell {}

impl Hash for RipsCell {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.index.hash(state)
    }
}

impl PartialOrd for RipsCell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RipsCell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.diam
            .total_cmp(&other.diam)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Implicit Vietoris–Rips complex of a finite metric, truncated at
/// `threshold` and at cells of dimension `top_dim`.
pub struct RipsComplex {
    n: usize,
    dist: Vec<f64>,
    threshold: f64,
    top_dim: usize,
    // binom[k][v] = C(v, k)
    binom: Vec<Vec<u64>>,
}

impl RipsComplex {
    pub fn new(metric: &FiniteMetric, top_dim: usize, threshold: f64) -> Result<Self> {
        let n = metric.len();
        if n == 0 {
            return Err(bad("empty metric"));
        }
        let kmax = top_dim + 2;
        let mut binom = vec![vec![0u64; n + 1]; kmax + 1];
        for v in 0..=n {
            binom[0][v] = 1;
            for k in 1..=kmax.min(v) {
                let a = binom[k - 1][v - 1];
                let b = if k < v { binom[k][v - 1] } else { 0 };
                binom[k][v] = a.checked_add(b).ok_or_else(|| {
                    bad(format!(
                        "{n} points at dimension {top_dim} overflow 64-bit simplex indices"
                    ))
                })?;
            }
        }
        Ok(RipsComplex {
            n,
            dist: metric.to_dense(),
            threshold,
            top_dim,
            binom,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    #[inline]
    fn d(&self, a: u32, b: u32) -> f64 {
        self.dist[a as usize * self.n + b as usize]
    }

    #[inline]
    fn c(&self, v: u32, k: usize) -> u64 {
        self.binom[k][v as usize]
    }

    /// Vertices in descending order.
    fn vertices(&self, mut index: u64, dim: usize) -> SmallVec<[u32; 8]> {
        let mut out = SmallVec::new();
        let mut hi = self.n as u32 - 1;
        for k in (1..=dim + 1).rev() {
            // largest w <= hi with C(w, k) <= index
            let (mut lo, mut top) = (k as u32 - 1, hi);
            while lo < top {
                let mid = lo + (top - lo).div_ceil(2);
                if self.c(mid, k) <= index {
                    lo = mid;
                } else {
                    top = mid - 1;
                }
            }
            out.push(lo);
            index -= self.c(lo, k);
            hi = lo.saturating_sub(1);
        }
        out
    }

    /// Index of an ascending vertex list.
    fn index_of(&self, ascending: &[u32]) -> u64 {
        ascending
            .iter()
            .enumerate()
            .map(|(pos, &v)| self.c(v, pos + 1))
            .sum()
    }

    fn diameter(&self, verts: &[u32]) -> f64 {
        let mut diam = 0.0f64;
        for (i, &a) in verts.iter().enumerate() {
            for &b in &verts[i + 1..] {
                diam = diam.max(self.d(a, b));
            }
        }
        diam
    }

    /// Walks cofacets in decreasing index order, handing each
    /// `(vertex, diameter, index)` to `visit`; stops when `visit` returns true.
    /// With `only_above`, only vertices above the current top vertex are tried.
    fn walk_cofacets(
        &self,
        cell: RipsCell,
        dim: usize,
        only_above: bool,
        mut visit: impl FnMut(RipsCell) -> bool,
    ) {
        let verts = self.vertices(cell.index, dim);
        let mut idx_below = cell.index;
        let mut idx_above = 0u64;
        let mut k = dim + 1;
        let mut p = 0;
        let floor = if only_above { verts[0] + 1 } else { 0 };
        let mut v = self.n as u32;
        while v > floor {
            v -= 1;
            if p < verts.len() && verts[p] == v {
                idx_below -= self.c(v, k);
                idx_above += self.c(v, k + 1);
                k -= 1;
                p += 1;
                continue;
            }
            let row = &self.dist[v as usize * self.n..(v as usize + 1) * self.n];
            let mut diam = cell.diam;
            for &u in verts.iter() {
                diam = diam.max(row[u as usize]);
            }
            if diam > self.threshold {
                continue;
            }
            let c = RipsCell {
                diam,
                index: idx_above + self.c(v, k + 1) + idx_below,
            };
            if visit(c) {
                return;
            }
        }
    }
}

impl FilteredComplex for RipsComplex {
    type Cell = RipsCell;

    fn top_dim(&self) -> usize {
        self.top_dim
    }

    fn value(&self, cell: RipsCell) -> f64 {
        cell.diam
    }

    fn cells(&self, dim: usize) -> Vec<RipsCell> {
        match dim {
            0 => (0..self.n as u64)
                .map(|i| RipsCell {
                    diam: 0.0,
                    index: i,
                })
                .collect(),
            1 => (1..self.n as u32)
                .into_par_iter()
                .flat_map_iter(|i| {
                    (0..i).filter_map(move |j| {
                        let d = self.d(i, j);
                        (d <= self.threshold).then(|| RipsCell {
                            diam: d,
                            index: self.c(i, 2) + j as u64,
                        })
                    })
                })
                .collect(),
            _ => {
                let lower = self.cells(dim - 1);
                lower
                    .par_iter()
                    .flat_map_iter(|&c| {
                        let mut out = Vec::new();
                        self.walk_cofacets(c, dim - 1, true, |x| {
                            out.push(x);
                            false
                        });
                        out
                    })
                    .collect()
            }
        }
    }

    fn cofacets(&self, cell: RipsCell, dim: usize, out: &mut Vec<RipsCell>) {
        self.walk_cofacets(cell, dim, false, |c| {
            out.push(c);
            false
        });
    }

    fn facets(&self, cell: RipsCell, dim: usize, out: &mut Vec<RipsCell>) {
        if dim == 0 {
            return;
        }
        let mut asc = self.vertices(cell.index, dim);
        asc.reverse();
        for skip in 0..asc.len() {
            let rest: SmallVec<[u32; 8]> = asc
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect();
            out.push(RipsCell {
                diam: self.diameter(&rest),
                index: self.index_of(&rest),
            });
        }
    }

    fn zero_apparent_cofacet(&self, cell: RipsCell, dim: usize) -> Option<RipsCell> {
        let mut found = None;
        // the first equal-diameter cofacet in decreasing index order is the
        // earliest cofacet overall
        self.walk_cofacets(cell, dim, false, |c| {
            if c.diam == cell.diam {
                found = Some(c);
                true
            } else {
                false
            }
        });
        found
    }

    fn simplex(&self, cell: RipsCell, dim: usize) -> Simplex {
        let v = self.vertices(cell.index, dim);
        Simplex::from_sorted(&v.iter().rev().copied().collect::<SmallVec<[u32; 8]>>())
    }

    fn cell_of(&self, simplex: &Simplex) -> Option<RipsCell> {
        let v = simplex.vertices();
        if v.len() > self.top_dim + 1 || v.iter().any(|&x| x as usize >= self.n) {
            return None;
        }
        let diam = self.diameter(v);
        (diam <= self.threshold).then(|| RipsCell {
            diam,
            index: self.index_of(v),
        })
    }
}

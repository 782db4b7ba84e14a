//! Rips and witness-Čech filtration streams.
//!
//! A stream lists every simplex up to `max_dim` whose entry value is at most
//! `threshold`, sorted by `(value, dim, vertices)`. Enumeration is driven by
//! the threshold graph: only cliques of that graph are ever expanded.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{bad, Error, Result};
use crate::metric::FiniteMetric;

/// A simplex as its strictly increasing vertex list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(SmallVec<[u32; 6]>);

impl Simplex {
    /// Sorts and deduplicates; returns `None` if the input repeats a vertex.
    pub fn new(vertices: impl IntoIterator<Item = u32>) -> Option<Self> {
        let mut v: SmallVec<[u32; 6]> = vertices.into_iter().collect();
        v.sort_unstable();
        let len = v.len();
        v.dedup();
        (v.len() == len && len > 0).then_some(Simplex(v))
    }

    /// Wraps an already strictly increasing list.
    pub fn from_sorted(vertices: &[u32]) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex(SmallVec::from_slice(vertices))
    }

    pub fn vertex(v: u32) -> Self {
        Simplex(SmallVec::from_slice(&[v]))
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, each omitting one vertex.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let k = self.0.len();
        (0..if k > 1 { k } else { 0 }).map(move |skip| {
            Simplex(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            )
        })
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexKind {
    Rips,
    CechWitness,
}

/// Whether a simplex with entry value `v` is present at scale `r` when
/// `v < r` (open) or `v <= r` (closed). Both conventions share one value
/// stream; only reported endpoint types differ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Open,
    Closed,
}

impl std::str::FromStr for ComplexKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rips" => Ok(ComplexKind::Rips),
            "cech" | "cech_witness" => Ok(ComplexKind::CechWitness),
            _ => Err(bad(format!("unknown complex kind {s:?}"))),
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Convention::Open),
            "closed" => Ok(Convention::Closed),
            _ => Err(bad(format!("unknown convention {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FiltrationStream {
    pub entries: Vec<(Simplex, f64)>,
    pub kind: ComplexKind,
    pub convention: Convention,
    pub threshold: f64,
    pub max_dim: usize,
}

pub(crate) fn entry_order(a: &(Simplex, f64), b: &(Simplex, f64)) -> Ordering {
    a.1.total_cmp(&b.1)
        .then_with(|| a.0.dim().cmp(&b.0.dim()))
        .then_with(|| a.0.cmp(&b.0))
}

impl FiltrationStream {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks ordering, the threshold bound, and that every face of every
    /// entry appears no later than the entry itself.
    pub fn validate(&self) -> Result<()> {
        let mut index = rustc_hash::FxHashMap::default();
        for (pos, e) in self.entries.iter().enumerate() {
            if pos > 0 && entry_order(&self.entries[pos - 1], e) != Ordering::Less {
                return Err(Error::InvalidFiltration(format!(
                    "entry {pos} ({:?}) is out of order",
                    e.0
                )));
            }
            if !(e.1 <= self.threshold) {
                return Err(Error::InvalidFiltration(format!(
                    "entry {:?} has value {} above threshold {}",
                    e.0, e.1, self.threshold
                )));
            }
            if e.0.dim() > self.max_dim {
                return Err(Error::InvalidFiltration(format!(
                    "entry {:?} exceeds max_dim",
                    e.0
                )));
            }
            for f in e.0.facets() {
                match index.get(&f) {
                    Some(&fv) if fv <= e.1 => {}
                    Some(_) => {
                        return Err(Error::InvalidFiltration(format!(
                            "face {f:?} enters after its coface {:?}",
                            e.0
                        )))
                    }
                    None => {
                        return Err(Error::InvalidFiltration(format!(
                            "face {f:?} of {:?} is missing or appears later",
                            e.0
                        )))
                    }
                }
            }
            index.insert(e.0.clone(), e.1);
        }
        Ok(())
    }

    /// Text export: one `dim,value,v0,v1,...` line per entry, in order.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for (s, v) in &self.entries {
            write!(out, "{},{}", s.dim(), v)?;
            for x in s.vertices() {
                write!(out, ",{x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    fn from_unsorted(
        mut entries: Vec<(Simplex, f64)>,
        kind: ComplexKind,
        convention: Convention,
        threshold: f64,
        max_dim: usize,
    ) -> Self {
        entries.par_sort_unstable_by(entry_order);
        FiltrationStream {
            entries,
            kind,
            convention,
            threshold,
            max_dim,
        }
    }
}

fn check_params(max_dim: i64, threshold: f64) -> Result<usize> {
    if max_dim < 0 {
        return Err(bad(format!("max_dim must be non-negative, got {max_dim}")));
    }
    if !(threshold > 0.0) {
        return Err(bad(format!("threshold must be positive, got {threshold}")));
    }
    Ok(max_dim as usize)
}

/// Upper neighbors `j > i` with edge value at most `threshold`, ascending.
fn upper_neighbors(
    n: usize,
    threshold: f64,
    edge: impl Fn(usize, usize) -> f64 + Sync,
) -> Vec<Vec<u32>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .filter(|&j| edge(i, j) <= threshold)
                .map(|j| j as u32)
                .collect()
        })
        .collect()
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Vietoris–Rips stream: a simplex enters at its diameter.
pub fn rips_stream(
    metric: &FiniteMetric,
    max_dim: i64,
    threshold: f64,
    convention: Convention,
) -> Result<FiltrationStream> {
    let max_dim = check_params(max_dim, threshold)?;
    let n = metric.len();
    let nbrs = upper_neighbors(n, threshold, |i, j| metric.dist(i, j));

    fn expand(
        metric: &FiniteMetric,
        nbrs: &[Vec<u32>],
        max_dim: usize,
        verts: &mut Vec<u32>,
        cand: &[u32],
        diam: f64,
        out: &mut Vec<(Simplex, f64)>,
    ) {
        out.push((Simplex::from_sorted(verts), diam));
        if verts.len() > max_dim {
            return;
        }
        for (ci, &v) in cand.iter().enumerate() {
            let d = verts
                .iter()
                .map(|&u| metric.dist(u as usize, v as usize))
                .fold(diam, f64::max);
            let next = intersect_sorted(&cand[ci + 1..], &nbrs[v as usize]);
            verts.push(v);
            expand(metric, nbrs, max_dim, verts, &next, d, out);
            verts.pop();
        }
    }

    let entries: Vec<(Simplex, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            let mut verts = vec![i as u32];
            expand(metric, &nbrs, max_dim, &mut verts, &nbrs[i], 0.0, &mut out);
            out
        })
        .collect();
    Ok(FiltrationStream::from_unsorted(
        entries,
        ComplexKind::Rips,
        convention,
        threshold,
        max_dim,
    ))
}

/// Witness-Čech stream over the given landmarks: a simplex enters at the
/// smallest `r` for which some witness lies within `r` of all its vertices,
/// `min_w max_z d(w, z)`. `witnesses = None` uses every point of the metric.
/// Simplex vertices are the landmarks' point indices.
pub fn cech_witness_stream(
    metric: &FiniteMetric,
    landmarks: &[usize],
    witnesses: Option<&[usize]>,
    max_dim: i64,
    threshold: f64,
    convention: Convention,
) -> Result<FiltrationStream> {
    let max_dim = check_params(max_dim, threshold)?;
    if landmarks.is_empty() {
        return Err(bad("landmark set is empty"));
    }
    let mut lm = landmarks.to_vec();
    lm.sort_unstable();
    lm.dedup();
    if let Some(&x) = lm.iter().find(|&&x| x >= metric.len()) {
        return Err(bad(format!("landmark {x} is not a point of the metric")));
    }
    let all: Vec<usize>;
    let wit: &[usize] = match witnesses {
        Some(w) => {
            if let Some(&x) = w.iter().find(|&&x| x >= metric.len()) {
                return Err(bad(format!("witness {x} is not a point of the metric")));
            }
            if w.is_empty() {
                return Err(bad("witness set is empty"));
            }
            w
        }
        None => {
            all = (0..metric.len()).collect();
            &all
        }
    };
    let m = lm.len();
    // witness-to-landmark distance rows
    let wd: Vec<Vec<f64>> = lm
        .iter()
        .map(|&z| wit.iter().map(|&w| metric.dist(w, z)).collect())
        .collect();
    let edge_value = |a: usize, b: usize| {
        wd[a]
            .iter()
            .zip(&wd[b])
            .map(|(x, y)| x.max(*y))
            .fold(f64::INFINITY, f64::min)
    };
    let nbrs = upper_neighbors(m, threshold, edge_value);

    #[allow(clippy::too_many_arguments)]
    fn expand(
        lm: &[usize],
        wd: &[Vec<f64>],
        nbrs: &[Vec<u32>],
        max_dim: usize,
        threshold: f64,
        verts: &mut Vec<u32>,
        cand: &[u32],
        cover: &[f64],
        value: f64,
        out: &mut Vec<(Simplex, f64)>,
    ) {
        out.push((
            Simplex::new(verts.iter().map(|&v| lm[v as usize] as u32)).expect("distinct"),
            value,
        ));
        if verts.len() > max_dim {
            return;
        }
        let mut next_cover = vec![0.0; cover.len()];
        for (ci, &v) in cand.iter().enumerate() {
            let mut best = f64::INFINITY;
            for ((nc, &c), &d) in next_cover.iter_mut().zip(cover).zip(&wd[v as usize]) {
                *nc = c.max(d);
                best = best.min(*nc);
            }
            if best > threshold {
                continue;
            }
            let next = intersect_sorted(&cand[ci + 1..], &nbrs[v as usize]);
            verts.push(v);
            expand(
                lm,
                wd,
                nbrs,
                max_dim,
                threshold,
                verts,
                &next,
                &next_cover,
                best,
                out,
            );
            verts.pop();
        }
    }

    let entries: Vec<(Simplex, f64)> = (0..m)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            let mut verts = vec![i as u32];
            let value = wd[i].iter().copied().fold(f64::INFINITY, f64::min);
            if value <= threshold {
                expand(
                    &lm, &wd, &nbrs, max_dim, threshold, &mut verts, &nbrs[i], &wd[i], value,
                    &mut out,
                );
            }
            out
        })
        .collect();
    Ok(FiltrationStream::from_unsorted(
        entries,
        ComplexKind::CechWitness,
        convention,
        threshold,
        max_dim,
    ))
}

//! Homology-side columns recovered lazily from the cohomology pairing.
//!
//! The pairing is the same for homology and cohomology, so the reduced
//! boundary column of a death cell `t` can be rebuilt on demand: while the
//! latest cell of the column is the birth of a pair whose death precedes
//! `t`, add that death's reduced column (computed the same way, memoized).

use rustc_hash::FxHashMap;

use super::complex::FilteredComplex;
use super::{Chain, Interval, Persistence};
use crate::error::{bad, Error, Result};

/// Symmetric difference of two ascending cell lists.
fn xor_into<T: Ord + Copy>(acc: &mut Vec<T>, other: &[T]) {
    let mut out = Vec::with_capacity(acc.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < acc.len() && j < other.len() {
        match acc[i].cmp(&other[j]) {
            std::cmp::Ordering::Less => {
                out.push(acc[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(other[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&acc[i..]);
    out.extend_from_slice(&other[j..]);
    *acc = out;
}

struct Column<T> {
    r: Vec<T>,
    v: Vec<T>,
}

/// Reduced boundary columns of `(dim+1)`-cells, against the pairing of
/// homology dimension `dim`.
struct LazyColumns<'a, C: FilteredComplex> {
    complex: &'a C,
    dim: usize,
    death_of: &'a FxHashMap<C::Cell, C::Cell>,
    track_v: bool,
    cache: FxHashMap<C::Cell, Column<C::Cell>>,
}

impl<'a, C: FilteredComplex> LazyColumns<'a, C> {
    fn boundary(&self, cell: C::Cell) -> Vec<C::Cell> {
        let mut out = Vec::new();
        self.complex.facets(cell, self.dim + 1, &mut out);
        out.sort_unstable();
        out
    }

    /// The death cell that should be added to clear `low` from a column
    /// owned by `owner` (or by no cell, for external chains).
    fn reducer_for(&self, low: C::Cell, owner: Option<C::Cell>) -> Option<C::Cell> {
        let t = *self.death_of.get(&low)?;
        match owner {
            Some(o) if t >= o => None,
            _ => Some(t),
        }
    }

    fn column(&mut self, t: C::Cell) -> &Column<C::Cell> {
        if !self.cache.contains_key(&t) {
            self.fill(t);
        }
        &self.cache[&t]
    }

    fn fill(&mut self, root: C::Cell) {
        let mut stack: Vec<(C::Cell, Column<C::Cell>)> = Vec::new();
        let start = |s: &Self, t| Column {
            r: s.boundary(t),
            v: if s.track_v { vec![t] } else { Vec::new() },
        };
        stack.push((root, start(self, root)));
        while let Some((t, col)) = stack.last_mut() {
            let t = *t;
            let next = col.r.last().and_then(|&low| self.reducer_for(low, Some(t)));
            match next {
                None => {
                    let (t, col) = stack.pop().expect("non-empty stack");
                    self.cache.insert(t, col);
                }
                Some(u) => {
                    if let Some(done) = self.cache.get(&u) {
                        xor_into(&mut col.r, &done.r);
                        if self.track_v {
                            xor_into(&mut col.v, &done.v);
                        }
                    } else {
                        let fresh = start(self, u);
                        stack.push((u, fresh));
                    }
                }
            }
        }
    }

    /// Reduces an external chain of dimension `dim` using columns whose
    /// death cell satisfies `admit`; returns the residue and the added
    /// `(dim+1)`-chain.
    fn reduce_external(
        &mut self,
        mut col: Vec<C::Cell>,
        owner: Option<C::Cell>,
        admit: impl Fn(C::Cell) -> bool,
    ) -> (Vec<C::Cell>, Vec<C::Cell>) {
        let mut v = Vec::new();
        while let Some(&low) = col.last() {
            let Some(u) = self.reducer_for(low, owner) else {
                break;
            };
            if !admit(u) {
                break;
            }
            let track = self.track_v;
            let done = self.column(u);
            xor_into(&mut col, &done.r);
            if track {
                let dv = done.v.clone();
                xor_into(&mut v, &dv);
            }
        }
        (col, v)
    }
}

impl<C: FilteredComplex> Persistence<C> {
    fn lazy(&self, dim: usize, track_v: bool) -> Result<LazyColumns<'_, C>> {
        if dim + 1 > self.complex.top_dim() {
            return Err(bad(format!(
                "no cells above dimension {dim} in this complex"
            )));
        }
        Ok(LazyColumns {
            complex: &self.complex,
            dim,
            death_of: self.pair_map(dim)?,
            track_v,
            cache: FxHashMap::default(),
        })
    }

    fn chain_of(&self, dim: usize, cells: &[C::Cell]) -> Chain {
        let mut c = Chain::new(dim);
        c.simplices
            .extend(cells.iter().map(|&x| self.complex.simplex(x, dim)));
        c
    }

    /// A cycle representing `interval` at its birth: the reduced boundary of
    /// the death simplex, or the reduced birth column's cycle when the class
    /// never dies. Requires `keep_pairs`.
    pub fn representative_cycle(&self, interval: &Interval) -> Result<Chain> {
        let dim = interval.dim;
        let birth = interval
            .birth_simplex
            .as_ref()
            .and_then(|s| self.complex.cell_of(s))
            .ok_or_else(|| {
                Error::NotFound(format!("interval {interval:?} has no birth simplex here"))
            })?;
        let present = self
            .barcode
            .raw()
            .any(|i| i.dim == dim && i.birth_simplex == interval.birth_simplex);
        if !present {
            return Err(Error::NotFound(format!(
                "interval {interval:?} is not in this barcode"
            )));
        }
        if interval.death.is_finite() {
            let death = interval
                .death_simplex
                .as_ref()
                .and_then(|s| self.complex.cell_of(s))
                .ok_or_else(|| {
                    Error::NotFound(format!("interval {interval:?} has no death simplex here"))
                })?;
            let mut cols = self.lazy(dim, false)?;
            let r = cols.column(death).r.clone();
            return Ok(self.chain_of(dim, &r));
        }
        if dim == 0 {
            return Ok(self.chain_of(0, &[birth]));
        }
        let mut cols = self.lazy(dim - 1, true)?;
        let mut boundary = Vec::new();
        self.complex.facets(birth, dim, &mut boundary);
        boundary.sort_unstable();
        let (rest, mut v) = cols.reduce_external(boundary, Some(birth), |_| true);
        debug_assert!(
            rest.is_empty(),
            "essential birth column did not reduce to zero"
        );
        xor_into(&mut v, &[birth]);
        Ok(self.chain_of(dim, &v))
    }

    /// Whether `cycle` bounds in the subcomplex of cells with value `<= r`.
    /// Uses the retained pairing instead of a fresh elimination, so it scales
    /// to complexes far too large to hold explicitly.
    pub fn is_boundary(&self, cycle: &Chain, r: f64) -> Result<bool> {
        if !cycle.is_cycle() {
            return Err(Error::NotACycle);
        }
        if cycle.is_empty() {
            return Ok(true);
        }
        if r > self.barcode.threshold {
            return Err(bad(format!(
                "scale {r} exceeds the computed threshold {}",
                self.barcode.threshold
            )));
        }
        let dim = cycle.dim;
        let mut cells = Vec::with_capacity(cycle.len());
        for s in &cycle.simplices {
            match self.complex.cell_of(s) {
                Some(c) if self.complex.value(c) <= r => cells.push(c),
                Some(c) => {
                    return Err(Error::ScaleViolation(
                        s.vertices().to_vec(),
                        self.complex.value(c),
                    ))
                }
                None => return Err(Error::ScaleViolation(s.vertices().to_vec(), f64::INFINITY)),
            }
        }
        cells.sort_unstable();
        let mut cols = self.lazy(dim, false)?;
        let complex = &self.complex;
        let (rest, _) = cols.reduce_external(cells, None, |t| complex.value(t) <= r);
        Ok(rest.is_empty())
    }
}

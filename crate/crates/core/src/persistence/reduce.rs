//! Z/2 persistent cohomology by coboundary-matrix reduction.
//!
//! Columns of dimension `k` are processed in reverse filtration order; the
//! pivot of a column is its earliest cofacet. Three shortcuts keep this
//! tractable: clearing (cells that were pivots one dimension down are never
//! reduced), emergent pairs (a column whose earliest cofacet has the same
//! value and is not yet claimed is finished immediately), and implicit
//! coboundaries (only the reduction matrix is stored; coboundaries are
//! regenerated on demand).

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;

use super::complex::FilteredComplex;

/// Persistence pairs of one homology dimension.
pub struct DimPairs<Cell> {
    /// `(birth k-cell, death (k+1)-cell)`; zero-length pairs are included
    /// only when requested.
    pub finite: Vec<(Cell, Cell)>,
    pub essential: Vec<Cell>,
    /// Every pair keyed by birth cell, when requested.
    pub by_birth: Option<FxHashMap<Cell, Cell>>,
}

fn pop_pivot<C: Ord + Copy>(heap: &mut BinaryHeap<Reverse<C>>) -> Option<C> {
    let mut pivot = heap.pop()?.0;
    while let Some(&Reverse(next)) = heap.peek() {
        if next != pivot {
            break;
        }
        heap.pop();
        pivot = heap.pop()?.0;
    }
    Some(pivot)
}

fn peek_pivot<C: Ord + Copy>(heap: &mut BinaryHeap<Reverse<C>>) -> Option<C> {
    let p = pop_pivot(heap)?;
    heap.push(Reverse(p));
    Some(p)
}

/// Reduces dimensions `0..=max_dim`. `keep_zero` retains zero-length pairs
/// in `finite`; `keep_by_birth` builds the birth-keyed pair map.
pub fn reduce<C: FilteredComplex>(
    complex: &C,
    max_dim: usize,
    keep_zero: bool,
    keep_by_birth: bool,
) -> Vec<DimPairs<C::Cell>> {
    let mut out = Vec::with_capacity(max_dim + 1);
    let mut cleared: FxHashMap<C::Cell, C::Cell> = FxHashMap::default();
    let mut scratch = Vec::new();
    for dim in 0..=max_dim.min(complex.top_dim()) {
        let mut columns = complex.cells(dim);
        if !cleared.is_empty() {
            columns.retain(|c| !cleared.contains_key(c));
        }
        columns.sort_unstable_by(|a, b| b.cmp(a));

        let at_top = dim == complex.top_dim();
        let mut pivots: FxHashMap<C::Cell, C::Cell> =
            FxHashMap::with_capacity_and_hasher(columns.len(), Default::default());
        let mut reductions: FxHashMap<C::Cell, Vec<C::Cell>> = FxHashMap::default();
        let mut finite = Vec::new();
        let mut essential = Vec::new();
        let mut heap: BinaryHeap<Reverse<C::Cell>> = BinaryHeap::new();

        for &sigma in &columns {
            if at_top {
                essential.push(sigma);
                continue;
            }
            if let Some(tau) = complex.zero_apparent_cofacet(sigma, dim) {
                if let std::collections::hash_map::Entry::Vacant(e) = pivots.entry(tau) {
                    e.insert(sigma);
                    if keep_zero {
                        finite.push((sigma, tau));
                    }
                    continue;
                }
            }
            heap.clear();
            scratch.clear();
            complex.cofacets(sigma, dim, &mut scratch);
            heap.extend(scratch.iter().map(|&c| Reverse(c)));
            let mut work: Vec<C::Cell> = vec![sigma];
            loop {
                match peek_pivot(&mut heap) {
                    None => {
                        essential.push(sigma);
                        break;
                    }
                    Some(tau) => match pivots.get(&tau) {
                        Some(&other) => {
                            let stored = reductions.get(&other);
                            let addend: &[C::Cell] = match stored {
                                Some(v) => v,
                                None => std::slice::from_ref(&other),
                            };
                            for &c in addend {
                                scratch.clear();
                                complex.cofacets(c, dim, &mut scratch);
                                heap.extend(scratch.iter().map(|&x| Reverse(x)));
                            }
                            work.extend_from_slice(addend);
                        }
                        None => {
                            pivots.insert(tau, sigma);
                            if work.len() > 1 {
                                work.sort_unstable();
                                let mut canon = Vec::with_capacity(work.len());
                                let mut i = 0;
                                while i < work.len() {
                                    let mut j = i;
                                    while j < work.len() && work[j] == work[i] {
                                        j += 1;
                                    }
                                    if (j - i) % 2 == 1 {
                                        canon.push(work[i]);
                                    }
                                    i = j;
                                }
                                if canon.len() > 1 || canon.first() != Some(&sigma) {
                                    reductions.insert(sigma, canon);
                                }
                            }
                            if keep_zero || complex.value(tau) > complex.value(sigma) {
                                finite.push((sigma, tau));
                            }
                            break;
                        }
                    },
                }
            }
        }
        drop(reductions);
        let by_birth =
            keep_by_birth.then(|| pivots.iter().map(|(&tau, &sigma)| (sigma, tau)).collect());
        cleared = pivots;
        out.push(DimPairs {
            finite,
            essential,
            by_birth,
        });
    }
    out
}

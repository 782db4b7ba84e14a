//! Plain left-to-right boundary-matrix reduction. Slow, simple, and used as
//! the reference the optimized engine is checked against.

use rustc_hash::FxHashMap;

use super::Chain;
use crate::error::{Error, Result};
use crate::filtration::{FiltrationStream, Simplex};

fn xor_sorted(acc: &mut Vec<usize>, other: &[usize]) {
    let mut out = Vec::with_capacity(acc.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < acc.len() && j < other.len() {
        if acc[i] < other[j] {
            out.push(acc[i]);
            i += 1;
        } else if acc[i] > other[j] {
            out.push(other[j]);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    out.extend_from_slice(&acc[i..]);
    out.extend_from_slice(&other[j..]);
    *acc = out;
}

fn index_of(stream: &FiltrationStream) -> FxHashMap<&Simplex, usize> {
    stream
        .entries
        .iter()
        .enumerate()
        .map(|(i, (s, _))| (s, i))
        .collect()
}

fn boundary_column(index: &FxHashMap<&Simplex, usize>, s: &Simplex) -> Result<Vec<usize>> {
    let mut col = Vec::new();
    for f in s.facets() {
        let i = index
            .get(&f)
            .ok_or_else(|| Error::InvalidFiltration(format!("face {f:?} of {s:?} is missing")))?;
        col.push(*i);
    }
    col.sort_unstable();
    Ok(col)
}

/// `(dim, birth, death)` of every positive-length interval of the stream,
/// for homology dimensions below its top simplex dimension, sorted.
pub fn naive_barcode(stream: &FiltrationStream) -> Result<Vec<(usize, f64, f64)>> {
    stream.validate()?;
    let index = index_of(stream);
    let hmax = stream.max_dim.saturating_sub(1);
    let m = stream.entries.len();
    let mut low_owner: FxHashMap<usize, usize> = FxHashMap::default();
    let mut reduced: Vec<Vec<usize>> = Vec::with_capacity(m);
    let mut paired = vec![false; m];
    let mut out = Vec::new();
    for (j, (s, value)) in stream.entries.iter().enumerate() {
        let mut col = boundary_column(&index, s)?;
        while let Some(&low) = col.last() {
            match low_owner.get(&low) {
                Some(&k) => xor_sorted(&mut col, &reduced[k]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            low_owner.insert(low, j);
            paired[low] = true;
            paired[j] = true;
            let (b, bv) = &stream.entries[low];
            if b.dim() <= hmax && *value > *bv {
                out.push((b.dim(), *bv, *value));
            }
        }
        reduced.push(col);
    }
    for (i, (s, v)) in stream.entries.iter().enumerate() {
        if !paired[i] && s.dim() <= hmax {
            out.push((s.dim(), *v, f64::INFINITY));
        }
    }
    out.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });
    Ok(out)
}

/// Whether `cycle` is a Z/2 sum of boundaries of stream simplices with value
/// `<= r`, by Gaussian elimination against those boundary columns.
pub fn is_boundary(cycle: &Chain, r: f64, stream: &FiltrationStream) -> Result<bool> {
    if !cycle.is_cycle() {
        return Err(Error::NotACycle);
    }
    let index = index_of(stream);
    let mut target = Vec::with_capacity(cycle.len());
    for s in &cycle.simplices {
        match index.get(s) {
            Some(&i) if stream.entries[i].1 <= r => target.push(i),
            Some(&i) => {
                return Err(Error::ScaleViolation(
                    s.vertices().to_vec(),
                    stream.entries[i].1,
                ))
            }
            None => return Err(Error::ScaleViolation(s.vertices().to_vec(), f64::INFINITY)),
        }
    }
    if target.is_empty() {
        return Ok(true);
    }
    target.sort_unstable();
    let mut basis: FxHashMap<usize, Vec<usize>> = FxHashMap::default();
    for (s, v) in &stream.entries {
        if *v > r {
            break;
        }
        if s.dim() != cycle.dim + 1 {
            continue;
        }
        let mut col = boundary_column(&index, s)?;
        while let Some(&low) = col.last() {
            match basis.get(&low) {
                Some(b) => xor_sorted(&mut col, b),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            basis.insert(low, col);
        }
    }
    while let Some(&low) = target.last() {
        match basis.get(&low) {
            Some(b) => xor_sorted(&mut target, b),
            None => return Ok(false),
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::{rips_stream, Convention};
    use crate::metric::circle_metric;

    fn hexagon_cycle() -> Chain {
        let e = |a: u32, b: u32| Simplex::new([a, b]).unwrap();
        Chain::from_simplices(1, (0..6).map(|i| e(i, (i + 1) % 6))).unwrap()
    }

    #[test]
    fn hexagon_cycle_bounds_only_late() {
        let pos: Vec<f64> = (0..6).map(|k| k as f64 / 6.0).collect();
        let m = circle_metric(&pos, 1.0).unwrap();
        let s = rips_stream(&m, 2, 0.6, Convention::Open).unwrap();
        assert!(is_boundary(&hexagon_cycle(), 0.5, &s).unwrap());
        assert!(!is_boundary(&hexagon_cycle(), 0.2, &s).unwrap());
        assert!(is_boundary(&Chain::new(1), 0.1, &s).unwrap());
    }

    #[test]
    fn rejects_non_cycles_and_late_simplices() {
        let pos: Vec<f64> = (0..6).map(|k| k as f64 / 6.0).collect();
        let m = circle_metric(&pos, 1.0).unwrap();
        let s = rips_stream(&m, 2, 0.6, Convention::Open).unwrap();
        let path = Chain::from_simplices(1, [Simplex::new([0, 1]).unwrap()]).unwrap();
        assert!(matches!(is_boundary(&path, 0.5, &s), Err(Error::NotACycle)));
        assert!(matches!(
            is_boundary(&hexagon_cycle(), 0.1, &s),
            Err(Error::ScaleViolation(..))
        ));
    }
}

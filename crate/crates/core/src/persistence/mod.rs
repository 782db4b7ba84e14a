//! Z/2 persistent homology of filtration streams and implicit Rips
//! complexes, with representative cycles and boundary tests.

pub mod complex;
mod cycles;
pub mod naive;
mod reduce;

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{bad, Error, Result};
use crate::filtration::{ComplexKind, Convention, FiltrationStream, Simplex};
use crate::metric::FiniteMetric;
use complex::{ExplicitComplex, FilteredComplex, RipsComplex};

pub use naive::is_boundary;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Open,
    Closed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for classes that never die (within the threshold).
    pub death: f64,
    pub birth_type: Endpoint,
    pub death_type: Endpoint,
    pub birth_simplex: Option<Simplex>,
    pub death_simplex: Option<Simplex>,
}

impl Interval {
    pub fn new(dim: usize, birth: f64, death: f64, convention: Convention) -> Self {
        let (birth_type, death_type) = endpoint_types(convention, death);
        Interval {
            dim,
            birth,
            death,
            birth_type,
            death_type,
            birth_simplex: None,
            death_simplex: None,
        }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }
}

/// Open complexes give `(b, d]`, closed ones `[b, d)`.
pub fn endpoint_types(convention: Convention, death: f64) -> (Endpoint, Endpoint) {
    match convention {
        Convention::Open => (
            Endpoint::Open,
            if death.is_finite() {
                Endpoint::Closed
            } else {
                Endpoint::Open
            },
        ),
        Convention::Closed => (Endpoint::Closed, Endpoint::Open),
    }
}

fn interval_order(a: &Interval, b: &Interval) -> std::cmp::Ordering {
    a.dim
        .cmp(&b.dim)
        .then(a.birth.total_cmp(&b.birth))
        .then(a.death.total_cmp(&b.death))
        .then_with(|| a.birth_simplex.cmp(&b.birth_simplex))
}

/// Multiset of persistence intervals. Zero-length intervals are kept apart
/// and only show up in the raw view.
#[derive(Clone, Debug)]
pub struct Barcode {
    pub kind: ComplexKind,
    pub convention: Convention,
    /// Highest homology dimension computed.
    pub max_dim: usize,
    pub threshold: f64,
    intervals: Vec<Interval>,
    ephemeral: Vec<Interval>,
}

impl Barcode {
    pub fn new(
        kind: ComplexKind,
        convention: Convention,
        max_dim: usize,
        threshold: f64,
        all: Vec<Interval>,
    ) -> Self {
        let (mut ephemeral, mut intervals): (Vec<_>, Vec<_>) =
            all.into_iter().partition(|i| i.death == i.birth);
        intervals.sort_by(interval_order);
        ephemeral.sort_by(interval_order);
        Barcode {
            kind,
            convention,
            max_dim,
            threshold,
            intervals,
            ephemeral,
        }
    }

    /// Intervals of positive length.
    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Zero-length intervals (present only when computed with `raw`).
    pub fn ephemeral(&self) -> &[Interval] {
        &self.ephemeral
    }

    pub fn raw(&self) -> impl Iterator<Item = &Interval> {
        self.intervals.iter().chain(self.ephemeral.iter())
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &Interval> {
        self.intervals.iter().filter(move |i| i.dim == dim)
    }

    /// `(dim, birth, death)` triples of the default view.
    pub fn triples(&self) -> Vec<(usize, f64, f64)> {
        self.intervals
            .iter()
            .map(|i| (i.dim, i.birth, i.death))
            .collect()
    }

    /// Diagram text: `dim,birth,death` per line, `inf` for infinite deaths.
    pub fn write_pd<W: Write>(&self, mut out: W, raw: bool) -> Result<()> {
        let rows: Box<dyn Iterator<Item = &Interval>> = if raw {
            Box::new(self.raw())
        } else {
            Box::new(self.intervals.iter())
        };
        for i in rows {
            writeln!(out, "{},{},{}", i.dim, i.birth, fmt_death(i.death))?;
        }
        Ok(())
    }

    /// Reads diagram text written by [`Barcode::write_pd`] (extra columns
    /// and `#` comments are ignored).
    pub fn read_pd<R: BufRead>(input: R, convention: Convention) -> Result<Self> {
        let mut all = Vec::new();
        let mut max_dim = 0;
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("dim") {
                continue;
            }
            let parse_err = |msg: String| Error::Parse {
                line: lineno + 1,
                msg,
            };
            let mut it = line.split(',').map(str::trim);
            let dim: usize = it
                .next()
                .ok_or_else(|| parse_err("missing dim".into()))?
                .parse()
                .map_err(|e| parse_err(format!("dim: {e}")))?;
            let birth: f64 = it
                .next()
                .ok_or_else(|| parse_err("missing birth".into()))?
                .parse()
                .map_err(|e| parse_err(format!("birth: {e}")))?;
            let death_tok = it.next().ok_or_else(|| parse_err("missing death".into()))?;
            let death = if death_tok == "inf" {
                f64::INFINITY
            } else {
                death_tok
                    .parse()
                    .map_err(|e| parse_err(format!("death: {e}")))?
            };
            if death < birth {
                return Err(parse_err(format!("death {death} before birth {birth}")));
            }
            max_dim = max_dim.max(dim);
            all.push(Interval::new(dim, birth, death, convention));
        }
        Ok(Barcode::new(
            ComplexKind::Rips,
            convention,
            max_dim,
            f64::INFINITY,
            all,
        ))
    }
}

pub(crate) fn fmt_death(d: f64) -> String {
    if d.is_infinite() {
        "inf".to_string()
    } else {
        d.to_string()
    }
}

/// A Z/2 chain: a set of simplices of one dimension.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Chain {
    pub dim: usize,
    pub simplices: BTreeSet<Simplex>,
}

impl Chain {
    pub fn new(dim: usize) -> Self {
        Chain {
            dim,
            simplices: BTreeSet::new(),
        }
    }

    /// Sums simplices mod 2; repeated simplices cancel in pairs.
    pub fn from_simplices(
        dim: usize,
        simplices: impl IntoIterator<Item = Simplex>,
    ) -> Result<Self> {
        let mut c = Chain::new(dim);
        for s in simplices {
            c.toggle(s)?;
        }
        Ok(c)
    }

    pub fn toggle(&mut self, s: Simplex) -> Result<()> {
        if s.dim() != self.dim {
            return Err(bad(format!(
                "simplex {s:?} does not have dimension {}",
                self.dim
            )));
        }
        if !self.simplices.remove(&s) {
            self.simplices.insert(s);
        }
        Ok(())
    }

    pub fn add(&mut self, other: &Chain) -> Result<()> {
        if other.is_empty() {
            return Ok(());
        }
        if other.dim != self.dim {
            return Err(bad("adding chains of different dimensions"));
        }
        for s in &other.simplices {
            if !self.simplices.remove(s) {
                self.simplices.insert(s.clone());
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn boundary(&self) -> Chain {
        let mut out = Chain::new(self.dim.saturating_sub(1));
        if self.dim == 0 {
            return out;
        }
        for s in &self.simplices {
            for f in s.facets() {
                if !out.simplices.remove(&f) {
                    out.simplices.insert(f);
                }
            }
        }
        out
    }

    pub fn is_cycle(&self) -> bool {
        self.boundary().is_empty()
    }

    /// Distinct vertices, ascending.
    pub fn vertices(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self
            .simplices
            .iter()
            .flat_map(|s| s.vertices().iter().copied())
            .collect();
        set.into_iter().collect()
    }

    /// Text export: one simplex per line, `v0,v1,...`.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for s in &self.simplices {
            let row: Vec<String> = s.vertices().iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Options {
    /// Keep zero-length intervals (raw view).
    pub raw: bool,
    /// Keep the full pairing so representatives and boundary tests work.
    pub keep_pairs: bool,
}

/// A computed barcode together with the complex and pairing it came from.
pub struct Persistence<C: FilteredComplex> {
    pub barcode: Barcode,
    complex: C,
    pairs: Vec<Option<FxHashMap<C::Cell, C::Cell>>>,
}

impl Persistence<ExplicitComplex> {
    /// Persistence of an explicit stream, for homology dimensions below the
    /// stream's top simplex dimension (all of dimension 0 when it is 0).
    pub fn from_stream(stream: &FiltrationStream, opts: Options) -> Result<Self> {
        let complex = ExplicitComplex::new(stream)?;
        let max_dim = stream.max_dim.saturating_sub(1);
        let barcode_kind = stream.kind;
        Self::run(
            complex,
            max_dim,
            barcode_kind,
            stream.convention,
            stream.threshold,
            opts,
        )
    }
}

impl Persistence<RipsComplex> {
    /// Rips persistence of a metric up to homology dimension `max_dim`,
    /// computed implicitly (cells up to `max_dim + 1` are never stored).
    pub fn rips(
        metric: &FiniteMetric,
        max_dim: usize,
        threshold: f64,
        convention: Convention,
        opts: Options,
    ) -> Result<Self> {
        if !(threshold > 0.0) {
            return Err(bad(format!("threshold must be positive, got {threshold}")));
        }
        let complex = RipsComplex::new(metric, max_dim + 1, threshold)?;
        Self::run(
            complex,
            max_dim,
            ComplexKind::Rips,
            convention,
            threshold,
            opts,
        )
    }
}

impl<C: FilteredComplex> Persistence<C> {
    fn run(
        complex: C,
        max_dim: usize,
        kind: ComplexKind,
        convention: Convention,
        threshold: f64,
        opts: Options,
    ) -> Result<Self> {
        let dims = reduce::reduce(&complex, max_dim, opts.raw, opts.keep_pairs);
        let mut all = Vec::new();
        let mut pairs = Vec::with_capacity(dims.len());
        for (dim, dp) in dims.into_iter().enumerate() {
            for (s, t) in dp.finite {
                let mut iv = Interval::new(dim, complex.value(s), complex.value(t), convention);
                iv.birth_simplex = Some(complex.simplex(s, dim));
                iv.death_simplex = Some(complex.simplex(t, dim + 1));
                all.push(iv);
            }
            for s in dp.essential {
                let mut iv = Interval::new(dim, complex.value(s), f64::INFINITY, convention);
                iv.birth_simplex = Some(complex.simplex(s, dim));
                all.push(iv);
            }
            pairs.push(dp.by_birth);
        }
        Ok(Persistence {
            barcode: Barcode::new(kind, convention, max_dim, threshold, all),
            complex,
            pairs,
        })
    }

    pub fn complex(&self) -> &C {
        &self.complex
    }

    pub fn into_barcode(self) -> Barcode {
        self.barcode
    }

    fn pair_map(&self, dim: usize) -> Result<&FxHashMap<C::Cell, C::Cell>> {
        self.pairs.get(dim).and_then(|p| p.as_ref()).ok_or_else(|| {
            bad(format!(
                "pairing of dimension {dim} was not retained (use keep_pairs)"
            ))
        })
    }
}

/// Barcode of an explicit stream (cohomology reduction with clearing).
pub fn compute_persistence(stream: &FiltrationStream) -> Result<Barcode> {
    Ok(Persistence::from_stream(stream, Options::default())?.barcode)
}

/// A cycle representing `interval` at its birth.
pub fn representative_cycle<C: FilteredComplex>(
    p: &Persistence<C>,
    interval: &Interval,
) -> Result<Chain> {
    p.representative_cycle(interval)
}

//! Closed-form barcodes of geodesic circles and of minimal homology bases.

use std::io::Write;

use crate::error::{bad, Result};
use crate::filtration::{ComplexKind, Convention};
use crate::persistence::{fmt_death, Barcode, Interval};

/// A barcode known in closed form, tagged with where it comes from.
#[derive(Clone, Debug)]
pub struct OracleBarcode {
    pub barcode: Barcode,
    pub provenance: &'static str,
}

impl OracleBarcode {
    /// Diagram text with a trailing provenance column.
    pub fn write_pd<W: Write>(&self, mut out: W, raw: bool) -> Result<()> {
        let rows: Vec<&Interval> = if raw {
            self.barcode.raw().collect()
        } else {
            self.barcode.intervals().iter().collect()
        };
        for i in rows {
            writeln!(
                out,
                "{},{},{},{}",
                i.dim,
                i.birth,
                fmt_death(i.death),
                self.provenance
            )?;
        }
        Ok(())
    }
}

/// Critical scales of the circle of circumference `l`: the odd sphere of
/// dimension `2j+1` lives between the `j`th and `(j+1)`th value.
pub fn critical_value(kind: ComplexKind, l: f64, j: usize) -> f64 {
    let j = j as f64;
    match kind {
        ComplexKind::Rips => l * j / (2.0 * j + 1.0),
        ComplexKind::CechWitness => l * j / (2.0 * j + 2.0),
    }
}

/// Barcode of the geodesic circle of circumference `l` up to homology
/// dimension `max_dim`. Odd dimensions carry one bar each; in the closed
/// convention, `include_ephemeral` adds zero-length even-dimensional markers
/// at the critical scales, where the complex is a wedge of even spheres.
pub fn circle_barcode(
    l: f64,
    max_dim: usize,
    kind: ComplexKind,
    convention: Convention,
    include_ephemeral: bool,
) -> Result<OracleBarcode> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(bad(format!("circumference must be positive, got {l}")));
    }
    let mut all = vec![Interval::new(0, 0.0, f64::INFINITY, convention)];
    let mut j = 0;
    while 2 * j < max_dim {
        let birth = critical_value(kind, l, j);
        let death = critical_value(kind, l, j + 1);
        all.push(Interval::new(2 * j + 1, birth, death, convention));
        j += 1;
    }
    if include_ephemeral && convention == Convention::Closed {
        let mut j = 1;
        while 2 * j <= max_dim {
            let at = critical_value(kind, l, j);
            all.push(Interval::new(2 * j, at, at, convention));
            j += 1;
        }
    }
    let provenance = match kind {
        ComplexKind::Rips => "rips-circle",
        ComplexKind::CechWitness => "cech-circle",
    };
    Ok(OracleBarcode {
        barcode: Barcode::new(kind, convention, max_dim, l / 2.0, all),
        provenance,
    })
}

/// Dim-1 barcode of a space whose shortest homology basis consists of
/// geodesic circles of the given lengths (ascending): one bar `(0, len/3]`
/// per circle.
pub fn minimal_basis_barcode(lengths: &[f64]) -> Result<OracleBarcode> {
    if let Some(&bad_len) = lengths.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(bad(format!(
            "basis lengths must be positive, got {bad_len}"
        )));
    }
    if lengths.windows(2).any(|w| w[0] > w[1]) {
        return Err(bad("basis lengths must be sorted ascending"));
    }
    let all = lengths
        .iter()
        .map(|&len| Interval::new(1, 0.0, len / 3.0, Convention::Open))
        .collect();
    let threshold = lengths.last().map_or(0.0, |&x| x / 3.0);
    Ok(OracleBarcode {
        barcode: Barcode::new(ComplexKind::Rips, Convention::Open, 1, threshold, all),
        provenance: "minimal-basis",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::Endpoint;

    fn bar(o: &OracleBarcode, dim: usize) -> Option<(f64, f64)> {
        o.barcode.in_dim(dim).next().map(|i| (i.birth, i.death))
    }

    #[test]
    fn rips_circle_bars() {
        let o = circle_barcode(1.0, 3, ComplexKind::Rips, Convention::Open, false).unwrap();
        assert_eq!(bar(&o, 1), Some((0.0, 1.0 / 3.0)));
        assert_eq!(bar(&o, 3), Some((1.0 / 3.0, 0.4)));
        assert_eq!(bar(&o, 2), None);
        let iv = o.barcode.in_dim(3).next().unwrap();
        assert_eq!(
            (iv.birth_type, iv.death_type),
            (Endpoint::Open, Endpoint::Closed)
        );
    }

    #[test]
    fn cech_circle_bars() {
        let o = circle_barcode(1.0, 3, ComplexKind::CechWitness, Convention::Open, false).unwrap();
        assert_eq!(bar(&o, 1), Some((0.0, 0.25)));
        assert_eq!(bar(&o, 3), Some((0.25, 1.0 / 3.0)));
    }

    #[test]
    fn closed_convention_flips_types_and_adds_markers() {
        let o = circle_barcode(1.0, 4, ComplexKind::Rips, Convention::Closed, true).unwrap();
        let iv = o.barcode.in_dim(1).next().unwrap();
        assert_eq!(
            (iv.birth_type, iv.death_type),
            (Endpoint::Closed, Endpoint::Open)
        );
        let markers: Vec<(usize, f64)> = o
            .barcode
            .ephemeral()
            .iter()
            .map(|i| (i.dim, i.birth))
            .collect();
        assert_eq!(markers, vec![(2, 1.0 / 3.0), (4, 0.4)]);
        let open = circle_barcode(1.0, 4, ComplexKind::Rips, Convention::Open, true).unwrap();
        assert!(open.barcode.ephemeral().is_empty());
    }

    #[test]
    fn odd_bars_tile_up_to_half_circumference() {
        for kind in [ComplexKind::Rips, ComplexKind::CechWitness] {
            let o = circle_barcode(2.0, 41, kind, Convention::Open, false).unwrap();
            let odd: Vec<_> = o
                .barcode
                .intervals()
                .iter()
                .filter(|i| i.dim % 2 == 1)
                .collect();
            assert_eq!(odd.len(), 21);
            for w in odd.windows(2) {
                assert_eq!(w[0].death, w[1].birth);
            }
            assert!(odd.iter().all(|i| i.death < 1.0));
        }
    }

    #[test]
    fn scales_with_circumference() {
        let a = circle_barcode(1.0, 5, ComplexKind::Rips, Convention::Open, false).unwrap();
        let b = circle_barcode(3.0, 5, ComplexKind::Rips, Convention::Open, false).unwrap();
        for (x, y) in a.barcode.intervals().iter().zip(b.barcode.intervals()) {
            assert!((3.0 * x.birth - y.birth).abs() < 1e-12);
            assert!(
                x.death.is_infinite() && y.death.is_infinite()
                    || (3.0 * x.death - y.death).abs() < 1e-12
            );
        }
    }

    #[test]
    fn minimal_basis() {
        let o = minimal_basis_barcode(&[3.0]).unwrap();
        assert_eq!(o.barcode.triples(), vec![(1, 0.0, 1.0)]);
        assert!(minimal_basis_barcode(&[])
            .unwrap()
            .barcode
            .intervals()
            .is_empty());
        let t = minimal_basis_barcode(&[1.0, 1.3]).unwrap();
        assert_eq!(
            t.barcode.triples(),
            vec![(1, 0.0, 1.0 / 3.0), (1, 0.0, 1.3 / 3.0)]
        );
        assert!(minimal_basis_barcode(&[1.3, 1.0]).is_err());
    }

    #[test]
    fn pd_has_provenance_column() {
        let o = circle_barcode(1.0, 1, ComplexKind::Rips, Convention::Open, false).unwrap();
        let mut buf = Vec::new();
        o.write_pd(&mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().all(|l| l.ends_with(",rips-circle")));
    }
}

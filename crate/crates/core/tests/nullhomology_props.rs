use geoph::filtration::rips_stream;
use geoph::metric::FiniteMetric;
use geoph::nullhomology::{
    build_tube_cycle, cech_fan_nullhomology, grid_row_loop, rips_fan_nullhomology,
    select_equidistant_triple, select_square_quadruple, snap_grid, sphere_latitude_grid,
    LoopSample,
};
use geoph::persistence::naive::is_boundary as naive_is_boundary;
use geoph::persistence::Options;
use geoph::{Convention, Persistence};
use proptest::prelude::*;

/// Sorted distinct positions starting at 0 on a loop of the given length.
fn loop_sample() -> impl Strategy<Value = LoopSample> {
    (3usize..=120, 0.5f64..4.0, any::<u64>()).prop_filter_map(
        "distinct positions",
        |(k, length, seed)| {
            let mut s = seed | 1;
            let mut pos: Vec<f64> = (1..k)
                .map(|_| {
                    s ^= s << 13;
                    s ^= s >> 7;
                    s ^= s << 17;
                    (s >> 11) as f64 / (1u64 << 53) as f64 * length
                })
                .collect();
            pos.push(0.0);
            pos.sort_by(f64::total_cmp);
            pos.dedup();
            (pos.len() >= 3)
                .then(|| LoopSample::from_positions(&pos, length).ok())
                .flatten()
        },
    )
}

fn distinct(apexes: &[usize]) -> bool {
    let mut a = apexes.to_vec();
    a.sort_unstable();
    a.dedup();
    a.len() == apexes.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fans_bound_the_loop_with_k_minus_2_triangles(sample in loop_sample(), slack in 1.001f64..2.0) {
        let k = sample.len();
        let length = sample.length();
        let r = (length / 3.0 + sample.max_gap()) * slack;
        let t = select_equidistant_triple(&sample, r).unwrap();
        let fan = rips_fan_nullhomology(&sample, t, r).unwrap();
        prop_assert!(fan.validate());
        prop_assert!(fan.max_pair_arc < r);
        if distinct(&fan.apexes) {
            prop_assert_eq!(fan.triangles.len(), k - 2);
        }
        let r = (length / 4.0 + sample.max_gap()) * slack;
        let q = select_square_quadruple(&sample, r).unwrap();
        let fan = cech_fan_nullhomology(&sample, q, r).unwrap();
        prop_assert!(fan.validate());
        if distinct(&fan.apexes) {
            prop_assert_eq!(fan.triangles.len(), k - 2);
        }
    }

    #[test]
    fn a_fan_fits_in_the_rips_complex_of_its_loop(k in 6usize..=30, slack in 1.001f64..1.4) {
        let sample = LoopSample::regular(k, 1.0).unwrap();
        let r = (1.0 / 3.0 + 1.0 / k as f64) * slack;
        let fan = rips_fan_nullhomology(&sample, select_equidistant_triple(&sample, r).unwrap(), r).unwrap();
        let pos: Vec<f64> = (0..k).map(|i| i as f64 / k as f64).collect();
        let metric = geoph::metric::circle_metric(&pos, 1.0).unwrap();
        let stream = rips_stream(&metric, 2, 0.5, Convention::Open).unwrap();
        // the loop bounds once its fan is present (arc sums and metric
        // distances may differ in the last bits)
        prop_assert!(naive_is_boundary(&sample.cycle(), fan.max_pair_arc + 1e-12, &stream).unwrap());
    }
}

#[test]
fn latitude_tube_bounds_only_at_large_scale() {
    let pts: Vec<[f64; 3]> = {
        let mut v = Vec::new();
        for i in 0..9 {
            let polar = 0.5 + 2.0 * i as f64 / 8.0;
            for j in 0..8 {
                let az = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
                v.push([polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos()]);
            }
        }
        v
    };
    let grid = snap_grid(&sphere_latitude_grid(8, 1.0, 0.5, 2.5).unwrap(), &pts).unwrap();
    let metric = FiniteMetric::from_fn(pts.len(), |i, j| {
        let dot: f64 = (0..3).map(|c| pts[i][c] * pts[j][c]).sum();
        dot.clamp(-1.0, 1.0).acos()
    })
    .unwrap();
    let lid = |row: usize, polar: f64, r: f64| {
        let len = 2.0 * std::f64::consts::PI * f64::sin(polar);
        let lp = grid_row_loop(&grid, row, vec![len / 8.0; 8]).unwrap();
        rips_fan_nullhomology(&lp, select_equidistant_triple(&lp, r).unwrap(), r).unwrap()
    };
    let r = 1.45;
    let tube = build_tube_cycle(&grid, &lid(0, 0.5, r), &lid(8, 2.5, r)).unwrap();
    assert!(tube.is_cycle());
    let p = Persistence::rips(
        &metric,
        2,
        2.0,
        Convention::Open,
        Options {
            raw: false,
            keep_pairs: true,
        },
    )
    .unwrap();
    let stream = rips_stream(&metric, 3, 2.0, Convention::Open).unwrap();
    for (scale, bounds) in [(1.45, false), (1.6, false), (2.0, true)] {
        assert_eq!(
            p.is_boundary(&tube, scale).unwrap(),
            bounds,
            "scale {scale}"
        );
        assert_eq!(
            naive_is_boundary(&tube, scale, &stream).unwrap(),
            bounds,
            "scale {scale}"
        );
    }
}

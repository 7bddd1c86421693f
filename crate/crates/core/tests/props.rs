//! Property tests for the distribution oracles, the partition, and the
//! piecewise-linear compiler.

use boundary_lab_core::grid::GridPartition;
use boundary_lab_core::pwl::{pwl_to_relu, PiecewiseLinear1D};
use boundary_lab_core::synth::{Convention, NoiseProfile, SyntheticTask};
use proptest::prelude::*;

fn conventions() -> impl Strategy<Value = Convention> {
    prop_oneof![
        Just(Convention::M1Consistent),
        Just(Convention::Literal)
    ]
}

proptest! {
    #[test]
    fn eta_stays_in_unit_interval(
        x1 in 0.0f64..=1.0,
        x2 in 0.0f64..=1.0,
        k in 1.0f64..100.0,
        conv in conventions(),
    ) {
        let t = SyntheticTask::new(NoiseProfile::new(k, conv).unwrap());
        let eta = t.eta(&[x1, x2]);
        prop_assert!((0.0..=1.0).contains(&eta), "eta = {eta}");
        let (p, q) = t.densities(&[x1, x2]);
        prop_assert!((p + q - 2.0).abs() < 1e-12);
        prop_assert!((0.0..=2.0).contains(&p) && (0.0..=2.0).contains(&q));
    }

    #[test]
    fn every_point_lands_in_exactly_one_cell(
        x in 0.0f64..=1.0,
        m in 1usize..12,
    ) {
        let xi = 0.4 / m as f64;
        let part = GridPartition::new(m, xi).unwrap();
        let j = part.cell_index_1d(x);
        let mut containing = 0;
        for cell in 0..m {
            let (a, b) = part.cell_interval(cell);
            let inside = if cell == m - 1 { x >= a && x <= b } else { x >= a && x < b };
            if inside {
                containing += 1;
                prop_assert_eq!(cell, j);
            }
        }
        prop_assert_eq!(containing, 1);
    }

    #[test]
    fn compiled_pwl_matches_reference_eval(
        raw in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2..=8),
        probe in proptest::collection::vec(-2.2f64..2.2, 32),
    ) {
        // Sort and de-overlap the x coordinates with a minimum gap so the
        // slopes stay bounded.
        let mut xs: Vec<f64> = raw.iter().map(|p| p.0).collect();
        xs.sort_unstable_by(f64::total_cmp);
        let mut last = f64::NEG_INFINITY;
        let mut pts = Vec::new();
        for (i, &x) in xs.iter().enumerate() {
            if x - last < 0.05 {
                continue;
            }
            last = x;
            pts.push((x, raw[i].1));
        }
        prop_assume!(pts.len() >= 2);
        let p = PiecewiseLinear1D::new(&pts).unwrap();
        let net = pwl_to_relu(&p);
        for &x in &probe {
            prop_assert!((net.forward(&[x]) - p.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn density_gap_matches_designed_power_law(
        x1 in 0.0f64..=1.0,
        t in 1e-6f64..0.2,
        k in 1.0f64..50.0,
    ) {
        // Pointwise separation identity: at offset t from the boundary the
        // density gap is 2 ((4/3) t)^{1/K(x1)}, so the designed profile is
        // exactly the local separation exponent.
        let task = SyntheticTask::new(NoiseProfile::new(k, Convention::M1Consistent).unwrap());
        let f = boundary_lab_core::synth::boundary_value(x1);
        prop_assume!(f + t <= 1.0);
        let gap = boundary_lab_core::theory::density_gap_profile(&task, x1, &[t])[0]
            .gap
            .unwrap();
        let expect = 2.0 * (4.0 / 3.0 * t).powf(1.0 / task.profile().exponent_at(x1));
        prop_assert!(
            (gap - expect).abs() <= 1e-9 * expect.max(1e-300),
            "gap {gap} vs {expect}"
        );
    }

    #[test]
    fn band_points_are_near_grid_points(
        x in 0.0f64..=1.0,
        m in 1usize..10,
    ) {
        let xi = 0.3 / m as f64;
        let part = GridPartition::new(m, xi).unwrap();
        let nearest = (0..=m)
            .map(|j| (x - j as f64 / m as f64).abs())
            .fold(f64::INFINITY, f64::min);
        // The membership test and the explicit nearest-grid-point distance
        // must agree except exactly at the threshold.
        if (nearest - xi).abs() > 1e-12 {
            prop_assert_eq!(part.in_band(&[x]), nearest <= xi);
        }
    }
}

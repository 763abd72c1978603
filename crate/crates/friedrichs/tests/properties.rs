//! Property-based checks of the analytic invariants: anything the theory
//! states as an identity or inequality should survive randomized models,
//! contours and evaluation points.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use friedrichs::contour::{admissibility, build_contour, sample_contour, ContourSpec};
use friedrichs::linalg::{max_abs_entry, spectral_norm};
use friedrichs::model::{Interval, KPath};
use friedrichs::report::fmt_f64;
use friedrichs::solver::{
    riccati_solution_x, riccati_solution_y, solve_operator_root, Side, SolverOptions,
};

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Composite Gauss-Legendre arc weights recover the exact length of a
    /// polyline contour and the width of the undeformed band.
    #[test]
    fn arc_weights_recover_contour_length(
        alpha in -3.0f64..0.0,
        width in 0.5f64..4.0,
        rel_re in 0.2f64..0.8,
        depth in 0.2f64..1.2,
    ) {
        let interval = Interval::new(alpha, alpha + width).unwrap();

        let flat = build_contour(interval, &ContourSpec::Interval).unwrap();
        let sampled = sample_contour(&flat, 16, 2).unwrap();
        let total: f64 = sampled.arc_weights.iter().sum();
        prop_assert!((total - width).abs() <= 1e-10 * (1.0 + width));

        let vertex = Complex64::new(alpha + rel_re * width, -depth);
        let bent = build_contour(
            interval,
            &ContourSpec::Polyline { vertices: vec![vertex], sign: -1 },
        )
        .unwrap();
        let sampled = sample_contour(&bent, 16, 2).unwrap();
        let expected = (vertex - Complex64::new(alpha, 0.0)).norm()
            + (Complex64::new(alpha + width, 0.0) - vertex).norm();
        let total: f64 = sampled.arc_weights.iter().sum();
        prop_assert!((total - expected).abs() <= 1e-10 * (1.0 + expected));
    }

    /// Discrete Cauchy-Schwarz: the kernel variation never exceeds the
    /// product of the coupling energy norms.
    #[test]
    fn variation_is_bounded_by_enorm_product(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (model, sampled, report) = random_admissible_pair(&mut rng);
        let again = admissibility(&model, &sampled).unwrap();
        prop_assert!(report.v_k <= report.enorm_b * report.enorm_c * (1.0 + 1e-12));
        // admissibility itself is deterministic
        prop_assert_eq!(report.v_k.to_bits(), again.v_k.to_bits());
    }

    /// 17-significant-digit rendering round-trips every finite double.
    #[test]
    fn float_formatting_round_trips(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        let back: f64 = fmt_f64(x).parse().unwrap();
        let expected = if x == 0.0 { 0.0f64 } else { x };
        prop_assert_eq!(back.to_bits(), expected.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// The solved root stays in the certified ball, contracts no slower
    /// than the certificate claims, and its Riccati solutions respect the
    /// energy-norm bounds.
    #[test]
    fn certified_ball_and_enorm_bounds(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (model, sampled, report) = random_admissible_pair(&mut rng);
        let opts = SolverOptions::default();
        let right = solve_operator_root(&model, &sampled, Side::Right, &opts).unwrap();
        let left = solve_operator_root(&model, &sampled, Side::Left, &opts).unwrap();
        let r = report.r_bound.unwrap();
        prop_assert!(spectral_norm(&(&right.z_matrix - model.a_matrix())) <= r + 1e-12);
        prop_assert!(spectral_norm(&(&left.z_matrix - model.a_matrix())) <= r + 1e-12);
        let q = report.contraction_factor().unwrap();
        prop_assert!(right.certificate.observed_contraction <= q + 1e-6);

        let x = riccati_solution_x(&model, &sampled, &right).unwrap();
        let y = riccati_solution_y(&model, &sampled, &left).unwrap();
        if let Some(bound) = x.enorm_bound {
            prop_assert!(x.enorm <= bound * (1.0 + 1e-9));
        }
        if let Some(bound) = y.enorm_bound {
            prop_assert!(y.enorm <= bound * (1.0 + 1e-9));
        }
        if report.pass_hyp2 {
            prop_assert!(x.enorm * y.enorm < 1.0);
        }
    }

    /// Mirroring the contour across the band conjugates the root of a
    /// real model.
    #[test]
    fn mirrored_contour_conjugates_real_roots(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_real_admissible_model(&mut rng);
        let opts = SolverOptions::default();
        let lower = sample_contour(
            &build_contour(band(), &ContourSpec::SemiEllipse { depth: 1.0, sign: -1 }).unwrap(),
            32,
            2,
        )
        .unwrap();
        let upper = sample_contour(
            &build_contour(band(), &ContourSpec::SemiEllipse { depth: 1.0, sign: 1 }).unwrap(),
            32,
            2,
        )
        .unwrap();
        let below = solve_operator_root(&model, &lower, Side::Right, &opts).unwrap();
        let above = solve_operator_root(&model, &upper, Side::Right, &opts).unwrap();
        let mirrored = below.z_matrix.mapv(|v| v.conj());
        prop_assert!(max_abs_entry(&(&above.z_matrix - &mirrored)) <= 1e-12);
    }

    /// The kernel primitive is path independent: `K'` is entire, so any
    /// waypoint detour must land on the same value.
    #[test]
    fn kernel_primitive_is_path_independent(
        seed in any::<u64>(),
        target_re in 0.2f64..1.8,
        target_im in -1.4f64..-0.1,
        detour_re in 0.2f64..1.8,
        detour_im in -1.2f64..-0.1,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (model, _, _) = random_admissible_pair(&mut rng);
        let target = Complex64::new(target_re, target_im);
        let straight = model.eval_k(target, &KPath::Straight);
        let detoured = model.eval_k(
            target,
            &KPath::Waypoints(vec![
                Complex64::new(detour_re, detour_im),
                Complex64::new(0.5 * (detour_re + target_re), 0.5 * (detour_im + target_im)),
            ]),
        );
        let scale = 1.0 + max_abs_entry(&straight);
        prop_assert!(max_abs_entry(&(&straight - &detoured)) <= 1e-10 * scale);
    }

    /// Doubling the quadrature order moves the solved root and its
    /// energy norm by at most the quadrature tail.
    #[test]
    fn solution_is_stable_under_order_doubling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (model, coarse, _) = random_admissible_pair(&mut rng);
        let fine = sample_contour(&semicircle(), 2 * coarse.order, coarse.panels_per_segment)
            .unwrap();
        let opts = SolverOptions::default();
        let root_coarse = solve_operator_root(&model, &coarse, Side::Right, &opts).unwrap();
        let root_fine = solve_operator_root(&model, &fine, Side::Right, &opts).unwrap();
        prop_assert!(
            spectral_norm(&(&root_coarse.z_matrix - &root_fine.z_matrix)) <= 1e-8
        );
        let x_coarse = riccati_solution_x(&model, &coarse, &root_coarse).unwrap();
        let x_fine = riccati_solution_x(&model, &fine, &root_fine).unwrap();
        prop_assert!((x_coarse.enorm - x_fine.enorm).abs() <= 1e-6);
    }

    /// Weakening the coupling shrinks the certified ball.
    #[test]
    fn ball_radius_is_monotone_in_coupling(seed in any::<u64>(), shrink in 0.2f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (model, sampled, report) = random_admissible_pair(&mut rng);
        let weaker = model.with_coupling_scale(shrink);
        let weaker_report = admissibility(&weaker, &sampled).unwrap();
        prop_assert!(weaker_report.pass_vk);
        prop_assert!(
            weaker_report.r_bound.unwrap() <= report.r_bound.unwrap() + 1e-15
        );
    }
}

/// Non-finite spellings are part of the report contract even though they
/// can only appear in diagnostic fields.
#[test]
fn non_finite_spellings_are_fixed() {
    assert_eq!(fmt_f64(f64::INFINITY), "inf");
    assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    assert_eq!(fmt_f64(f64::NAN), "nan");
    assert_eq!(fmt_f64(-0.0), fmt_f64(0.0));
}

/// `gen_range` sanity for the fixture generators: all shapes appear.
#[test]
fn random_pairs_cover_the_shape_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen = std::collections::BTreeSet::new();
    for _ in 0..60 {
        let (model, _, _) = random_admissible_pair(&mut rng);
        seen.insert((model.n(), model.m()));
    }
    assert!(seen.len() >= 6, "only saw shapes {seen:?}");
}

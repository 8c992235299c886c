mod common;

use common::{random_matrix, rng};
use contdyn::diagnostics::{
    annotate_trajectory, continuity_functional, det_rate_jacobi, relative_rate_norm,
    DerivativeMode, DiagnosticsConfig,
};
use contdyn::dynamics::{evolve, rhs, EvolutionProblem, FeedbackKind, TimeDependentMatrix};
use contdyn::RealMatrix;
use proptest::prelude::*;

fn random_problem(seed: u64, n: usize, feedback: FeedbackKind) -> EvolutionProblem<f64> {
    let mut r = rng(seed);
    let a0 = random_matrix(&mut r, n, 0.8);
    let a1 = random_matrix(&mut r, n, 0.8);
    let a = TimeDependentMatrix::new(n, move |t: f64| a0.add_scaled(t.sin(), &a1));
    let m0 = &random_matrix(&mut r, n, 0.3) + &RealMatrix::identity(n);
    EvolutionProblem::new(a, TimeDependentMatrix::zero(n), feedback, m0, 0.0, 1.0).unwrap()
}

#[test]
fn analytic_and_finite_difference_modes_agree() {
    let problem = random_problem(11, 3, FeedbackKind::StateScaled { gamma: 0.2 });
    let traj = evolve(&problem, 400).unwrap();
    let analytic = annotate_trajectory(&traj, &problem, &DiagnosticsConfig::default()).unwrap();
    let fd = annotate_trajectory(
        &traj,
        &problem,
        &DiagnosticsConfig {
            derivative_mode: DerivativeMode::FiniteDifference,
            ..DiagnosticsConfig::default()
        },
    )
    .unwrap();
    for k in 0..traj.len() {
        let (a, f) = (analytic.det_rate[k], fd.det_rate[k]);
        assert!((a - f).abs() < 1e-4 * a.abs().max(1.0), "k={k}: {a} vs {f}");
    }
}

#[test]
fn lyapunov_slope_matches_rate() {
    let problem = random_problem(5, 3, FeedbackKind::StateScaled { gamma: 0.3 });
    let traj = evolve(&problem, 2000).unwrap();
    let s = annotate_trajectory(&traj, &problem, &DiagnosticsConfig::default()).unwrap();
    let h = traj.step_size;
    for k in (1..traj.len() - 1).step_by(50) {
        let (lo, hi) = (
            s.lyapunov_signed[k - 1].unwrap(),
            s.lyapunov_signed[k + 1].unwrap(),
        );
        let slope = (hi - lo) / (2.0 * h);
        assert!((slope - s.lyapunov_rate[k].unwrap()).abs() < 1e-5, "k={k}");
        assert!((slope - s.det_rate[k] / s.dets[k]).abs() < 1e-5, "k={k}");
    }
}

#[test]
fn near_singular_samples_leave_rate_norm_undefined() {
    // M(t) = diag(1, 1 − t) is singular at t = 1.
    let m = TimeDependentMatrix::new(2, |t: f64| RealMatrix::from_diagonal(&[1.0, 1.0 - t]))
        .with_derivative(|_| RealMatrix::from_diagonal(&[0.0, -1.0]));
    let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let traj = contdyn::dynamics::Trajectory::sample(&m, &grid).unwrap();
    let s =
        contdyn::diagnostics::annotate_sampled(&traj, &m, &DiagnosticsConfig::default()).unwrap();
    assert!(s.near_singular_flags[10]);
    assert!(s.relative_rate_norm[10].is_none());
    assert!(s.lyapunov_signed[10].is_none());
    // C = |det| + α·|ḋet|² stays finite through the singular point.
    assert!((s.continuity_functional[10] - 1.0).abs() < 1e-9);
    for (k, t) in grid.iter().enumerate().take(10) {
        let expected = (1.0 / (1.0 - t)).abs();
        assert!((s.relative_rate_norm[k].unwrap() - expected).abs() < 1e-9 * expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn continuity_functional_dominates_abs_det(seed in any::<u64>(), alpha in 0.0f64..10.0) {
        let problem = random_problem(seed, 3, FeedbackKind::None);
        let traj = evolve(&problem, 100).unwrap();
        let s = annotate_trajectory(&traj, &problem, &DiagnosticsConfig { alpha, ..Default::default() }).unwrap();
        for (c, d) in s.continuity_functional.iter().zip(&s.dets) {
            prop_assert!(*c >= d.abs());
        }
        if alpha == 0.0 {
            for (c, d) in s.continuity_functional.iter().zip(&s.dets) {
                prop_assert_eq!(*c, d.abs());
            }
        }
    }

    #[test]
    fn relative_rate_norm_is_scale_invariant(seed in any::<u64>(), n in 2usize..=5) {
        let mut r = rng(seed);
        let m = &random_matrix(&mut r, n, 0.4) + &RealMatrix::identity(n);
        let mdot = random_matrix(&mut r, n, 1.0);
        let base = relative_rate_norm(&m, &mdot).unwrap();
        let scaled = relative_rate_norm(&m.scale(7.0), &mdot.scale(7.0)).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-13 * base.max(1.0));
    }

    #[test]
    fn jacobi_rate_matches_rhs_difference(seed in any::<u64>()) {
        let problem = random_problem(seed, 3, FeedbackKind::None);
        let t = 0.4;
        let m = problem.m0().clone();
        let mdot = rhs(&problem, t, &m).unwrap();
        let h = 1e-6;
        let fd = (m.add_scaled(h, &mdot).det().unwrap() - m.add_scaled(-h, &mdot).det().unwrap()) / (2.0 * h);
        let jac = det_rate_jacobi(&m, &mdot).unwrap();
        prop_assert!((fd - jac).abs() < 1e-6 * jac.abs().max(1.0));
        prop_assert!(continuity_functional(m.det().unwrap(), jac, 1.0) >= m.det().unwrap().abs());
    }
}

#[test]
fn continuity_functional_reduces_to_rate_term_at_crossing() {
    // det H = t² − 4 for E1 = E2 = t, Δ = 2; at t = 2, C = α·(2t)² = 16α.
    let h = contdyn::quantum::two_level_hamiltonian(
        contdyn::functions::ScalarFn::linear(0.0, 1.0),
        contdyn::functions::ScalarFn::linear(0.0, 1.0),
        2.0,
    )
    .unwrap()
    .evaluator();
    let grid: Vec<f64> = (0..=20).map(|k| 1.5 + 0.05 * k as f64).collect();
    let traj = contdyn::dynamics::Trajectory::sample(&h, &grid).unwrap();
    for alpha in [0.5, 1.0, 3.0] {
        let s = contdyn::diagnostics::annotate_sampled(
            &traj,
            &h,
            &DiagnosticsConfig {
                alpha,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(s.near_singular_flags[10]);
        assert!((s.continuity_functional[10] - 16.0 * alpha).abs() < 1e-6 * alpha);
        // Away from the crossing |det| dominates again.
        assert!(s.continuity_functional[0] > s.dets[0].abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn log_det_decreases_in_the_stable_regime(seed in any::<u64>(), gamma in 0.1f64..2.0) {
        // Tr A < 0 everywhere and 0 < det M0 < −Tr/(γn).
        let n = 3;
        let mut r = rng(seed);
        let a = &random_matrix(&mut r, n, 0.3) + &RealMatrix::scaled_identity(n, -0.5);
        let tau = a.trace();
        prop_assume!(tau < 0.0);
        let bound = -tau / (gamma * n as f64);
        let m0 = RealMatrix::scaled_identity(n, (0.9 * bound).powf(1.0 / n as f64));
        let problem = EvolutionProblem::new(
            TimeDependentMatrix::constant(a),
            TimeDependentMatrix::zero(n),
            FeedbackKind::StateScaled { gamma },
            m0,
            0.0,
            2.0,
        )
        .unwrap();
        let traj = evolve(&problem, 400).unwrap();
        let s = annotate_trajectory(&traj, &problem, &DiagnosticsConfig::default()).unwrap();
        let logs: Vec<f64> = s.lyapunov_signed.iter().map(|v| v.unwrap()).collect();
        prop_assert!(logs.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(s.lyapunov_rate.iter().all(|r| r.unwrap() < 0.0));
    }
}

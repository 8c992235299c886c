mod common;

use common::{loglog_slope, random_matrix, rng};
use contdyn::dynamics::{
    det_ode_solve, evolve, liouville_closed_form, picard_solve, time_ordered_propagator,
    trace_condition_check, uniform_grid, EvolutionProblem, FeedbackKind, TimeDependentMatrix,
};
use contdyn::RealMatrix;
use proptest::prelude::*;

/// A(t), B(t) that do not commute with each other or across times.
fn rotating_pair() -> (TimeDependentMatrix<f64>, TimeDependentMatrix<f64>) {
    let a = TimeDependentMatrix::new(2, |t: f64| {
        RealMatrix::from_rows(&[vec![0.3 * t.sin(), 1.0], vec![-0.5 + 0.2 * t, -0.1]]).unwrap()
    });
    let b = TimeDependentMatrix::new(2, |t: f64| {
        RealMatrix::from_rows(&[vec![0.2, 0.4 * t], vec![0.0, (2.0 * t).cos() * 0.3]]).unwrap()
    });
    (a, b)
}

#[test]
fn liouville_law_holds_for_noncommuting_generators() {
    let (a, b) = rotating_pair();
    let m0 = RealMatrix::from_rows(&[vec![1.0, 0.3], vec![-0.2, 0.8]]).unwrap();
    let problem = EvolutionProblem::new(
        a.clone(),
        b.clone(),
        FeedbackKind::None,
        m0.clone(),
        0.0,
        2.0,
    )
    .unwrap();
    let tau = |t: f64| a.eval(t).trace() + b.eval(t).trace();
    let exact = liouville_closed_form(&tau, m0.det().unwrap(), 0.0, 2.0).unwrap();
    let steps = [20usize, 40, 80, 160];
    let errs: Vec<f64> = steps
        .iter()
        .map(|&n| (evolve(&problem, n).unwrap().dets.last().unwrap() - exact).abs())
        .collect();
    let hs: Vec<f64> = steps.iter().map(|&n| 2.0 / n as f64).collect();
    let slope = loglog_slope(&hs, &errs);
    assert!((slope - 4.0).abs() < 0.3, "slope {slope}, errs {errs:?}");
    assert!(errs[3] < 1e-8);
}

#[test]
fn identity_scaled_feedback_follows_its_own_determinant_law() {
    // With f = γ·det·I, Jacobi gives d det/dt = det·(τ + γ·det·Tr M⁻¹), which is
    // not a closed scalar law. Check the integrated det against it pointwise.
    let a = TimeDependentMatrix::constant(
        RealMatrix::from_rows(&[vec![0.1, 0.2], vec![0.0, -0.3]]).unwrap(),
    );
    let m0 = RealMatrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 2.0]]).unwrap();
    let gamma = 0.4;
    let problem = EvolutionProblem::new(
        a.clone(),
        TimeDependentMatrix::zero(2),
        FeedbackKind::IdentityScaled { gamma },
        m0,
        0.0,
        1.0,
    )
    .unwrap();
    let traj = evolve(&problem, 2000).unwrap();
    let h = traj.step_size;
    for k in (1..traj.len() - 1).step_by(97) {
        let fd = (traj.dets[k + 1] - traj.dets[k - 1]) / (2.0 * h);
        let m = &traj.states[k];
        let law = traj.dets[k]
            * (a.eval(0.0).trace() + gamma * traj.dets[k] * m.inverse().unwrap().trace());
        assert!(
            (fd - law).abs() < 1e-6 * law.abs().max(1.0),
            "t={} fd={fd} law={law}",
            traj.times[k]
        );
    }
}

#[test]
fn state_and_identity_feedback_differ_away_from_unit_state() {
    // With M0 = c·I and A = a·I the state stays m(t)·I, and γ·det·M differs
    // from γ·det·I by the factor m, which is not 1 here.
    let gamma = 0.5;
    let run = |feedback: FeedbackKind, m0: RealMatrix| {
        let p = EvolutionProblem::new(
            TimeDependentMatrix::constant(RealMatrix::scaled_identity(2, 0.2)),
            TimeDependentMatrix::zero(2),
            feedback,
            m0,
            0.0,
            0.5,
        )
        .unwrap();
        *evolve(&p, 500).unwrap().dets.last().unwrap()
    };
    let s = run(
        FeedbackKind::StateScaled { gamma },
        RealMatrix::scaled_identity(2, 0.8),
    );
    let i = run(
        FeedbackKind::IdentityScaled { gamma },
        RealMatrix::scaled_identity(2, 0.8),
    );
    assert!((s - i).abs() > 1e-3);
}

#[test]
fn bernoulli_pole_estimate_with_drift() {
    // τ = 0.5, c = γ·n = 2, det0 = 0.3: pole at ln(1 + τ/(c·det0))/τ.
    let (tau, gamma, n, det0) = (0.5, 1.0, 2usize, 0.3);
    let c = gamma * n as f64;
    let pole = (1.0 + tau / (c * det0)).ln() / tau;
    let grid = uniform_grid(0.0, 3.0, 30_000);
    let sol = det_ode_solve(&|_| tau, gamma, n, det0, &grid).unwrap();
    let blow = sol.blow_up.expect("finite-time blow-up");
    assert!(
        (blow.time_estimate - pole).abs() < 0.01 * pole,
        "{} vs {pole}",
        blow.time_estimate
    );
    // Closed form on the accepted part.
    for (&t, &y) in sol.times.iter().zip(&sol.values).step_by(500) {
        let e = (tau * t).exp();
        let exact = tau * det0 * e / (tau + c * det0 * (1.0 - e));
        if exact.abs() < 1e3 {
            assert!((y - exact).abs() < 1e-8 * exact.abs(), "t={t}");
        }
    }
}

#[test]
fn negative_determinant_decays_without_blow_up() {
    let grid = uniform_grid(0.0, 5.0, 500);
    let sol = det_ode_solve(&|_| 0.0, 1.0, 2, -0.5, &grid).unwrap();
    assert!(sol.blow_up.is_none());
    let t: f64 = 5.0;
    let exact = -0.5 / (1.0 + 2.0 * 0.5 * t);
    assert!((sol.values.last().unwrap() - exact).abs() < 1e-8);
}

#[test]
fn picard_agrees_with_rk4_on_short_interval() {
    let (a, b) = rotating_pair();
    let m0 = RealMatrix::identity(2);
    let problem = EvolutionProblem::new(a, b, FeedbackKind::None, m0, 0.0, 0.1).unwrap();
    let grid = uniform_grid(0.0, 0.1, 400);
    let pic = picard_solve(&problem, 12, &grid).unwrap();
    let rk = evolve(&problem, 400).unwrap();
    let sup = pic
        .trajectory
        .states
        .iter()
        .zip(&rk.states)
        .map(|(p, r)| p.distance(r))
        .fold(0.0, f64::max);
    assert!(sup < 1e-6, "sup {sup}");
}

#[test]
fn propagator_is_second_order_for_noncommuting_generator() {
    let (a, _) = rotating_pair();
    let problem = EvolutionProblem::linear(a.clone(), RealMatrix::identity(2), 0.0, 2.0).unwrap();
    let reference = evolve(&problem, 20_000).unwrap();
    let exact = reference.states.last().unwrap();
    let steps = [25usize, 50, 100, 200];
    let errs: Vec<f64> = steps
        .iter()
        .map(|&n| {
            let props = time_ordered_propagator(&a, &uniform_grid(0.0, 2.0, n)).unwrap();
            props.last().unwrap().distance(exact)
        })
        .collect();
    let hs: Vec<f64> = steps.iter().map(|&n| 2.0 / n as f64).collect();
    let slope = loglog_slope(&hs, &errs);
    assert!((slope - 2.0).abs() < 0.2, "slope {slope}, errs {errs:?}");
}

#[test]
fn trace_condition_crossing() {
    // Tr[A + B] = 1 + 2t, ∫_0^t = t + t²; reaches 2 at t = 1.
    let a = TimeDependentMatrix::new(1, |t: f64| {
        RealMatrix::from_row_major(1, vec![2.0 * t]).unwrap()
    });
    let b = TimeDependentMatrix::constant(RealMatrix::identity(1));
    let grid = uniform_grid(0.0, 1.5, 15);
    let report = trace_condition_check(&a, &b, &grid, 2.0).unwrap();
    assert!(!report.passes);
    assert!((report.first_crossing.unwrap() - 1.0).abs() < 1e-9);
    assert!((report.max_abs_integral - 3.75).abs() < 1e-9);
    let ok = trace_condition_check(&a, &b, &uniform_grid(0.0, 0.5, 10), 2.0).unwrap();
    assert!(ok.passes && ok.first_crossing.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_flow_preserves_determinant_sign(seed in any::<u64>(), n in 2usize..=4) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, n, 1.0);
        let m0 = &random_matrix(&mut r, n, 0.3) + &RealMatrix::identity(n);
        let det0 = m0.det().unwrap();
        let problem = EvolutionProblem::linear(TimeDependentMatrix::constant(a.clone()), m0, 0.0, 1.0).unwrap();
        let traj = evolve(&problem, 200).unwrap();
        for (t, d) in traj.times.iter().zip(&traj.dets) {
            prop_assert!(d.signum() == det0.signum());
            let exact = det0 * (a.trace() * t).exp();
            prop_assert!((d - exact).abs() < 1e-9 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn state_scaled_determinant_follows_scalar_law(seed in any::<u64>(), gamma in -1.0f64..1.0) {
        let mut r = rng(seed);
        let n = 3;
        let a = random_matrix(&mut r, n, 0.5);
        let b = random_matrix(&mut r, n, 0.5);
        let m0 = &random_matrix(&mut r, n, 0.2) + &RealMatrix::identity(n);
        let det0 = m0.det().unwrap();
        let problem = EvolutionProblem::new(
            TimeDependentMatrix::constant(a.clone()),
            TimeDependentMatrix::constant(b.clone()),
            FeedbackKind::StateScaled { gamma },
            m0,
            0.0,
            0.15,
        )
        .unwrap();
        let traj = evolve(&problem, 300).unwrap();
        let tau = a.trace() + b.trace();
        let scalar = det_ode_solve(&|_| tau, gamma, n, det0, &traj.times).unwrap();
        prop_assume!(scalar.blow_up.is_none());
        for (d, s) in traj.dets.iter().zip(&scalar.values) {
            prop_assert!((d - s).abs() <= 1e-8 * s.abs().max(1e-3));
        }
    }
}

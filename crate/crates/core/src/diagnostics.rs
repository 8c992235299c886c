//! Singularity-proximity diagnostics along matrix trajectories.
//!
//! Two different quantities are both called a "continuity norm" in the
//! literature this crate follows, and they are kept apart here:
//!
//! - [`continuity_functional`]: `C[M] = |det M| + α·(d det M/dt)²`, small
//!   near a singular `M` that is not moving through it quickly;
//! - [`relative_rate_norm`]: `‖M⁻¹·dM/dt‖_F`, which diverges near singular `M`.
//!
//! The log-determinant Lyapunov series is computed signed: `d/dt log det M =
//! Tr[A+B] + γ·n·det M` holds for the signed logarithm, and `V = |log det M|`
//! is derived from it for display.

use crate::dynamics::{rhs, EvolutionProblem, TimeDependentMatrix, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::matrix::{inverse_with_tol, Matrix, Scalar, DEFAULT_SINGULAR_TOL};

pub const DEFAULT_NEAR_SINGULAR_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    /// `dM/dt` from the evolution right-hand side (or the analytic derivative
    /// of a sampled matrix function), determinant rate by Jacobi's formula.
    AnalyticJacobi,
    /// `dM/dt` from second-order differences of the stored states.
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsConfig {
    pub alpha: f64,
    pub derivative_mode: DerivativeMode,
    /// Step for directional determinant differences; `None` means
    /// `1e-5 × grid span`.
    pub fd_step: Option<f64>,
    /// Absolute threshold on `|det M|`.
    pub near_singular_threshold: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            derivative_mode: DerivativeMode::AnalyticJacobi,
            fd_step: None,
            near_singular_threshold: DEFAULT_NEAR_SINGULAR_THRESHOLD,
        }
    }
}

impl DiagnosticsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be finite and nonnegative"));
        }
        if let Some(h) = self.fd_step {
            crate::matrix::require_positive("fd_step", h)?;
        }
        crate::matrix::require_positive("near_singular_threshold", self.near_singular_threshold)
    }
}

/// Per-sample diagnostics. `None` marks a metric that is undefined at that
/// sample (near-singular `M`, or a non-positive real determinant for the
/// logarithm).
#[derive(Debug, Clone)]
pub struct DiagnosticsSeries<T: Scalar> {
    pub times: Vec<f64>,
    pub dets: Vec<T>,
    pub det_rate: Vec<T>,
    pub continuity_functional: Vec<f64>,
    pub relative_rate_norm: Vec<Option<f64>>,
    pub lyapunov_signed: Vec<Option<f64>>,
    pub lyapunov_value: Vec<Option<f64>>,
    /// `Tr[A+B] + γ·n·det M`; absent for sampled matrix functions.
    pub lyapunov_rate: Vec<Option<T>>,
    pub near_singular_flags: Vec<bool>,
    /// Set for complex determinants, where the logarithm uses `|det M|`.
    pub lyapunov_modulus_only: bool,
}

/// `|det M| + α·|d det M/dt|²`.
pub fn continuity_functional<T: Scalar>(det: T, det_rate: T, alpha: f64) -> f64 {
    det.modulus() + alpha * det_rate.modulus_sqr()
}

/// `‖M⁻¹·Ṁ‖_F`, undefined when `|det M|` is at or below the default
/// near-singular threshold.
pub fn relative_rate_norm<T: Scalar>(m: &Matrix<T>, mdot: &Matrix<T>) -> Option<f64> {
    relative_rate_norm_with_threshold(m, mdot, DEFAULT_NEAR_SINGULAR_THRESHOLD)
}

pub fn relative_rate_norm_with_threshold<T: Scalar>(
    m: &Matrix<T>,
    mdot: &Matrix<T>,
    threshold: f64,
) -> Option<f64> {
    let det = m.det().ok()?;
    if !(det.modulus() > threshold) {
        return None;
    }
    let inv = inverse_with_tol(m, DEFAULT_SINGULAR_TOL).ok()?;
    Some((&inv * mdot).frobenius_norm())
}

/// Jacobi's formula `d det M/dt = det M · Tr[M⁻¹·Ṁ]`.
pub fn det_rate_jacobi<T: Scalar>(m: &Matrix<T>, mdot: &Matrix<T>) -> Result<T> {
    if m.dim() != mdot.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: mdot.dim(),
        });
    }
    let inv = inverse_with_tol(m, DEFAULT_SINGULAR_TOL)?;
    Ok(m.det()? * (&inv * mdot).trace())
}

/// `(det(M + hṀ) − det(M − hṀ)) / 2h`: the determinant rate without an
/// inverse. Exact up to roundoff for `n ≤ 2`.
pub fn det_rate_directional<T: Scalar>(m: &Matrix<T>, mdot: &Matrix<T>, h: f64) -> Result<T> {
    let hk = T::from_real(h);
    let plus = m.add_scaled(hk, mdot).det()?;
    let minus = m.add_scaled(-hk, mdot).det()?;
    Ok((plus - minus).scale(0.5 / h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovValue {
    /// `V = |log det M|`.
    pub value: f64,
    /// `log det M` (real field) or `log |det M|` (complex field).
    pub signed_log: f64,
    /// True when only the modulus of a complex determinant entered.
    pub modulus_only: bool,
}

pub fn lyapunov_value<T: Scalar>(m: &Matrix<T>) -> Result<LyapunovValue> {
    lyapunov_from_det(m.det()?)
}

pub fn lyapunov_from_det<T: Scalar>(det: T) -> Result<LyapunovValue> {
    let signed_log = if T::IS_COMPLEX {
        if det.modulus() == 0.0 {
            return Err(Error::Domain("log of a zero determinant".into()));
        }
        det.modulus().ln()
    } else {
        let d = det.re();
        if !(d > 0.0) {
            return Err(Error::Domain(format!("log det needs det > 0, got {d}")));
        }
        d.ln()
    };
    Ok(LyapunovValue {
        value: signed_log.abs(),
        signed_log,
        modulus_only: T::IS_COMPLEX,
    })
}

/// `d/dt log det M = τ + γ·n·det M` with `τ = Tr[A + B]`.
pub fn lyapunov_rate<T: Scalar>(tau: T, gamma: f64, n: usize, det: T) -> T {
    tau + det.scale(gamma * n as f64)
}

/// Diagnostics along an integrated trajectory of `problem`.
pub fn annotate_trajectory<T: Scalar>(
    traj: &Trajectory<T>,
    problem: &EvolutionProblem<T>,
    config: &DiagnosticsConfig,
) -> Result<DiagnosticsSeries<T>> {
    let analytic = |k: usize| rhs(problem, traj.times[k], &traj.states[k]).ok();
    let gamma = problem.feedback().gamma();
    let rate = |k: usize| {
        let t = traj.times[k];
        Some(lyapunov_rate(
            problem.generator_trace(t),
            gamma,
            problem.dim(),
            traj.dets[k],
        ))
    };
    annotate(traj, config, analytic, rate)
}

/// Diagnostics of a prescribed matrix function sampled in `traj` (for
/// example a Hamiltonian `H(t)` via [`Trajectory::sample`]). The analytic
/// mode uses the attached derivative of `source`, or a central difference.
pub fn annotate_sampled<T: Scalar>(
    traj: &Trajectory<T>,
    source: &TimeDependentMatrix<T>,
    config: &DiagnosticsConfig,
) -> Result<DiagnosticsSeries<T>> {
    let h = fd_step(traj, config);
    let analytic = |k: usize| Some(source.derivative_or_fd(traj.times[k], h));
    annotate(traj, config, analytic, |_| None)
}

fn fd_step<T: Scalar>(traj: &Trajectory<T>, config: &DiagnosticsConfig) -> f64 {
    config.fd_step.unwrap_or_else(|| {
        let span = traj.times[traj.times.len() - 1] - traj.times[0];
        if span > 0.0 {
            1e-5 * span
        } else {
            1e-5
        }
    })
}

fn annotate<T: Scalar>(
    traj: &Trajectory<T>,
    config: &DiagnosticsConfig,
    analytic: impl Fn(usize) -> Option<Matrix<T>>,
    rate: impl Fn(usize) -> Option<T>,
) -> Result<DiagnosticsSeries<T>> {
    config.validate()?;
    if traj.is_empty() {
        return Err(invalid("trajectory", "must not be empty"));
    }
    let h = fd_step(traj, config);
    let n = traj.len();
    let mut series = DiagnosticsSeries {
        times: traj.times.clone(),
        dets: traj.dets.clone(),
        det_rate: Vec::with_capacity(n),
        continuity_functional: Vec::with_capacity(n),
        relative_rate_norm: Vec::with_capacity(n),
        lyapunov_signed: Vec::with_capacity(n),
        lyapunov_value: Vec::with_capacity(n),
        lyapunov_rate: Vec::with_capacity(n),
        near_singular_flags: Vec::with_capacity(n),
        lyapunov_modulus_only: T::IS_COMPLEX,
    };

    for k in 0..n {
        let m = &traj.states[k];
        let det = traj.dets[k];
        let mdot = match config.derivative_mode {
            DerivativeMode::AnalyticJacobi => {
                analytic(k).unwrap_or_else(|| state_difference(traj, k))
            }
            DerivativeMode::FiniteDifference => state_difference(traj, k),
        };
        let near_singular = !(det.modulus() > config.near_singular_threshold);
        let det_rate = if near_singular {
            det_rate_directional(m, &mdot, h)?
        } else {
            match det_rate_jacobi(m, &mdot) {
                Ok(r) => r,
                Err(Error::Singular { .. }) => det_rate_directional(m, &mdot, h)?,
                Err(e) => return Err(e),
            }
        };
        let lyap = lyapunov_from_det(det).ok();

        series.det_rate.push(det_rate);
        series
            .continuity_functional
            .push(continuity_functional(det, det_rate, config.alpha));
        series.relative_rate_norm.push(if near_singular {
            None
        } else {
            relative_rate_norm_with_threshold(m, &mdot, config.near_singular_threshold)
        });
        series.lyapunov_signed.push(lyap.map(|l| l.signed_log));
        series.lyapunov_value.push(lyap.map(|l| l.value));
        series.lyapunov_rate.push(rate(k));
        series.near_singular_flags.push(near_singular);
    }
    Ok(series)
}

/// Second-order difference of the stored states: central in the interior,
/// three-point one-sided at the ends, forward difference for two samples.
fn state_difference<T: Scalar>(traj: &Trajectory<T>, k: usize) -> Matrix<T> {
    let (t, s) = (&traj.times, &traj.states);
    let n = s.len();
    if n == 1 {
        return Matrix::zeros(s[0].dim());
    }
    if n == 2 {
        return (&s[1] - &s[0]).scale_real(1.0 / (t[1] - t[0]));
    }
    if k == 0 {
        let (h0, h1) = (t[1] - t[0], t[2] - t[1]);
        return combine(
            [&s[0], &s[1], &s[2]],
            [
                -(2.0 * h0 + h1) / (h0 * (h0 + h1)),
                (h0 + h1) / (h0 * h1),
                -h0 / (h1 * (h0 + h1)),
            ],
        );
    }
    if k == n - 1 {
        let (h0, h1) = (t[n - 2] - t[n - 3], t[n - 1] - t[n - 2]);
        return combine(
            [&s[n - 3], &s[n - 2], &s[n - 1]],
            [
                h1 / (h0 * (h0 + h1)),
                -(h0 + h1) / (h0 * h1),
                (2.0 * h1 + h0) / (h1 * (h0 + h1)),
            ],
        );
    }
    // nonuniform central difference, second order
    let (h0, h1) = (t[k] - t[k - 1], t[k + 1] - t[k]);
    combine(
        [&s[k - 1], &s[k], &s[k + 1]],
        [
            -h1 / (h0 * (h0 + h1)),
            (h1 - h0) / (h0 * h1),
            h0 / (h1 * (h0 + h1)),
        ],
    )
}

fn combine<T: Scalar>(m: [&Matrix<T>; 3], w: [f64; 3]) -> Matrix<T> {
    m[0].scale_real(w[0])
        .add_scaled(T::from_real(w[1]), m[1])
        .add_scaled(T::from_real(w[2]), m[2])
}

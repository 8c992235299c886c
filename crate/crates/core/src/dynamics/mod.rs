//! Matrix evolution `dM/dt = A(t)M + M B(t) + f[M]` and the determinant laws
//! that follow from it.
//!
//! Integrators: [`evolve`] (fixed-step RK4), [`picard_solve`] (fixed-point
//! iteration on the integral form), [`time_ordered_propagator`] (ordered
//! product of midpoint step exponentials). Scalar laws: [`det_ode_solve`]
//! integrates `d det/dt = det·(Tr[A+B] + γ·n·det)`, and
//! [`liouville_closed_form`] evaluates `det0·exp(∫Tr[A+B])`.

mod determinant;
mod feedback;
mod picard;
mod propagator;
pub mod quadrature;
mod rk4;
mod time_matrix;

use crate::error::{invalid, Error, Result};
use crate::matrix::{Matrix, Scalar, DEFAULT_SINGULAR_TOL};

pub use determinant::{
    det_ode_solve, liouville_closed_form, trace_condition_check, BlowUpEvent, ScalarTrajectory,
    TraceConditionReport, BLOW_UP_GUARD,
};
pub use feedback::{feedback_eval, FeedbackKind};
pub use picard::{picard_contraction_factor, picard_solve, PicardSolution};
pub use propagator::time_ordered_propagator;
pub use rk4::{evolve, rhs};
pub use time_matrix::{MatrixFn, TimeDependentMatrix};

/// Initial value problem for the two-sided matrix evolution with feedback.
#[derive(Clone)]
pub struct EvolutionProblem<T: Scalar> {
    a: TimeDependentMatrix<T>,
    b: TimeDependentMatrix<T>,
    feedback: FeedbackKind,
    m0: Matrix<T>,
    t0: f64,
    tf: f64,
    singular_tol: f64,
}

impl<T: Scalar> EvolutionProblem<T> {
    pub fn new(
        a: TimeDependentMatrix<T>,
        b: TimeDependentMatrix<T>,
        feedback: FeedbackKind,
        m0: Matrix<T>,
        t0: f64,
        tf: f64,
    ) -> Result<Self> {
        if !(t0.is_finite() && tf.is_finite() && t0 < tf) {
            return Err(invalid(
                "tf",
                format!("need finite t0 < tf, got [{t0}, {tf}]"),
            ));
        }
        for found in [a.dim(), b.dim()] {
            if found != m0.dim() {
                return Err(Error::DimensionMismatch {
                    expected: m0.dim(),
                    found,
                });
            }
        }
        feedback.validate()?;
        if !m0.is_finite() {
            return Err(Error::NonFinite("initial matrix"));
        }
        let det0 = m0.det()?;
        if det0.modulus() == 0.0 {
            return Err(Error::Singular {
                det_abs: 0.0,
                threshold: 0.0,
            });
        }
        Ok(Self {
            a,
            b,
            feedback,
            m0,
            t0,
            tf,
            singular_tol: DEFAULT_SINGULAR_TOL,
        })
    }

    /// Problem with `B ≡ 0` and no feedback: `dM/dt = A(t)M`.
    pub fn linear(a: TimeDependentMatrix<T>, m0: Matrix<T>, t0: f64, tf: f64) -> Result<Self> {
        let b = TimeDependentMatrix::zero(a.dim());
        Self::new(a, b, FeedbackKind::None, m0, t0, tf)
    }

    /// Relative singularity tolerance used to halt inverse-scaled runs.
    pub fn with_singular_tol(mut self, rel_tol: f64) -> Result<Self> {
        crate::matrix::require_positive("singular_tol", rel_tol)?;
        self.singular_tol = rel_tol;
        Ok(self)
    }

    pub fn a(&self) -> &TimeDependentMatrix<T> {
        &self.a
    }
    pub fn b(&self) -> &TimeDependentMatrix<T> {
        &self.b
    }
    pub fn feedback(&self) -> &FeedbackKind {
        &self.feedback
    }
    pub fn m0(&self) -> &Matrix<T> {
        &self.m0
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn tf(&self) -> f64 {
        self.tf
    }
    pub fn dim(&self) -> usize {
        self.m0.dim()
    }
    pub fn singular_tol(&self) -> f64 {
        self.singular_tol
    }

    /// `Tr[A(t) + B(t)]`.
    pub fn generator_trace(&self, t: f64) -> T {
        self.a.eval(t).trace() + self.b.eval(t).trace()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Picard,
    TimeOrderedExp,
    /// Samples of a prescribed matrix function rather than an integrated flow.
    Sampled,
}

/// Integration halted because `|det M|` fell below the singularity threshold
/// while the feedback required `M⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityEvent {
    pub time: f64,
    pub det_abs: f64,
    pub threshold: f64,
}

/// Sampled matrix trajectory. `dets[k]` is `det(states[k])` as computed by
/// [`crate::matrix::det`].
#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar> {
    pub times: Vec<f64>,
    pub states: Vec<Matrix<T>>,
    pub dets: Vec<T>,
    pub step_size: f64,
    pub method: Method,
    pub event: Option<SingularityEvent>,
}

impl<T: Scalar> Trajectory<T> {
    pub(crate) fn from_states(
        times: Vec<f64>,
        states: Vec<Matrix<T>>,
        step_size: f64,
        method: Method,
    ) -> Result<Self> {
        let dets = states.iter().map(|m| m.det()).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times,
            states,
            dets,
            step_size,
            method,
            event: None,
        })
    }

    /// Samples a matrix function on a grid.
    pub fn sample(m: &TimeDependentMatrix<T>, grid: &[f64]) -> Result<Self> {
        check_grid(grid)?;
        let states = grid
            .iter()
            .map(|&t| m.try_eval(t))
            .collect::<Result<Vec<_>>>()?;
        let h = grid[1] - grid[0];
        Self::from_states(grid.to_vec(), states, h, Method::Sampled)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(&f64, &Matrix<T>)> {
        self.times.last().zip(self.states.last())
    }
}

/// `n_steps + 1` equally spaced points on `[t0, tf]`; endpoints are exact.
pub fn uniform_grid(t0: f64, tf: f64, n_steps: usize) -> Vec<f64> {
    assert!(n_steps >= 1, "need at least one step");
    let h = (tf - t0) / n_steps as f64;
    (0..=n_steps)
        .map(|k| if k == n_steps { tf } else { t0 + k as f64 * h })
        .collect()
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(invalid("grid", "need at least two points"));
    }
    if !grid.iter().all(|t| t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(
            "grid",
            "times must be finite and strictly increasing",
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::RealMatrix;

    #[test]
    fn problem_validation() {
        let a = TimeDependentMatrix::<f64>::zero(2);
        let m0 = RealMatrix::identity(2);
        assert!(EvolutionProblem::linear(a.clone(), m0.clone(), 1.0, 1.0).is_err());
        assert!(EvolutionProblem::linear(a.clone(), RealMatrix::zeros(2), 0.0, 1.0).is_err());
        assert!(matches!(
            EvolutionProblem::linear(a.clone(), RealMatrix::identity(3), 0.0, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = FeedbackKind::Regularized {
            gamma: 1.0,
            epsilon: 0.0,
        };
        assert!(EvolutionProblem::new(a.clone(), a.clone(), bad, m0.clone(), 0.0, 1.0).is_err());
        assert!(EvolutionProblem::linear(a, m0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn uniform_grid_hits_endpoints() {
        let g = uniform_grid(0.1, 0.7, 3);
        assert_eq!(g.len(), 4);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[3], 0.7);
        assert!(check_grid(&g).is_ok());
        assert!(check_grid(&[0.0]).is_err());
        assert!(check_grid(&[0.0, 0.0]).is_err());
    }
}

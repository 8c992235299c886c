use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::matrix::{inverse_with_tol, regularized_inverse, Matrix, Scalar, DEFAULT_SINGULAR_TOL};

/// Determinant-scaled feedback term `f[M]` added to the evolution.
///
/// Only `StateScaled` turns `Tr[M⁻¹ f[M]]` into `γ·n·det M`, so it is the
/// variant under which the scalar determinant law holds exactly. The others
/// give `γ·det·Tr[M⁻¹]` (identity) and `γ·det·Tr[M⁻²]` (inverse).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeedbackKind {
    None,
    /// `γ·det(M)·M⁻¹`
    InverseScaled {
        gamma: f64,
    },
    /// `γ·det(M)·I`
    IdentityScaled {
        gamma: f64,
    },
    /// `γ·det(M)·M`
    StateScaled {
        gamma: f64,
    },
    /// `γ·det(M)·(M*M + εI)⁻¹M*`
    Regularized {
        gamma: f64,
        epsilon: f64,
    },
}

impl FeedbackKind {
    pub fn gamma(&self) -> f64 {
        match *self {
            FeedbackKind::None => 0.0,
            FeedbackKind::InverseScaled { gamma }
            | FeedbackKind::IdentityScaled { gamma }
            | FeedbackKind::StateScaled { gamma }
            | FeedbackKind::Regularized { gamma, .. } => gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma().is_finite() {
            return Err(invalid("gamma", "must be finite"));
        }
        if let FeedbackKind::Regularized { epsilon, .. } = *self {
            crate::matrix::require_positive("epsilon", epsilon)?;
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            FeedbackKind::None => "none",
            FeedbackKind::InverseScaled { .. } => "inverse_scaled",
            FeedbackKind::IdentityScaled { .. } => "identity_scaled",
            FeedbackKind::StateScaled { .. } => "state_scaled",
            FeedbackKind::Regularized { .. } => "regularized",
        }
    }
}

/// Evaluates `f[M]` with the default singularity tolerance for the inverse.
pub fn feedback_eval<T: Scalar>(kind: &FeedbackKind, m: &Matrix<T>) -> Result<Matrix<T>> {
    feedback_eval_with_tol(kind, m, DEFAULT_SINGULAR_TOL)
}

pub(crate) fn feedback_eval_with_tol<T: Scalar>(
    kind: &FeedbackKind,
    m: &Matrix<T>,
    singular_tol: f64,
) -> Result<Matrix<T>> {
    kind.validate()?;
    let n = m.dim();
    if let FeedbackKind::None = kind {
        return Ok(Matrix::zeros(n));
    }
    let weight = m.det()? * T::from_real(kind.gamma());
    let out = match *kind {
        FeedbackKind::None => unreachable!(),
        FeedbackKind::InverseScaled { .. } => inverse_with_tol(m, singular_tol)?.scale(weight),
        FeedbackKind::IdentityScaled { .. } => Matrix::scaled_identity(n, weight),
        FeedbackKind::StateScaled { .. } => m.scale(weight),
        FeedbackKind::Regularized { epsilon, .. } => regularized_inverse(m, epsilon)?.scale(weight),
    };
    out.check_finite("feedback")
}

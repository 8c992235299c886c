use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Scalar};

pub type MatrixFn<T> = Arc<dyn Fn(f64) -> Matrix<T> + Send + Sync>;

/// A map `t → Matrix` with an optional analytic time derivative.
///
/// Evaluators must be pure functions of `t`; they are shared across threads.
#[derive(Clone)]
pub struct TimeDependentMatrix<T: Scalar> {
    dim: usize,
    eval: MatrixFn<T>,
    derivative: Option<MatrixFn<T>>,
}

impl<T: Scalar> TimeDependentMatrix<T> {
    pub fn new(dim: usize, eval: impl Fn(f64) -> Matrix<T> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
            derivative: None,
        }
    }

    pub fn with_derivative(
        mut self,
        derivative: impl Fn(f64) -> Matrix<T> + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn constant(m: Matrix<T>) -> Self {
        let dim = m.dim();
        Self::new(dim, move |_| m.clone()).with_derivative(move |_| Matrix::zeros(dim))
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(Matrix::zeros(dim))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn eval(&self, t: f64) -> Matrix<T> {
        (self.eval)(t)
    }

    /// Evaluates and checks shape and finiteness.
    pub fn try_eval(&self, t: f64) -> Result<Matrix<T>> {
        let m = self.eval(t);
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.dim(),
            });
        }
        m.check_finite("time-dependent matrix evaluation")
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn derivative(&self, t: f64) -> Option<Matrix<T>> {
        self.derivative.as_ref().map(|d| d(t))
    }

    /// Central difference `(M(t+h) − M(t−h)) / 2h`.
    pub fn central_difference(&self, t: f64, h: f64) -> Matrix<T> {
        (&self.eval(t + h) - &self.eval(t - h)).scale_real(0.5 / h)
    }

    /// Analytic derivative if attached, central difference otherwise.
    pub fn derivative_or_fd(&self, t: f64, h: f64) -> Matrix<T> {
        self.derivative(t)
            .unwrap_or_else(|| self.central_difference(t, h))
    }

    /// Largest Frobenius gap between the analytic derivative and a central
    /// difference with step `h` over `probes`. `None` without a derivative.
    pub fn derivative_discrepancy(&self, probes: &[f64], h: f64) -> Option<f64> {
        self.derivative.as_ref()?;
        Some(
            probes
                .iter()
                .map(|&t| {
                    let analytic = self.derivative(t).expect("checked above");
                    analytic.distance(&self.central_difference(t, h))
                })
                .fold(0.0, f64::max),
        )
    }

    /// `t → k·M(t)`, derivative scaled alike.
    pub fn scaled(&self, k: T) -> Self {
        let eval = self.eval.clone();
        let derivative = self
            .derivative
            .clone()
            .map(|d| -> MatrixFn<T> { Arc::new(move |t| d(t).scale(k)) });
        Self {
            dim: self.dim,
            eval: Arc::new(move |t| eval(t).scale(k)),
            derivative,
        }
    }

    /// `t → M(t) + N(t)`.
    pub fn sum(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let derivative = match (&self.derivative, &other.derivative) {
            (Some(df), Some(dg)) => {
                let (df, dg) = (df.clone(), dg.clone());
                Some(Arc::new(move |t| &df(t) + &dg(t)) as MatrixFn<T>)
            }
            _ => None,
        };
        Self {
            dim: self.dim,
            eval: Arc::new(move |t| &f(t) + &g(t)),
            derivative,
        }
    }
}

impl TimeDependentMatrix<f64> {
    pub fn to_complex(&self) -> TimeDependentMatrix<Complex64> {
        let eval = self.eval.clone();
        let derivative = self
            .derivative
            .clone()
            .map(|d| -> MatrixFn<Complex64> { Arc::new(move |t| d(t).to_complex()) });
        TimeDependentMatrix {
            dim: self.dim,
            eval: Arc::new(move |t| eval(t).to_complex()),
            derivative,
        }
    }
}

impl<T: Scalar> fmt::Debug for TimeDependentMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeDependentMatrix")
            .field("dim", &self.dim)
            .field("has_derivative", &self.derivative.is_some())
            .finish()
    }
}

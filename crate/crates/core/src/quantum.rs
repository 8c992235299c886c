//! Quantum specialization: `iħ dU/dt = H(t)U` is the evolution problem with
//! `A = −iH/ħ`, `B = 0` and no feedback, so `det U(t) =
//! exp(−(i/ħ)∫Tr H)` and `|det U| = 1` for Hermitian `H`.
//!
//! Two different singularities show up here and are reported separately:
//! `det H(t) = 0` at level crossings of the Hamiltonian, while the propagator
//! `U` stays unitary and never becomes singular.

use num_complex::Complex64;

use crate::dynamics::quadrature::{adaptive_simpson, cumulative, DEFAULT_TOL};
use crate::dynamics::{check_grid, EvolutionProblem, TimeDependentMatrix, Trajectory};
use crate::error::{invalid, Result};
use crate::functions::ScalarFn;
use crate::matrix::{ComplexMatrix, RealMatrix};

/// Bisection stops once the bracket is this narrow (in time units).
pub const CROSSING_RESOLUTION: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum TwoLevelParams {
    /// `[[E1(t), Δ], [Δ, E2(t)]]` with constant coupling `Δ`.
    Levels {
        e1: ScalarFn,
        e2: ScalarFn,
        delta: f64,
    },
    /// `[[ε(t), Δ(t)], [Δ(t), −ε(t)]]`, detuning and tunneling drive.
    Driven { epsilon: ScalarFn, delta: ScalarFn },
}

/// Real symmetric 2×2 Hamiltonian built from [`TwoLevelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelHamiltonian {
    params: TwoLevelParams,
}

pub fn two_level_hamiltonian(
    e1: ScalarFn,
    e2: ScalarFn,
    delta: f64,
) -> Result<TwoLevelHamiltonian> {
    TwoLevelHamiltonian::new(TwoLevelParams::Levels { e1, e2, delta })
}

pub fn driven_two_level(epsilon: ScalarFn, delta: ScalarFn) -> Result<TwoLevelHamiltonian> {
    TwoLevelHamiltonian::new(TwoLevelParams::Driven { epsilon, delta })
}

impl TwoLevelHamiltonian {
    pub fn new(params: TwoLevelParams) -> Result<Self> {
        let finite = match &params {
            TwoLevelParams::Levels { e1, e2, delta } => {
                e1.is_finite() && e2.is_finite() && delta.is_finite()
            }
            TwoLevelParams::Driven { epsilon, delta } => epsilon.is_finite() && delta.is_finite(),
        };
        if !finite {
            return Err(invalid("two_level", "parameters must be finite"));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &TwoLevelParams {
        &self.params
    }

    /// `(diag0, diag1, off)` at `t`.
    fn entries(&self, t: f64) -> (f64, f64, f64) {
        match &self.params {
            TwoLevelParams::Levels { e1, e2, delta } => (e1.eval(t), e2.eval(t), *delta),
            TwoLevelParams::Driven { epsilon, delta } => {
                let e = epsilon.eval(t);
                (e, -e, delta.eval(t))
            }
        }
    }

    fn entry_derivatives(&self, t: f64) -> (f64, f64, f64) {
        match &self.params {
            TwoLevelParams::Levels { e1, e2, .. } => (e1.derivative(t), e2.derivative(t), 0.0),
            TwoLevelParams::Driven { epsilon, delta } => {
                let e = epsilon.derivative(t);
                (e, -e, delta.derivative(t))
            }
        }
    }

    pub fn matrix(&self, t: f64) -> RealMatrix {
        let (a, d, off) = self.entries(t);
        RealMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => a,
            (1, 1) => d,
            _ => off,
        })
    }

    /// `E1·E2 − Δ²`, or `−ε² − Δ²` for the driven form.
    pub fn det(&self, t: f64) -> f64 {
        let (a, d, off) = self.entries(t);
        a * d - off * off
    }

    pub fn trace(&self, t: f64) -> f64 {
        let (a, d, _) = self.entries(t);
        a + d
    }

    /// Real evaluator with analytic derivative.
    pub fn evaluator(&self) -> TimeDependentMatrix<f64> {
        let (this, this_d) = (self.clone(), self.clone());
        TimeDependentMatrix::new(2, move |t| this.matrix(t)).with_derivative(move |t| {
            let (a, d, off) = this_d.entry_derivatives(t);
            RealMatrix::from_fn(2, |i, j| match (i, j) {
                (0, 0) => a,
                (1, 1) => d,
                _ => off,
            })
        })
    }

    pub fn complex_evaluator(&self) -> TimeDependentMatrix<Complex64> {
        self.evaluator().to_complex()
    }

    /// Level crossings (sign changes of `det H`) on `grid`, refined by bisection.
    pub fn crossings(&self, grid: &[f64]) -> Result<Vec<f64>> {
        find_sign_changes(&|t| self.det(t), grid, CROSSING_RESOLUTION)
    }
}

/// Roots of `f` bracketed by sign changes between consecutive grid points,
/// bisected to `resolution`. A grid point where `f` is exactly zero counts
/// once. Tangential zeros without a sign change are not detected.
pub fn find_sign_changes(
    f: &dyn Fn(f64) -> f64,
    grid: &[f64],
    resolution: f64,
) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let mut roots = Vec::new();
    let mut prev = f(grid[0]);
    if prev == 0.0 {
        roots.push(grid[0]);
    }
    for w in grid.windows(2) {
        let next = f(w[1]);
        if next == 0.0 {
            roots.push(w[1]);
        } else if prev != 0.0 && (prev < 0.0) != (next < 0.0) {
            let (mut lo, mut hi, mut f_lo) = (w[0], w[1], prev);
            while hi - lo > resolution {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (f_lo < 0.0) {
                    lo = mid;
                    f_lo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = next;
    }
    Ok(roots)
}

/// `iħ dU/dt = H(t)U, U(t0) = U0`.
#[derive(Clone, Debug)]
pub struct QuantumProblem {
    h: TimeDependentMatrix<Complex64>,
    hbar: f64,
    u0: ComplexMatrix,
    t0: f64,
    tf: f64,
}

impl QuantumProblem {
    /// Starts from `U0 = I`.
    pub fn new(h: TimeDependentMatrix<Complex64>, hbar: f64, t0: f64, tf: f64) -> Result<Self> {
        let u0 = ComplexMatrix::identity(h.dim());
        Self::with_initial(h, hbar, u0, t0, tf)
    }

    pub fn with_initial(
        h: TimeDependentMatrix<Complex64>,
        hbar: f64,
        u0: ComplexMatrix,
        t0: f64,
        tf: f64,
    ) -> Result<Self> {
        crate::matrix::require_positive("hbar", hbar)?;
        if !(t0 < tf) {
            return Err(invalid("tf", "need t0 < tf"));
        }
        let defect = (&u0.adjoint() * &u0).distance(&ComplexMatrix::identity(u0.dim()));
        if !(defect <= 1e-10) {
            return Err(invalid("u0", format!("not unitary (defect {defect:e})")));
        }
        Ok(Self {
            h,
            hbar,
            u0,
            t0,
            tf,
        })
    }

    pub fn hamiltonian(&self) -> &TimeDependentMatrix<Complex64> {
        &self.h
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn tf(&self) -> f64 {
        self.tf
    }
}

/// Evolution problem with `A(t) = −(i/ħ)·H(t)`, `B = 0`, no feedback, `M0 = U0`.
pub fn schrodinger_problem(q: &QuantumProblem) -> Result<EvolutionProblem<Complex64>> {
    let a = q.h.scaled(Complex64::new(0.0, -1.0 / q.hbar));
    EvolutionProblem::linear(a, q.u0.clone(), q.t0, q.tf)
}

/// `det U(t) = exp(−(i/ħ)∫_{t0}^{t} Tr H)` at every grid point, with the
/// trace integrated by adaptive Simpson.
pub fn exact_det_u(
    h: &TimeDependentMatrix<Complex64>,
    hbar: f64,
    t0: f64,
    grid: &[f64],
) -> Result<Vec<Complex64>> {
    crate::matrix::require_positive("hbar", hbar)?;
    let tr = |t: f64| h.eval(t).trace();
    let lead = adaptive_simpson(&tr, t0, grid[0], DEFAULT_TOL)?;
    let phase = Complex64::new(0.0, -1.0 / hbar);
    Ok(cumulative(&tr, grid, DEFAULT_TOL)?
        .into_iter()
        .map(|integral| (phase * (lead + integral)).exp())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitarityReport {
    /// `max_k ‖U_k* U_k − I‖_F`.
    pub max_unitarity_defect: f64,
    /// `max_k ||det U_k| − 1|`.
    pub max_det_modulus_defect: f64,
    pub tolerance: f64,
    pub passes: bool,
}

pub fn unitarity_check(traj: &Trajectory<Complex64>, tolerance: f64) -> UnitarityReport {
    let max_unitarity_defect = traj.states.iter().map(unitarity_defect).fold(0.0, f64::max);
    let max_det_modulus_defect = traj
        .dets
        .iter()
        .map(|d| (d.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    UnitarityReport {
        max_unitarity_defect,
        max_det_modulus_defect,
        tolerance,
        passes: max_unitarity_defect <= tolerance && max_det_modulus_defect <= tolerance,
    }
}

/// `‖U*U − I‖_F`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    (&u.adjoint() * u).distance(&ComplexMatrix::identity(u.dim()))
}

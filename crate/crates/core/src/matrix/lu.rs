use super::{require_positive, Matrix, Scalar, DEFAULT_SINGULAR_TOL};
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P·M = L·U`, stored packed: the
/// strict lower triangle holds `L` (unit diagonal implied), the upper triangle
/// holds `U`.
#[derive(Debug, Clone)]
pub struct LuFactorization<T: Scalar> {
    lu: Matrix<T>,
    /// `perm[i]` is the source row of row `i` of `P·M`.
    perm: Vec<usize>,
    swaps_odd: bool,
    /// Set when an exactly zero pivot column was met.
    rank_deficient: bool,
}

impl<T: Scalar> LuFactorization<T> {
    pub fn new(m: &Matrix<T>) -> Self {
        let n = m.dim();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps_odd = false;
        let mut rank_deficient = false;

        for k in 0..n {
            let (pivot_row, pivot_mag) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].modulus()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot_mag == 0.0 {
                rank_deficient = true;
                continue;
            }
            if pivot_row != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(k, pivot_row);
                swaps_odd = !swaps_odd;
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == T::zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }

        Self {
            lu,
            perm,
            swaps_odd,
            rank_deficient,
        }
    }

    pub fn det(&self) -> T {
        if self.rank_deficient {
            return T::zero();
        }
        let prod = (0..self.lu.dim())
            .map(|i| self.lu[(i, i)])
            .fold(T::one(), |acc, d| acc * d);
        if self.swaps_odd {
            -prod
        } else {
            prod
        }
    }

    pub fn is_rank_deficient(&self) -> bool {
        self.rank_deficient
    }

    /// Solves `M·X = rhs`. The caller is responsible for ruling out singular `M`.
    pub fn solve(&self, rhs: &Matrix<T>) -> Matrix<T> {
        let n = self.lu.dim();
        assert_eq!(n, rhs.dim(), "dimension mismatch");
        let mut x = Matrix::from_fn(n, |i, j| rhs[(self.perm[i], j)]);
        for col in 0..n {
            // forward substitution with unit-lower L
            for i in 0..n {
                let mut acc = x[(i, col)];
                for k in 0..i {
                    acc -= self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = x[(i, col)];
                for k in (i + 1)..n {
                    acc -= self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = acc / self.lu[(i, i)];
            }
        }
        x
    }
}

/// Determinant by LU with partial pivoting; the sign tracks row swaps exactly.
pub fn det<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    let d = LuFactorization::new(m).det();
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::NonFinite("det"))
    }
}

/// Inverse with the default relative singularity tolerance.
pub fn inverse<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    inverse_with_tol(m, DEFAULT_SINGULAR_TOL)
}

/// Inverse via LU. Fails with [`Error::Singular`] when
/// `|det M| ≤ rel_tol·(‖M‖_F/√n)^n`.
pub fn inverse_with_tol<T: Scalar>(m: &Matrix<T>, rel_tol: f64) -> Result<Matrix<T>> {
    let lu = LuFactorization::new(m);
    let det_abs = lu.det().modulus();
    let threshold = m.singular_threshold(rel_tol);
    if lu.is_rank_deficient() || !(det_abs > threshold) {
        return Err(Error::Singular { det_abs, threshold });
    }
    lu.solve(&Matrix::identity(m.dim())).check_finite("inverse")
}

/// Solves `lhs·X = rhs` for square `rhs`.
pub fn solve<T: Scalar>(lhs: &Matrix<T>, rhs: &Matrix<T>) -> Result<Matrix<T>> {
    if lhs.dim() != rhs.dim() {
        return Err(Error::DimensionMismatch {
            expected: lhs.dim(),
            found: rhs.dim(),
        });
    }
    let lu = LuFactorization::new(lhs);
    if lu.is_rank_deficient() {
        return Err(Error::Singular {
            det_abs: 0.0,
            threshold: 0.0,
        });
    }
    lu.solve(rhs).check_finite("solve")
}

/// Tikhonov-regularized inverse `(M*M + εI)⁻¹M*`, where `*` is the conjugate
/// transpose. Defined for every `M` including singular ones, since
/// `M*M + εI` is Hermitian positive definite for `ε > 0`.
pub fn regularized_inverse<T: Scalar>(m: &Matrix<T>, epsilon: f64) -> Result<Matrix<T>> {
    require_positive("epsilon", epsilon)?;
    let adj = m.adjoint();
    let gram = &adj * m;
    let shifted = gram.add_scaled(T::from_real(epsilon), &Matrix::identity(m.dim()));
    solve(&shifted, &adj)
}

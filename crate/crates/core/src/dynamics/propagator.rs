use super::{check_grid, TimeDependentMatrix};
use crate::error::Result;
use crate::matrix::{matrix_exp, Matrix, Scalar};

/// Ordered product approximation of the time-ordered exponential of `A`:
/// `U_k = exp(A(m_k)·h_k) ⋯ exp(A(m_1)·h_1)` with `m_k` the midpoint of the
/// k-th grid interval. Returns `U_0 = I, U_1, …`, one per grid point. Global
/// error is `O(h²)`.
pub fn time_ordered_propagator<T: Scalar>(
    a: &TimeDependentMatrix<T>,
    grid: &[f64],
) -> Result<Vec<Matrix<T>>> {
    check_grid(grid)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut u = Matrix::identity(a.dim());
    out.push(u.clone());
    for w in grid.windows(2) {
        let h = w[1] - w[0];
        let mid = w[0] + 0.5 * h;
        let step = matrix_exp(&a.try_eval(mid)?.scale_real(h))?;
        u = &step * &u;
        out.push(u.clone());
    }
    Ok(out)
}

//! Adaptive Simpson quadrature over real or complex integrands.

use crate::error::{Error, Result};
use crate::matrix::Scalar;

pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_DEPTH: u32 = 48;

/// `∫_a^b f` by adaptive Simpson with absolute tolerance `tol`. Handles
/// `b < a` by sign flip; `a == b` gives zero.
pub fn adaptive_simpson<T: Scalar>(f: &dyn Fn(f64) -> T, a: f64, b: f64, tol: f64) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    if b < a {
        return adaptive_simpson(f, b, a, tol).map(|v| -v);
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let value =
        refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH).ok_or(Error::Quadrature { a, b })?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Quadrature { a, b })
    }
}

/// Running integral `∫_{grid[0]}^{grid[k]} f` at every grid point.
pub fn cumulative<T: Scalar>(f: &dyn Fn(f64) -> T, grid: &[f64], tol: f64) -> Result<Vec<T>> {
    let mut acc = T::zero();
    let mut out = Vec::with_capacity(grid.len());
    out.push(acc);
    for w in grid.windows(2) {
        acc += adaptive_simpson(f, w[0], w[1], tol)?;
        out.push(acc);
    }
    Ok(out)
}

fn simpson<T: Scalar>(a: f64, b: f64, fa: T, fm: T, fb: T) -> T {
    (fa + fm.scale(4.0) + fb).scale((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn refine<T: Scalar>(
    f: &dyn Fn(f64) -> T,
    a: f64,
    b: f64,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: f64,
    depth: u32,
) -> Option<T> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if !diff.is_finite() {
        return None;
    }
    if diff.modulus() <= 15.0 * tol {
        return Some(left + right + diff.scale(1.0 / 15.0));
    }
    if depth == 0 || m <= a || m >= b {
        return None;
    }
    let l = refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}

use super::{lu::solve, Matrix, Scalar};
use crate::error::{Error, Result};

// Degree-13 diagonal Padé coefficients and the 1-norm bound under which the
// approximant is accurate to unit roundoff in double precision.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring around a [13/13] Padé core.
pub fn matrix_exp<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    if !m.is_finite() {
        return Err(Error::NonFinite("matrix_exp"));
    }
    let n = m.dim();
    let norm = m.norm_one();
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = m.scale_real(0.5f64.powi(squarings));

    let ident = Matrix::<T>::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| T::from_real(PADE13[k]);

    let u_inner = a6.scale(b(13)).add_scaled(b(11), &a4).add_scaled(b(9), &a2);
    let u_poly = (&a6 * &u_inner)
        .add_scaled(b(7), &a6)
        .add_scaled(b(5), &a4)
        .add_scaled(b(3), &a2)
        .add_scaled(b(1), &ident);
    let u = &a * &u_poly;

    let v_inner = a6.scale(b(12)).add_scaled(b(10), &a4).add_scaled(b(8), &a2);
    let v = (&a6 * &v_inner)
        .add_scaled(b(6), &a6)
        .add_scaled(b(4), &a4)
        .add_scaled(b(2), &a2)
        .add_scaled(b(0), &ident);

    let mut r = solve(&(&v - &u), &(&v + &u)).map_err(|_| Error::NonFinite("matrix_exp"))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    r.check_finite("matrix_exp")
}

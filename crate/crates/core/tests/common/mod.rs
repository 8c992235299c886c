//! Reference implementations used as oracles. They share no code with the
//! library: cofactor expansion instead of LU, Taylor series instead of Padé.

#![allow(dead_code)]

use contdyn::RealMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> RealMatrix {
    RealMatrix::from_fn(n, |_, _| scale * (2.0 * rng.gen::<f64>() - 1.0))
}

/// Determinant by cofactor expansion along the first row.
pub fn det_cofactor(m: &RealMatrix) -> f64 {
    let n = m.dim();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)]).collect())
        .collect();
    cofactor(&rows)
}

fn cofactor(a: &[Vec<f64>]) -> f64 {
    match a.len() {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<f64>> = a[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != j)
                            .map(|(_, &x)| x)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * a[0][j] * cofactor(&minor)
            })
            .sum(),
    }
}

/// Product of row norms, which bounds |det| and sets the scale of its
/// rounding error.
pub fn hadamard_bound(m: &RealMatrix) -> f64 {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| m[(i, j)].powi(2)).sum::<f64>().sqrt())
        .product()
}

/// `exp(A)` from a truncated Taylor series after halving `A` until its
/// Frobenius norm is below 1/4.
pub fn expm_taylor(a: &RealMatrix) -> RealMatrix {
    let mut s = 0;
    let mut norm = a.frobenius_norm();
    while norm > 0.25 {
        norm /= 2.0;
        s += 1;
    }
    let x = a.scale(0.5f64.powi(s));
    let n = a.dim();
    let mut sum = RealMatrix::identity(n);
    let mut term = RealMatrix::identity(n);
    for k in 1..30 {
        term = (&term * &x).scale(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn max_abs_diff(a: &RealMatrix, b: &RealMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Least-squares slope of `log err` against `log h`.
pub fn loglog_slope(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

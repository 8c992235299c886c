use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::MatrixSpec;
use crate::dynamics::TimeDependentMatrix;
use crate::error::Result;
use crate::matrix::RealMatrix;
use crate::quantum::{driven_two_level, two_level_hamiltonian, TwoLevelHamiltonian};

/// Builds a real matrix function from a preset. `stream` separates the random
/// draws of different roles (generator, B, initial state) under one seed.
pub fn build_matrix(spec: &MatrixSpec, seed: u64, stream: u64) -> Result<TimeDependentMatrix<f64>> {
    Ok(match spec {
        MatrixSpec::Zero { dim } => TimeDependentMatrix::zero(*dim),
        MatrixSpec::IdentityScaled { dim, scale } => {
            TimeDependentMatrix::constant(RealMatrix::scaled_identity(*dim, *scale))
        }
        MatrixSpec::ConstantInline { rows } => {
            TimeDependentMatrix::constant(RealMatrix::from_rows(rows)?)
        }
        MatrixSpec::DiagonalFn { entries } => {
            let fns: Vec<_> = entries.iter().map(|e| e.to_fn()).collect();
            let dfns = fns.clone();
            TimeDependentMatrix::new(fns.len(), move |t| {
                RealMatrix::from_diagonal(&fns.iter().map(|f| f.eval(t)).collect::<Vec<_>>())
            })
            .with_derivative(move |t| {
                RealMatrix::from_diagonal(&dfns.iter().map(|f| f.derivative(t)).collect::<Vec<_>>())
            })
        }
        MatrixSpec::TwoLevel { .. } | MatrixSpec::DrivenTwoLevel { .. } => build_two_level(spec)?
            .expect("two-level preset")
            .evaluator(),
        MatrixSpec::Random { dim, scale, shift } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let m = RealMatrix::from_fn(*dim, |i, j| {
                let u: f64 = rng.gen::<f64>() * 2.0 - 1.0;
                scale * u + if i == j { *shift } else { 0.0 }
            });
            TimeDependentMatrix::constant(m)
        }
    })
}

/// The Hamiltonian behind a two-level preset; `None` for other presets.
pub fn build_two_level(spec: &MatrixSpec) -> Result<Option<TwoLevelHamiltonian>> {
    match spec {
        MatrixSpec::TwoLevel { e1, e2, delta } => {
            two_level_hamiltonian(e1.to_fn(), e2.to_fn(), *delta).map(Some)
        }
        MatrixSpec::DrivenTwoLevel { epsilon, delta } => {
            driven_two_level(epsilon.to_fn(), delta.to_fn()).map(Some)
        }
        _ => Ok(None),
    }
}

/// Initial state `M(t0)` from a preset; identity when absent.
pub fn build_initial(
    spec: Option<&MatrixSpec>,
    dim: usize,
    t0: f64,
    seed: u64,
) -> Result<RealMatrix> {
    match spec {
        None => Ok(RealMatrix::identity(dim)),
        Some(spec) => build_matrix(spec, seed, 2)?.try_eval(t0),
    }
}

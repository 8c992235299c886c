use super::{check_grid, EvolutionProblem, FeedbackKind, Method, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::matrix::{Matrix, Scalar};

/// Number of consecutive growing deltas that counts as divergence.
const DIVERGENCE_RUN: usize = 3;

/// Final Picard iterate plus the sup-norm change of every iteration.
#[derive(Debug, Clone)]
pub struct PicardSolution<T: Scalar> {
    pub trajectory: Trajectory<T>,
    /// `deltas[k] = sup_j ‖M_{k+1}(t_j) − M_k(t_j)‖_F`.
    pub deltas: Vec<f64>,
}

/// Contraction factor `L·(t_last − t_0)` of the integral map on `grid`, with
/// `L = max_j (‖A(t_j)‖_F + ‖B(t_j)‖_F)`. The map `M ↦ M0 + ∫(AM + MB)` is a
/// contraction in the sup norm when this is below 1; beyond that Picard still
/// converges (superlinearly, like `(L·T)^k/k!`) but deltas may grow first.
pub fn picard_contraction_factor<T: Scalar>(problem: &EvolutionProblem<T>, grid: &[f64]) -> f64 {
    let lipschitz = grid
        .iter()
        .map(|&t| problem.a().eval(t).frobenius_norm() + problem.b().eval(t).frobenius_norm())
        .fold(0.0, f64::max);
    lipschitz * (grid[grid.len() - 1] - grid[0])
}

/// Picard iteration `M_{k+1}(t) = M0 + ∫_{t0}^{t} [A(s)M_k(s) + M_k(s)B(s)] ds`
/// from `M_0(t) ≡ M0`, with trapezoidal quadrature on `grid` (which must start
/// at `t0`).
///
/// Stops early once an iteration changes nothing beyond roundoff. Fails with
/// [`Error::ContractionFailure`] when the delta grows three iterations in a row.
pub fn picard_solve<T: Scalar>(
    problem: &EvolutionProblem<T>,
    n_iterations: usize,
    grid: &[f64],
) -> Result<PicardSolution<T>> {
    if !matches!(problem.feedback(), FeedbackKind::None) {
        return Err(invalid(
            "feedback",
            "Picard iteration covers the linear problem only",
        ));
    }
    if n_iterations == 0 {
        return Err(invalid("n_iterations", "must be at least 1"));
    }
    check_grid(grid)?;
    if grid[0] != problem.t0() {
        return Err(invalid("grid", "must start at t0"));
    }

    let a: Vec<Matrix<T>> = grid
        .iter()
        .map(|&t| problem.a().try_eval(t))
        .collect::<Result<_>>()?;
    let b: Vec<Matrix<T>> = grid
        .iter()
        .map(|&t| problem.b().try_eval(t))
        .collect::<Result<_>>()?;
    let m0 = problem.m0();
    let mut iterate: Vec<Matrix<T>> = vec![m0.clone(); grid.len()];
    let mut deltas = Vec::with_capacity(n_iterations);
    let mut growth_run = 0;

    for iteration in 1..=n_iterations {
        let integrand: Vec<Matrix<T>> = iterate
            .iter()
            .zip(a.iter().zip(&b))
            .map(|(m, (a, b))| &(a * m) + &(m * b))
            .collect();
        let mut next = Vec::with_capacity(grid.len());
        next.push(m0.clone());
        for j in 1..grid.len() {
            let half_h = T::from_real(0.5 * (grid[j] - grid[j - 1]));
            let step = (&integrand[j - 1] + &integrand[j]).scale(half_h);
            let value = &next[j - 1] + &step;
            next.push(value);
        }
        if !next.iter().all(Matrix::is_finite) {
            return Err(Error::NonFinite("picard_solve"));
        }

        let delta = next
            .iter()
            .zip(&iterate)
            .map(|(x, y)| x.distance(y))
            .fold(0.0, f64::max);
        let scale = next.iter().map(Matrix::frobenius_norm).fold(0.0, f64::max);
        if let Some(&prev) = deltas.last() {
            growth_run = if delta > prev { growth_run + 1 } else { 0 };
        }
        deltas.push(delta);
        iterate = next;
        if growth_run >= DIVERGENCE_RUN {
            return Err(Error::ContractionFailure { iteration, delta });
        }
        if delta <= 8.0 * f64::EPSILON * scale {
            break;
        }
    }

    let h = grid[1] - grid[0];
    let trajectory = Trajectory::from_states(grid.to_vec(), iterate, h, Method::Picard)?;
    Ok(PicardSolution { trajectory, deltas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{uniform_grid, TimeDependentMatrix};
    use crate::matrix::RealMatrix;

    #[test]
    fn zero_generators_converge_immediately() {
        let m0 = RealMatrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let p =
            EvolutionProblem::linear(TimeDependentMatrix::zero(2), m0.clone(), 0.0, 1.0).unwrap();
        let sol = picard_solve(&p, 10, &uniform_grid(0.0, 1.0, 20)).unwrap();
        assert_eq!(sol.deltas, vec![0.0]);
        assert!(sol.trajectory.states.iter().all(|s| *s == m0));
    }

    #[test]
    fn rejects_feedback_and_bad_grid() {
        let a = TimeDependentMatrix::<f64>::zero(2);
        let p = EvolutionProblem::new(
            a.clone(),
            a.clone(),
            FeedbackKind::StateScaled { gamma: 1.0 },
            RealMatrix::identity(2),
            0.0,
            1.0,
        )
        .unwrap();
        assert!(picard_solve(&p, 3, &uniform_grid(0.0, 1.0, 4)).is_err());
        let lin = EvolutionProblem::linear(a, RealMatrix::identity(2), 0.0, 1.0).unwrap();
        assert!(picard_solve(&lin, 3, &uniform_grid(0.5, 1.0, 4)).is_err());
        assert!(picard_solve(&lin, 0, &uniform_grid(0.0, 1.0, 4)).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        // L·T = 50·4 = 200: deltas grow like 200^k/k! for many iterations
        let a = TimeDependentMatrix::constant(RealMatrix::scaled_identity(2, 25.0));
        let p = EvolutionProblem::linear(a, RealMatrix::identity(2), 0.0, 4.0).unwrap();
        match picard_solve(&p, 20, &uniform_grid(0.0, 4.0, 400)) {
            Err(Error::ContractionFailure { iteration, .. }) => assert_eq!(iteration, 4),
            other => panic!("expected contraction failure, got {other:?}"),
        }
    }
}

use super::feedback::feedback_eval_with_tol;
use super::{uniform_grid, EvolutionProblem, Method, SingularityEvent, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::matrix::{Matrix, Scalar};

/// Right-hand side `A(t)·M + M·B(t) + f[M]`.
pub fn rhs<T: Scalar>(problem: &EvolutionProblem<T>, t: f64, m: &Matrix<T>) -> Result<Matrix<T>> {
    if m.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: m.dim(),
        });
    }
    let a = problem.a().try_eval(t)?;
    let b = problem.b().try_eval(t)?;
    let mut out = &(&a * m) + &(m * &b);
    if !matches!(problem.feedback(), super::FeedbackKind::None) {
        let f = feedback_eval_with_tol(problem.feedback(), m, problem.singular_tol())?;
        out = &out + &f;
    }
    Ok(out)
}

/// Classical fixed-step RK4 on `n_steps` uniform steps over `[t0, tf]`.
///
/// With inverse-scaled feedback the run halts once `|det M|` drops below the
/// singularity threshold; the partial trajectory is returned with
/// [`Trajectory::event`] set. A non-finite state is an error.
pub fn evolve<T: Scalar>(problem: &EvolutionProblem<T>, n_steps: usize) -> Result<Trajectory<T>> {
    if n_steps == 0 {
        return Err(invalid("n_steps", "must be at least 1"));
    }
    let grid = uniform_grid(problem.t0(), problem.tf(), n_steps);
    let h = (problem.tf() - problem.t0()) / n_steps as f64;
    let watch_singularity = matches!(
        problem.feedback(),
        super::FeedbackKind::InverseScaled { .. }
    );

    let mut states = Vec::with_capacity(grid.len());
    let mut dets = Vec::with_capacity(grid.len());
    let mut event = None;
    let mut m = problem.m0().clone();
    states.push(m.clone());
    dets.push(m.det()?);

    for (k, w) in grid.windows(2).enumerate() {
        let (t, dt) = (w[0], w[1] - w[0]);
        let step = match rk4_step(problem, t, dt, &m) {
            Ok(next) => next,
            Err(Error::Singular { det_abs, threshold }) if watch_singularity => {
                event = Some(SingularityEvent {
                    time: t,
                    det_abs,
                    threshold,
                });
                break;
            }
            Err(e) => return Err(e),
        };
        if !step.is_finite() {
            return Err(Error::NonFinite("evolve"));
        }
        m = step;
        let d = m.det()?;
        states.push(m.clone());
        dets.push(d);
        if watch_singularity {
            let threshold = m.singular_threshold(problem.singular_tol());
            if !(d.modulus() > threshold) {
                event = Some(SingularityEvent {
                    time: grid[k + 1],
                    det_abs: d.modulus(),
                    threshold,
                });
                break;
            }
        }
    }

    let times = grid[..states.len()].to_vec();
    Ok(Trajectory {
        times,
        states,
        dets,
        step_size: h,
        method: Method::Rk4,
        event,
    })
}

fn rk4_step<T: Scalar>(
    problem: &EvolutionProblem<T>,
    t: f64,
    h: f64,
    m: &Matrix<T>,
) -> Result<Matrix<T>> {
    let half = T::from_real(0.5 * h);
    let k1 = rhs(problem, t, m)?;
    let k2 = rhs(problem, t + 0.5 * h, &m.add_scaled(half, &k1))?;
    let k3 = rhs(problem, t + 0.5 * h, &m.add_scaled(half, &k2))?;
    let k4 = rhs(problem, t + h, &m.add_scaled(T::from_real(h), &k3))?;
    let sixth = T::from_real(h / 6.0);
    let third = T::from_real(h / 3.0);
    Ok(m.add_scaled(sixth, &k1)
        .add_scaled(third, &k2)
        .add_scaled(third, &k3)
        .add_scaled(sixth, &k4))
}

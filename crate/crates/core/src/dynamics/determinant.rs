use super::quadrature::{adaptive_simpson, DEFAULT_TOL};
use super::{check_grid, TimeDependentMatrix};
use crate::error::{invalid, Result};
use crate::matrix::Scalar;

/// `|det|` above which the scalar determinant law is declared blown up.
pub const BLOW_UP_GUARD: f64 = 1e12;

/// Finite-time blow-up of `d det/dt = det·(τ + γ·n·det)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUpEvent {
    /// Grid time at which the guard was exceeded.
    pub detected_at: f64,
    /// Last grid time with an accepted value.
    pub last_time: f64,
    pub last_value: f64,
    /// Pole of the frozen-coefficient Bernoulli solution through the last
    /// accepted sample; `detected_at` when that solution has no pole ahead.
    pub time_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct ScalarTrajectory<T: Scalar> {
    pub times: Vec<f64>,
    pub values: Vec<T>,
    pub blow_up: Option<BlowUpEvent>,
}

/// RK4 on `d det/dt = det·(τ(t) + γ·n·det)` over `grid`, where the caller
/// supplies `τ(t) = Tr[A(t) + B(t)]`. `det0 = 0` is a fixed point.
pub fn det_ode_solve<T: Scalar>(
    tau: &dyn Fn(f64) -> T,
    gamma: f64,
    n: usize,
    det0: T,
    grid: &[f64],
) -> Result<ScalarTrajectory<T>> {
    check_grid(grid)?;
    if !det0.is_finite() {
        return Err(invalid("det0", "must be finite"));
    }
    if !gamma.is_finite() {
        return Err(invalid("gamma", "must be finite"));
    }
    let c = T::from_real(gamma * n as f64);
    let field = |t: f64, y: T| y * (tau(t) + c * y);

    let mut values = Vec::with_capacity(grid.len());
    values.push(det0);
    let mut blow_up = None;
    let mut y = det0;
    for w in grid.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let hh = T::from_real(0.5 * h);
        let k1 = field(t, y);
        let k2 = field(t + 0.5 * h, y + hh * k1);
        let k3 = field(t + 0.5 * h, y + hh * k2);
        let k4 = field(t + h, y + T::from_real(h) * k3);
        let next = y + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
        if !next.is_finite() || next.modulus() > BLOW_UP_GUARD {
            blow_up = Some(BlowUpEvent {
                detected_at: w[1],
                last_time: t,
                last_value: y.re(),
                time_estimate: frozen_pole(tau(t), gamma * n as f64, y, t).unwrap_or(w[1]),
            });
            break;
        }
        y = next;
        values.push(y);
    }
    Ok(ScalarTrajectory {
        times: grid[..values.len()].to_vec(),
        values,
        blow_up,
    })
}

/// Pole of `y' = y(τ + c·y)` through `(t, y)` with `τ, c` frozen: the
/// solution is `τ/(−c + (τ/y + c)·e^{−τ(s−t)})`, singular where
/// `e^{τ(s−t)} = 1 + τ/(c·y)`.
fn frozen_pole<T: Scalar>(tau: T, c: f64, y: T, t: f64) -> Option<f64> {
    if T::IS_COMPLEX {
        return None;
    }
    let (tau, y) = (tau.re(), y.re());
    let cy = c * y;
    if !(cy > 0.0) {
        return None;
    }
    let dt = if tau == 0.0 {
        1.0 / cy
    } else {
        let arg = 1.0 + tau / cy;
        if !(arg > 0.0) {
            return None;
        }
        arg.ln() / tau
    };
    (dt > 0.0 && dt.is_finite()).then_some(t + dt)
}

/// `det0·exp(∫_{t0}^{t} τ(s) ds)` with adaptive Simpson at tolerance 1e−10.
pub fn liouville_closed_form<T: Scalar>(
    tau: &dyn Fn(f64) -> T,
    det0: T,
    t0: f64,
    t: f64,
) -> Result<T> {
    let integral = adaptive_simpson(tau, t0, t, DEFAULT_TOL)?;
    Ok(det0 * integral.exp())
}

/// Outcome of checking `|∫_{t0}^{t} Tr[A + B]| < bound` along a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceConditionReport {
    /// `|∫_{t0}^{t_k} Tr[A + B]|` per grid point.
    pub cumulative: Vec<f64>,
    pub max_abs_integral: f64,
    pub max_at: f64,
    pub bound: f64,
    pub passes: bool,
    /// First time the magnitude reaches `bound`, refined by bisection.
    pub first_crossing: Option<f64>,
}

pub fn trace_condition_check<T: Scalar>(
    a: &TimeDependentMatrix<T>,
    b: &TimeDependentMatrix<T>,
    grid: &[f64],
    bound: f64,
) -> Result<TraceConditionReport> {
    check_grid(grid)?;
    let tau = |t: f64| a.eval(t).trace() + b.eval(t).trace();
    let mut running = T::zero();
    let mut cumulative = vec![0.0];
    let mut first_crossing = None;
    for w in grid.windows(2) {
        let start = running;
        running += adaptive_simpson(&tau, w[0], w[1], DEFAULT_TOL)?;
        let mag = running.modulus();
        cumulative.push(mag);
        if first_crossing.is_none() && mag >= bound {
            first_crossing = Some(bisect_crossing(&tau, start, w[0], w[1], bound)?);
        }
    }
    let (max_idx, max_abs) = cumulative
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, 0.0),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
    Ok(TraceConditionReport {
        max_abs_integral: max_abs,
        max_at: grid[max_idx],
        bound,
        passes: first_crossing.is_none(),
        first_crossing,
        cumulative,
    })
}

fn bisect_crossing<T: Scalar>(
    tau: &dyn Fn(f64) -> T,
    start: T,
    lo: f64,
    hi: f64,
    bound: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    if start.modulus() >= bound {
        return Ok(lo);
    }
    let t_start = lo;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let value = start + adaptive_simpson(tau, t_start, mid, DEFAULT_TOL)?;
        if value.modulus() >= bound {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

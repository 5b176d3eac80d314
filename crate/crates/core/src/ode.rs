//! Fixed-step classical Runge–Kutta integration on uniform grids.

use crate::error::{Error, Result};
use crate::path::PathValue;

/// Entry magnitude beyond which an integration is declared to have escaped.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// Uniform grid from `t0` to `t1` whose step is the largest value not
/// exceeding `dt` that divides the interval evenly. The last node is `t1`
/// exactly.
pub fn uniform_grid(t0: f64, t1: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be positive, got {dt}")));
    }
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidArgument(format!("empty interval [{t0}, {t1}]")));
    }
    let steps = ((t1 - t0) / dt - 1e-9).ceil().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let mut times: Vec<f64> = (0..=steps).map(|i| t0 + i as f64 * h).collect();
    times[steps] = t1;
    Ok(times)
}

pub fn rk4_step<T: PathValue>(
    t: f64,
    y: &T,
    h: f64,
    f: &impl Fn(f64, &T) -> Result<T>,
) -> Result<T> {
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &T::axpby(1.0, y, 0.5 * h, &k1))?;
    let k3 = f(t + 0.5 * h, &T::axpby(1.0, y, 0.5 * h, &k2))?;
    let k4 = f(t + h, &T::axpby(1.0, y, h, &k3))?;
    let k23 = T::axpby(1.0, &k2, 1.0, &k3);
    let k14 = T::axpby(1.0, &k1, 1.0, &k4);
    let incr = T::axpby(1.0, &k14, 2.0, &k23);
    Ok(T::axpby(1.0, y, h / 6.0, &incr))
}

/// Nodal values and right-hand-side slopes of an integrated trajectory.
pub struct Integrated<T> {
    pub values: Vec<T>,
    pub slopes: Vec<T>,
}

/// Integrates backward from `terminal` at `times.last()` to `times[0]`.
pub fn integrate_backward<T: PathValue>(
    times: &[f64],
    terminal: T,
    what: &'static str,
    f: impl Fn(f64, &T) -> Result<T>,
) -> Result<Integrated<T>> {
    integrate_backward_substeps(times, terminal, what, 1, f)
}

/// As [`integrate_backward`], taking `substeps` equal RK4 steps between
/// consecutive grid nodes.
pub fn integrate_backward_substeps<T: PathValue>(
    times: &[f64],
    terminal: T,
    what: &'static str,
    substeps: usize,
    f: impl Fn(f64, &T) -> Result<T>,
) -> Result<Integrated<T>> {
    let n = times.len();
    let substeps = substeps.max(1);
    let mut values = vec![terminal.clone(); n];
    for i in (0..n - 1).rev() {
        let h = (times[i] - times[i + 1]) / substeps as f64;
        let mut next = values[i + 1].clone();
        for k in 0..substeps {
            next = rk4_step(times[i + 1] + k as f64 * h, &next, h, &f)?;
        }
        let mag = next.max_abs();
        if !mag.is_finite() || mag > BLOWUP_THRESHOLD {
            return Err(Error::IntegrationBlowup { what, t: times[i] });
        }
        values[i] = next;
    }
    let slopes = times
        .iter()
        .zip(&values)
        .map(|(&t, v)| f(t, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(Integrated { values, slopes })
}

/// Integrates forward from `initial` at `times[0]`.
pub fn integrate_forward<T: PathValue>(
    times: &[f64],
    initial: T,
    what: &'static str,
    f: impl Fn(f64, &T) -> Result<T>,
) -> Result<Vec<T>> {
    let mut values = Vec::with_capacity(times.len());
    values.push(initial);
    for i in 0..times.len() - 1 {
        let h = times[i + 1] - times[i];
        let next = rk4_step(times[i], &values[i], h, &f)?;
        let mag = next.max_abs();
        if !mag.is_finite() || mag > BLOWUP_THRESHOLD {
            return Err(Error::IntegrationBlowup { what, t: times[i + 1] });
        }
        values.push(next);
    }
    Ok(values)
}

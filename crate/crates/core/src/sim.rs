//! Closed-loop simulation, cost evaluation and runtime checks.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::krotov::{ends_at_terminal, s_value, KrotovFunction};
use crate::linalg::{simpson, spectral_abscissa};
use crate::model::LqProblem;
use crate::ode::{rk4_step, uniform_grid, BLOWUP_THRESHOLD};
use crate::path::VectorPath;
use crate::solvers::ControlLaw;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
    /// `½(eᵀQe + uᵀRu)` per node.
    pub running_cost: Vec<f64>,
    pub total_cost: f64,
    /// Bound on the cost beyond the last node for truncated infinite
    /// horizons with a decaying closed loop.
    pub tail_bound: Option<f64>,
}

/// RK4 integration of `ẋ = Ax + B(−Kx + u_ff)` from `x0` up to `t_end`.
pub fn simulate(problem: &LqProblem, law: &ControlLaw, dt: f64, t_end: f64) -> Result<Trajectory> {
    let t0 = problem.horizon().t0();
    problem.horizon().check(t_end)?;
    if !law.covers(t0) || !law.covers(t_end) {
        return Err(Error::GridMismatch(format!("control law does not cover [{t0}, {t_end}]")));
    }
    let times = uniform_grid(t0, t_end, dt)?;
    let rhs = |t: f64, x: &DVector<f64>| -> Result<DVector<f64>> {
        let u = law.input(x, t);
        Ok(problem.a().eval(t)? * x + problem.b().eval(t)? * u)
    };
    let mut states = Vec::with_capacity(times.len());
    states.push(problem.x0().clone());
    for i in 0..times.len() - 1 {
        let next = rk4_step(times[i], &states[i], times[i + 1] - times[i], &rhs)?;
        let norm = next.norm();
        if !norm.is_finite() || norm > BLOWUP_THRESHOLD {
            return Err(Error::Blowup { t: times[i + 1] });
        }
        states.push(next);
    }
    let inputs: Vec<DVector<f64>> = times.iter().zip(&states).map(|(&t, x)| law.input(x, t)).collect();
    let running_cost = times
        .iter()
        .zip(states.iter().zip(&inputs))
        .map(|(&t, (x, u))| problem.running_cost_doubled(x, u, t).map(|c| 0.5 * c))
        .collect::<Result<Vec<_>>>()?;

    let tail_bound = if problem.horizon().is_finite() || !problem.reference().is_zero() {
        None
    } else {
        let a_cl = problem.a().eval(t_end)? - problem.b().eval(t_end)? * law.gain_at(t_end);
        let max_re = spectral_abscissa(&a_cl);
        Some(if max_re < 0.0 {
            running_cost[running_cost.len() - 1] / (2.0 * max_re.abs())
        } else {
            f64::INFINITY
        })
    };
    let mut traj = Trajectory { times, states, inputs, running_cost, total_cost: 0.0, tail_bound };
    traj.total_cost = evaluate_cost(problem, &traj)?;
    Ok(traj)
}

/// Simpson quadrature of the running cost plus `½eᵀFe` when the trajectory
/// ends at the terminal time.
pub fn evaluate_cost(problem: &LqProblem, traj: &Trajectory) -> Result<f64> {
    let n = traj.times.len();
    if n < 3 {
        return Err(Error::GridTooCoarse { nodes: n });
    }
    let integral = simpson(&traj.times, &traj.running_cost)?;
    let t_end = traj.times[n - 1];
    let terminal = if ends_at_terminal(problem, t_end) {
        0.5 * problem.terminal_cost_doubled(&traj.states[n - 1], t_end)?
    } else {
        0.0
    };
    Ok(integral + terminal)
}

/// Root-mean-square of the tracking error `‖z − Cx‖` over `[from, t_end]`.
pub fn rms_tracking_error(problem: &LqProblem, traj: &Trajectory, from: f64) -> Result<f64> {
    let (times, sq): (Vec<f64>, Vec<f64>) = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t >= from - 1e-12)
        .map(|(&t, x)| problem.error(x, t).map(|e| (t, e.norm_squared())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    if times.len() < 3 {
        return Err(Error::GridTooCoarse { nodes: times.len() });
    }
    let span = times[times.len() - 1] - times[0];
    Ok((simpson(&times, &sq)? / span).sqrt())
}

#[derive(Debug, Clone)]
pub struct LyapunovReport {
    /// Largest `|V̇_fd − V̇_pred|` over the nodes.
    pub max_deviation: f64,
    /// Largest `|V̇_pred|`, for scale.
    pub max_rate: f64,
    /// `V(t_{i+1}) < V(t_i)` wherever `V(t_i)` is above rounding level.
    pub strictly_decreasing: bool,
}

/// Compares the finite-difference rate of `V = xᵀ(P+Pᵀ)x` along `traj`
/// against `−xᵀ(2CᵀQC + ½SBR⁻¹BᵀS)x`.
pub fn lyapunov_check(problem: &LqProblem, p: &DMatrix<f64>, traj: &Trajectory) -> Result<LyapunovReport> {
    let n = problem.n();
    if p.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("P must be {n}x{n}")));
    }
    if traj.times.len() < 3 {
        return Err(Error::GridTooCoarse { nodes: traj.times.len() });
    }
    let s = p + p.transpose();
    let v: Vec<DVector<f64>> = traj
        .states
        .iter()
        .map(|x| DVector::from_element(1, x.dot(&(&s * x))))
        .collect();
    let v_path = VectorPath::sampled(traj.times.clone(), v.clone())?;
    let mut max_deviation = 0.0_f64;
    let mut max_rate = 0.0_f64;
    for (i, (&t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        let sys = problem.at(t)?;
        let w = &sys.q_eff * 2.0 + &s * &sys.m * &s * 0.5;
        let predicted = -x.dot(&(w * x));
        let fd = v_path.fd_derivative_at_node(i)[0];
        max_deviation = max_deviation.max((fd - predicted).abs());
        max_rate = max_rate.max(predicted.abs());
    }
    let v0 = v[0][0].abs();
    let strictly_decreasing = v
        .windows(2)
        .all(|w| w[0][0] <= 1e-14 * v0 || w[1][0] < w[0][0]);
    Ok(LyapunovReport { max_deviation, max_rate, strictly_decreasing })
}

#[derive(Debug, Clone)]
pub struct PointwiseReport {
    pub samples: usize,
    /// Samples with `s(x, u*+δ) < s(x, u*) − 1e-9·(1 + |s|)`.
    pub violations: usize,
    pub min_margin: f64,
    /// Largest `|margin − δᵀRδ|`.
    pub max_margin_error: f64,
    /// Largest `‖∂s(x, u*(x), t)/∂x‖` over the sampled nodes.
    pub max_state_gradient: f64,
}

/// Samples random input perturbations around the law's input at random
/// trajectory nodes and checks that `s` is minimized there and locally
/// flat in `x`.
pub fn pointwise_min_check(
    problem: &LqProblem,
    kf: &KrotovFunction,
    law: &ControlLaw,
    traj: &Trajectory,
    n_samples: usize,
    seed: u64,
) -> Result<PointwiseReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = problem.m();
    let nodes = traj.times.len();
    let mut report = PointwiseReport {
        samples: n_samples,
        violations: 0,
        min_margin: f64::INFINITY,
        max_margin_error: 0.0,
        max_state_gradient: 0.0,
    };
    for _ in 0..n_samples {
        let i = rng.random_range(0..nodes);
        let (t, x) = (traj.times[i], &traj.states[i]);
        let u_star = law.input(x, t);
        let scale = 1.0 + u_star.amax();
        let delta = DVector::from_fn(m, |_, _| rng.random_range(-1.0..=1.0) * scale);
        let s_star = s_value(problem, kf, x, &u_star, t)?;
        let s_pert = s_value(problem, kf, x, &(&u_star + &delta), t)?;
        let margin = s_pert - s_star;
        if margin < -1e-9 * (1.0 + s_star.abs()) {
            report.violations += 1;
        }
        report.min_margin = report.min_margin.min(margin);
        let expected = delta.dot(&(problem.r() * &delta));
        report.max_margin_error = report.max_margin_error.max((margin - expected).abs());
        report.max_state_gradient = report.max_state_gradient.max(state_gradient(problem, kf, law, x, t)?.norm());
    }
    Ok(report)
}

/// Central-difference gradient of `x ↦ s(x, u*(x), t)`.
pub fn state_gradient(
    problem: &LqProblem,
    kf: &KrotovFunction,
    law: &ControlLaw,
    x: &DVector<f64>,
    t: f64,
) -> Result<DVector<f64>> {
    let n = x.len();
    let mut grad = DVector::zeros(n);
    for j in 0..n {
        let h = 1e-5 * (1.0 + x[j].abs());
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let sp = s_value(problem, kf, &xp, &law.input(&xp, t), t)?;
        let sm = s_value(problem, kf, &xm, &law.input(&xm, t), t)?;
        grad[j] = (sp - sm) / (2.0 * h);
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Horizon, ProblemData, ProblemKind, TimeMatrix};

    fn integrator(x0: f64) -> LqProblem {
        ProblemData {
            kind: ProblemKind::Regulation,
            a: TimeMatrix::from_rows(1, 1, &[0.0]),
            b: TimeMatrix::from_rows(1, 1, &[1.0]),
            c: None,
            q: DMatrix::from_element(1, 1, 1.0),
            r: DMatrix::from_element(1, 1, 1.0),
            f: None,
            horizon: Horizon::Finite { t0: 0.0, tf: 2.0 },
            x0: DVector::from_element(1, x0),
            reference: None,
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn no_dynamics_keeps_state() {
        let p = integrator(3.0);
        let traj = simulate(&p, &ControlLaw::constant(DMatrix::zeros(1, 1)), 0.1, 2.0).unwrap();
        assert!(traj.states.iter().all(|x| x[0] == 3.0));
        // ½∫ 9 dt over [0, 2]
        assert!((traj.total_cost - 9.0).abs() < 1e-12);
    }

    #[test]
    fn zero_state_costs_nothing() {
        let p = integrator(0.0);
        let traj = simulate(&p, &ControlLaw::constant(DMatrix::from_element(1, 1, 2.0)), 0.1, 2.0).unwrap();
        assert_eq!(traj.total_cost, 0.0);
    }

    #[test]
    fn cost_needs_three_nodes() {
        let p = integrator(1.0);
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![DVector::zeros(1); 2],
            inputs: vec![DVector::zeros(1); 2],
            running_cost: vec![0.0; 2],
            total_cost: 0.0,
            tail_bound: None,
        };
        assert!(matches!(evaluate_cost(&p, &traj), Err(Error::GridTooCoarse { nodes: 2 })));
    }
}

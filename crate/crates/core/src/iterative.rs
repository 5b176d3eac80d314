//! Iterative improvement of an admissible control by quadratic Krotov
//! functions.
//!
//! Each sweep evaluates the current law `u = −K_k x + v_k` exactly: the
//! quadratic function `xᵀP_k x − 2g_kᵀx` with
//!
//! `Ṗ_k + P_k A_cl + A_clᵀP_k + CᵀQC + K_kᵀRK_k = 0`,  `P_k(tf) = CᵀFC`
//! `ġ_k + A_clᵀg_k + CᵀQz − P_k B v_k + K_kᵀR v_k = 0`,  `g_k(tf) = CᵀFz(tf)`
//!
//! (`A_cl = A − BK_k`) is the cost-to-go of that law. Minimizing `s` over
//! `u` then gives `K_{k+1} = R⁻¹Bᵀ sym(P_k)` and `v_{k+1} = R⁻¹Bᵀg_k`,
//! and the cost cannot increase.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::krotov::KrotovFunction;
use crate::linalg::{max_abs, sym_part};
use crate::model::LqProblem;
use crate::ode::{integrate_backward, uniform_grid};
use crate::path::{MatrixPath, VectorPath};
use crate::sim::{simulate, Trajectory};
use crate::solvers::{gain_from_p, ControlLaw};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrotovRunConfig {
    /// Stop once `|J_{k−1} − J_k| < epsilon`.
    pub epsilon: f64,
    pub max_iter: usize,
    pub dt: f64,
}

impl Default for KrotovRunConfig {
    fn default() -> Self {
        KrotovRunConfig { epsilon: 1e-6, max_iter: 50, dt: 1e-3 }
    }
}

impl KrotovRunConfig {
    fn check(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || self.max_iter == 0 || !(self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("invalid run configuration {self:?}")));
        }
        Ok(())
    }
}

/// Starting control of the iteration.
#[derive(Debug, Clone)]
pub enum InitialControl {
    Zero,
    Law(ControlLaw),
    /// Open-loop signal `u₀(t)`, used as a pure feedforward with `K = 0`.
    OpenLoop(VectorPath),
}

impl InitialControl {
    fn into_law(self, problem: &LqProblem) -> ControlLaw {
        let zero = DMatrix::zeros(problem.m(), problem.n());
        match self {
            InitialControl::Zero => ControlLaw::constant(zero),
            InitialControl::Law(law) => law,
            InitialControl::OpenLoop(u) => ControlLaw { gain: MatrixPath::Constant(zero), feedforward: Some(u) },
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub k: usize,
    /// Law of the k-th process.
    pub law: ControlLaw,
    /// Cost `J_k` of the k-th process.
    pub cost: f64,
    /// `J_{k−1} − J_k` (zero for the first record).
    pub delta: f64,
    /// Largest `|K_k − K_{k−1}|` over the grid.
    pub max_gain_change: f64,
    /// Improving function evaluated along the k-th law.
    pub improving: KrotovFunction,
    pub trajectory: Trajectory,
}

/// Policy evaluation: quadratic cost-to-go of `law` on the grid.
pub fn evaluate_law(problem: &LqProblem, law: &ControlLaw, dt: f64) -> Result<KrotovFunction> {
    let tf = problem.horizon().tf().ok_or(Error::InfiniteHorizon)?;
    let times = uniform_grid(problem.horizon().t0(), tf, dt)?;
    let p_rhs = |t: f64, p: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let sys = problem.at(t)?;
        let k = law.gain_at(t);
        let a_cl = &sys.a - &sys.b * &k;
        Ok(-(p * &a_cl + a_cl.transpose() * p + &sys.q_eff + k.transpose() * problem.r() * &k))
    };
    let p_out = integrate_backward(&times, problem.terminal_state_weight(tf)?, "policy evaluation", p_rhs)?;
    let p_path = MatrixPath::sampled_with_slopes(times.clone(), p_out.values, p_out.slopes)?;

    let needs_g = !problem.reference().is_zero() || law.feedforward.is_some();
    let g_path = if needs_g {
        let g_rhs = |t: f64, g: &DVector<f64>| -> Result<DVector<f64>> {
            let sys = problem.at(t)?;
            let k = law.gain_at(t);
            let v = law.feedforward_at(t);
            let a_cl = &sys.a - &sys.b * &k;
            let p = p_path.at(t);
            Ok(&p * (&sys.b * &v) - a_cl.transpose() * g - &sys.cq_z - k.transpose() * (problem.r() * &v))
        };
        let g_out = integrate_backward(&times, problem.terminal_linear_weight(tf)?, "policy evaluation", g_rhs)?;
        Some(VectorPath::sampled_with_slopes(times, g_out.values, g_out.slopes)?)
    } else {
        None
    };
    Ok(KrotovFunction::new(p_path, g_path))
}

/// Law minimizing `s` pointwise in `u` for the given improving function.
pub fn improve_law(problem: &LqProblem, kf: &KrotovFunction) -> Result<ControlLaw> {
    let p_sym = match kf.p_path() {
        MatrixPath::Sampled { times, values, slopes } => {
            let vals = values.iter().map(sym_part).collect();
            match slopes {
                Some(d) => MatrixPath::sampled_with_slopes(times.clone(), vals, d.iter().map(sym_part).collect())?,
                None => MatrixPath::sampled(times.clone(), vals)?,
            }
        }
        MatrixPath::Constant(p) => MatrixPath::Constant(sym_part(p)),
    };
    gain_from_p(problem, &p_sym, kf.g_path())
}

fn gain_change(grid: &[f64], a: &ControlLaw, b: &ControlLaw) -> f64 {
    grid.iter()
        .map(|&t| max_abs(&(a.gain_at(t) - b.gain_at(t))))
        .fold(0.0, f64::max)
}

/// Runs the improvement scheme from `u0` until successive costs differ by
/// less than `cfg.epsilon` or `cfg.max_iter` improvements were made.
pub fn krotov_iterate(
    problem: &LqProblem,
    u0: InitialControl,
    cfg: &KrotovRunConfig,
) -> Result<Vec<IterationRecord>> {
    cfg.check()?;
    let tf = problem.horizon().tf().ok_or(Error::InfiniteHorizon)?;
    let grid = uniform_grid(problem.horizon().t0(), tf, cfg.dt)?;
    let mut law = u0.into_law(problem);
    let mut records: Vec<IterationRecord> = Vec::new();
    for k in 0..=cfg.max_iter {
        let trajectory = simulate(problem, &law, cfg.dt, tf)?;
        let cost = trajectory.total_cost;
        let (delta, max_gain_change) = match records.last() {
            Some(prev) => (prev.cost - cost, gain_change(&grid, &prev.law, &law)),
            None => (0.0, 0.0),
        };
        if let Some(prev) = records.last() {
            if cost > prev.cost + 1e-6 * prev.cost.abs().max(1e-12) {
                return Err(Error::DivergedIterate { k, previous: prev.cost, current: cost });
            }
        }
        let improving = evaluate_law(problem, &law, cfg.dt)?;
        let next = improve_law(problem, &improving)?;
        let done = k > 0 && delta.abs() < cfg.epsilon;
        records.push(IterationRecord { k, law, cost, delta, max_gain_change, improving, trajectory });
        if done {
            break;
        }
        law = next;
    }
    Ok(records)
}

/// Residual of the policy-evaluation equation at `t`, with `Ṗ` from finite
/// differences of the samples of `p`.
pub fn improving_function_residual(
    problem: &LqProblem,
    p: &MatrixPath,
    law: &ControlLaw,
    t: f64,
) -> Result<DMatrix<f64>> {
    problem.horizon().check(t)?;
    let n = problem.n();
    let pt = p.at(t);
    if pt.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("P must be {n}x{n}")));
    }
    let sys = problem.at(t)?;
    let k = law.gain_at(t);
    let a_cl = &sys.a - &sys.b * &k;
    Ok(p.fd_derivative(t) + &pt * &a_cl + a_cl.transpose() * &pt + &sys.q_eff + k.transpose() * problem.r() * &k)
}

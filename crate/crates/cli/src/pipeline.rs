//! Law synthesis and the derived quantities every subcommand shares.

use nalgebra::DMatrix;

use krotov_lq::linalg::spectral_abscissa;
use krotov_lq::ode::uniform_grid;
use krotov_lq::solvers::Selection;
use krotov_lq::tracking::{harmonic_g, steady_state_feedforward, SteadyStateG};
use krotov_lq::{
    gain_from_p, integrate_g, integrate_mdre, select_stabilizing, solve_algebraic, ControlLaw, ExampleId,
    KrotovFunction, LqProblem, MatrixPath, NewtonOptions, ReferenceSignal, SolutionSet, Trajectory, VectorPath,
};

use crate::error::{Context, Result};
use crate::manifest::RunManifest;

/// Longest simulated window on an infinite horizon.
const MAX_SIM_END: f64 = 1000.0;

/// Nodes of the grid on which the steady-state feedforward integral is
/// cross-checked.
const VERIFY_NODES: usize = 200;

#[derive(Debug, Clone)]
pub enum Feedforward {
    /// Backward solution of the g-equation.
    Finite { g: VectorPath, residual: f64 },
    /// Closed-form steady state, sampled on the simulation grid, with the
    /// largest deviation from the truncated integral.
    Steady { closed_form: SteadyStateG, g: VectorPath, quadrature_gap: f64, residual: f64 },
}

impl Feedforward {
    pub fn path(&self) -> &VectorPath {
        match self {
            Feedforward::Finite { g, .. } | Feedforward::Steady { g, .. } => g,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    /// Algebraic solutions and the selected one (infinite horizon).
    pub solutions: Option<(SolutionSet, Selection)>,
    /// Differential solution (finite horizon).
    pub riccati: Option<MatrixPath>,
    pub feedforward: Option<Feedforward>,
    pub function: KrotovFunction,
    pub law: ControlLaw,
    /// End of the simulated window.
    pub t_end: f64,
}

impl Synthesis {
    pub fn constant_p(&self) -> Option<&DMatrix<f64>> {
        self.solutions.as_ref().map(|(_, sel)| &sel.p)
    }
}

pub fn newton_options(manifest: &RunManifest) -> NewtonOptions {
    let mut starts = manifest.starts;
    if manifest.scenario.example() == Some(ExampleId::Ex5) {
        starts = starts.max(500);
    }
    let mut opts = NewtonOptions { n_starts: starts, seed: manifest.seed, ..NewtonOptions::default() };
    if let Some(tol) = manifest.tol {
        opts.residual_tol = tol;
    }
    opts
}

/// Window long enough for the closed loop to settle: `20/σ` for stability
/// margin `σ`, and two periods of a sinusoidal reference.
pub fn infinite_window(problem: &LqProblem, a_cl: &DMatrix<f64>) -> f64 {
    let t0 = problem.horizon().t0();
    let margin = -spectral_abscissa(a_cl);
    let mut span = if margin > 0.0 { 20.0 / margin } else { 10.0 };
    if let ReferenceSignal::Sinusoid { omega, .. } = problem.reference() {
        if *omega != 0.0 {
            span = span.max(4.0 * std::f64::consts::PI / omega.abs());
        }
    }
    // whole nanoseconds keep the window free of rounding noise
    t0 + (span.min(MAX_SIM_END) * 1e9).round() / 1e9
}

pub fn synthesize(problem: &LqProblem, manifest: &RunManifest) -> Result<Synthesis> {
    match problem.horizon().tf() {
        Some(tf) => synthesize_finite(problem, manifest.dt, tf),
        None => synthesize_infinite(problem, manifest),
    }
}

fn synthesize_finite(problem: &LqProblem, dt: f64, tf: f64) -> Result<Synthesis> {
    let riccati = integrate_mdre(problem, dt).op("solvers::integrate_mdre")?;
    let feedforward = if problem.reference().is_zero() {
        None
    } else {
        let sol = integrate_g(problem, &riccati, dt).op("tracking::integrate_g")?;
        Some(Feedforward::Finite { g: sol.g, residual: sol.ode_residual_max })
    };
    let g = feedforward.as_ref().map(Feedforward::path);
    let law = gain_from_p(problem, &riccati, g).op("solvers::gain_from_p")?;
    let function = KrotovFunction::new(riccati.clone(), g.cloned());
    Ok(Synthesis { solutions: None, riccati: Some(riccati), feedforward, function, law, t_end: tf })
}

fn synthesize_infinite(problem: &LqProblem, manifest: &RunManifest) -> Result<Synthesis> {
    let ss = solve_algebraic(problem, &newton_options(manifest)).op("solvers::solve_algebraic")?;
    let sel = select_stabilizing(&ss, problem).op("solvers::select_stabilizing")?;
    let p = sel.p.clone();
    let sys = problem.at(problem.horizon().t0()).op("model::at")?;
    let a_cl = &sys.a - &sys.b * sel.law.gain_at(problem.horizon().t0());
    let t_end = infinite_window(problem, &a_cl);

    let feedforward = if problem.reference().is_zero() {
        None
    } else {
        let closed_form = harmonic_g(problem, &p).op("tracking::harmonic_g")?;
        let grid = uniform_grid(problem.horizon().t0(), t_end, manifest.dt).op("ode::uniform_grid")?;
        let g = closed_form.sample(&grid).op("tracking::harmonic_g")?;
        let verify = uniform_grid(problem.horizon().t0(), t_end, (t_end - problem.horizon().t0()) / VERIFY_NODES as f64)
            .op("ode::uniform_grid")?;
        let check = steady_state_feedforward(problem, &p, &verify, manifest.truncate)
            .op("tracking::steady_state_feedforward")?;
        let quadrature_gap = verify
            .iter()
            .map(|&t| (check.g.at(t) - closed_form.eval(t)).amax())
            .fold(0.0, f64::max);
        let residual = verify
            .iter()
            .map(|&t| {
                krotov_lq::tracking::g_residual(problem, &p, &closed_form.eval(t), &closed_form.derivative(t), t)
                    .map(|r| r.amax())
            })
            .collect::<krotov_lq::Result<Vec<f64>>>()
            .op("tracking::g_residual")?
            .into_iter()
            .fold(0.0, f64::max);
        Some(Feedforward::Steady { closed_form, g, quadrature_gap, residual })
    };
    let g = feedforward.as_ref().map(Feedforward::path);
    let law = gain_from_p(problem, &MatrixPath::Constant(p.clone()), g).op("solvers::gain_from_p")?;
    let function = KrotovFunction::new(MatrixPath::Constant(p), g.cloned());
    Ok(Synthesis { solutions: Some((ss, sel)), riccati: None, feedforward, function, law, t_end })
}

/// Every `stride`-th node (plus the last) so that at most `max_rows`
/// remain.
pub fn thin_indices(len: usize, max_rows: usize) -> Vec<usize> {
    if len <= max_rows || max_rows < 2 {
        return (0..len).collect();
    }
    let stride = (len - 1).div_ceil(max_rows - 1);
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

/// Copy of `traj` restricted to at most `max_rows` nodes; costs are kept.
pub fn thin_trajectory(traj: &Trajectory, max_rows: usize) -> Trajectory {
    let idx = thin_indices(traj.times.len(), max_rows);
    Trajectory {
        times: idx.iter().map(|&i| traj.times[i]).collect(),
        states: idx.iter().map(|&i| traj.states[i].clone()).collect(),
        inputs: idx.iter().map(|&i| traj.inputs[i].clone()).collect(),
        running_cost: idx.iter().map(|&i| traj.running_cost[i]).collect(),
        total_cost: traj.total_cost,
        tail_bound: traj.tail_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_keeps_ends_and_bound() {
        assert_eq!(thin_indices(5, 10), vec![0, 1, 2, 3, 4]);
        let idx = thin_indices(400_001, 20_001);
        assert_eq!(idx.len(), 20_001);
        assert_eq!(idx[0], 0);
        assert_eq!(*idx.last().unwrap(), 400_000);
        let idx = thin_indices(10, 4);
        assert!(idx.len() <= 5);
        assert_eq!(*idx.last().unwrap(), 9);
    }
}

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, asymmetry, max_abs, min_sym_eig, spectral_abscissa};
use crate::ode::rk4_step;
use crate::model::{LqProblem, SystemAt};

use super::are::solve_standard_are;
use super::law::{gain_from_p, ControlLaw};
use super::residual::generalized_at;

#[derive(Debug, Clone)]
pub struct NewtonOptions {
    pub n_starts: usize,
    pub seed: u64,
    /// Acceptance bound on the max-abs residual, relative to `1 + max|P|`.
    pub residual_tol: f64,
    /// Entrywise distance, relative to `1 + max|P|`, under which two
    /// solutions are merged.
    pub dedup_tol: f64,
    pub max_iter: usize,
    /// Add the classical ARE solution as a deterministic start.
    pub seed_with_are: bool,
    /// Add the long-horizon limit of the differential equation, integrated
    /// backward from a zero terminal value, as a deterministic start.
    pub seed_with_flow: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            n_starts: 200,
            seed: 0,
            residual_tol: 1e-8,
            dedup_tol: 1e-6,
            max_iter: 100,
            seed_with_are: true,
            seed_with_flow: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolutionEntry {
    pub p: DMatrix<f64>,
    pub residual_norm: f64,
    pub symmetric: bool,
    pub spd_symmetric_part: bool,
    pub closed_loop_stable: bool,
}

#[derive(Debug, Clone)]
pub struct SolutionSet {
    pub solutions: Vec<SolutionEntry>,
    pub starts_tried: usize,
    pub starts_converged: usize,
}

/// Outcome of [`select_stabilizing`].
#[derive(Debug, Clone)]
pub struct Selection {
    pub index: usize,
    pub p: DMatrix<f64>,
    pub law: ControlLaw,
    /// Indices of every solution with `P+Pᵀ ≻ 0` and a stable closed loop.
    pub qualifiers: Vec<usize>,
}

/// Directional derivative of the generalized residual at `p` along `e`.
fn residual_derivative(sys: &SystemAt, p: &DMatrix<f64>, e: &DMatrix<f64>) -> DMatrix<f64> {
    let m = &sys.m;
    let pt = p.transpose();
    let et = e.transpose();
    e * &sys.a + sys.a.transpose() * e
        - (e * m * p + p * m * e) * 0.5
        - (e * m * &pt + p * m * &et) * 0.25
        - (&et * m * p + &pt * m * e) * 0.25
}

fn jacobian(sys: &SystemAt, p: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p.nrows();
    let mut jac = DMatrix::zeros(n * n, n * n);
    for k in 0..n * n {
        let mut e = DMatrix::zeros(n, n);
        e[k] = 1.0;
        let col = residual_derivative(sys, p, &e);
        jac.column_mut(k).copy_from_slice(col.as_slice());
    }
    jac
}

/// Residuals are accepted relative to `1 + max|P|`: rounding the entries of
/// an exact solution alone leaves a residual proportional to them.
fn residual_scale(p: &DMatrix<f64>) -> f64 {
    1.0 + max_abs(p)
}

fn newton(sys: &SystemAt, start: DMatrix<f64>, max_iter: usize, tol: f64) -> Option<DMatrix<f64>> {
    let n = start.nrows();
    let mut p = start;
    let mut res = generalized_at(sys, &p);
    let mut norm = res.norm();
    let mut polish = 0;
    for _ in 0..max_iter {
        if !norm.is_finite() || max_abs(&p) > 1e10 {
            return None;
        }
        if max_abs(&res) < tol * residual_scale(&p) {
            // a couple of extra steps drive the residual to rounding level
            polish += 1;
            if polish > 2 {
                break;
            }
        }
        let jac = jacobian(sys, &p);
        let rhs = -DVector::from_column_slice(res.as_slice());
        let step = match jac.clone().lu().solve(&rhs) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => jac.svd(true, true).solve(&rhs, 1e-12).ok()?,
        };
        let step = DMatrix::from_column_slice(n, n, step.as_slice());
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &p + &step * t;
            let trial_res = generalized_at(sys, &trial);
            let trial_norm = trial_res.norm();
            if trial_norm < norm || (trial_norm <= norm && polish > 0) {
                p = trial;
                res = trial_res;
                norm = trial_norm;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (max_abs(&res) < tol * residual_scale(&p)).then_some(p)
}

/// Start magnitudes range over this many decades above the base scale, so
/// solutions of poorly controllable pairs stay within reach.
const START_DECADES: f64 = 3.0;

fn start_scale(sys: &SystemAt) -> f64 {
    let m = sys.m.norm().max(1e-12);
    1.0_f64.max(2.0 * sys.a.norm() / m).max(2.0 * (sys.q_eff.norm() / m).sqrt())
}

const FLOW_MAX_STEPS: usize = 200_000;

/// Runs `dP/dτ = PA + AᵀP + CᵀQC − ½PMP − ¼PMPᵀ − ¼PᵀMP` from `P = 0`
/// until the right-hand side is small. The step follows the local
/// closed-loop speed so large solutions are reached without stiffness
/// trouble.
fn flow_start(sys: &SystemAt) -> Option<DMatrix<f64>> {
    let n = sys.a.nrows();
    let rhs = |_t: f64, p: &DMatrix<f64>| Ok(generalized_at(sys, p));
    let a_norm = sys.a.norm();
    let mut p = DMatrix::zeros(n, n);
    for _ in 0..FLOW_MAX_STEPS {
        let speed = a_norm + (&sys.m * &p).norm() + 1.0;
        p = rk4_step(0.0, &p, 0.25 / speed, &rhs).ok()?;
        if !all_finite(&p) || max_abs(&p) > 1e10 {
            return None;
        }
        if max_abs(&generalized_at(sys, &p)) < 1e-6 * (1.0 + max_abs(&p)) {
            break;
        }
    }
    Some(p)
}

fn classify(sys: &SystemAt, p: DMatrix<f64>) -> SolutionEntry {
    let residual_norm = max_abs(&generalized_at(sys, &p));
    let s = &p + p.transpose();
    let a_cl = &sys.a - &sys.m * &s * 0.5;
    SolutionEntry {
        residual_norm,
        symmetric: asymmetry(&p) < 1e-8,
        spd_symmetric_part: min_sym_eig(&s) > 1e-9,
        closed_loop_stable: spectral_abscissa(&a_cl) < 0.0,
        p,
    }
}

/// Enumerates solutions of the generalized algebraic equation
/// `PA + AᵀP + CᵀQC − ½PMP − ¼PMPᵀ − ¼PᵀMP = 0` by multistart Newton.
///
/// Starts are drawn from a seeded generator before the parallel solve and
/// merged in draw order, so the result depends only on `opts`.
pub fn solve_algebraic(problem: &LqProblem, opts: &NewtonOptions) -> Result<SolutionSet> {
    if problem.horizon().is_finite() {
        return Err(Error::FiniteHorizon);
    }
    if !problem.is_time_invariant() {
        return Err(Error::TimeVaryingInfiniteHorizon);
    }
    let n = problem.n();
    let sys = problem.at(problem.horizon().t0())?;
    let mut starts = vec![DMatrix::zeros(n, n)];
    if opts.seed_with_are {
        if let Ok(p) = solve_standard_are(problem) {
            starts.push(p);
        }
    }
    if opts.seed_with_flow {
        starts.extend(flow_start(&sys));
    }
    let s = start_scale(&sys);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for i in 0..opts.n_starts {
        let spread = s * 10f64.powf(rng.random_range(0.0..START_DECADES));
        let w = DMatrix::from_fn(n, n, |_, _| rng.random_range(-spread..=spread));
        // every other start is symmetric positive semidefinite
        starts.push(if i % 2 == 0 { w } else { &w * w.transpose() / spread });
    }

    let converged: Vec<Option<DMatrix<f64>>> = starts
        .into_par_iter()
        .map(|p0| newton(&sys, p0, opts.max_iter, opts.residual_tol))
        .collect();
    let starts_tried = converged.len();
    let starts_converged = converged.iter().filter(|c| c.is_some()).count();

    let mut solutions: Vec<SolutionEntry> = Vec::new();
    for p in converged.into_iter().flatten() {
        if solutions.iter().any(|e| max_abs(&(&e.p - &p)) < opts.dedup_tol * (1.0 + max_abs(&p))) {
            continue;
        }
        let entry = classify(&sys, p);
        if entry.residual_norm < opts.residual_tol * residual_scale(&entry.p) {
            solutions.push(entry);
        }
    }
    if solutions.is_empty() {
        return Err(Error::NoSolutionFound);
    }
    Ok(SolutionSet { solutions, starts_tried, starts_converged })
}

/// Picks the solution whose symmetric part is positive definite and whose
/// closed loop is stable; ties go to the smallest `trace(P+Pᵀ)`.
pub fn select_stabilizing(ss: &SolutionSet, problem: &LqProblem) -> Result<Selection> {
    let qualifiers: Vec<usize> = ss
        .solutions
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            min_sym_eig(&(&e.p + e.p.transpose())) > 1e-9 && e.closed_loop_stable
        })
        .map(|(i, _)| i)
        .collect();
    let trace = |i: &usize| 2.0 * ss.solutions[*i].p.trace();
    let index = *qualifiers
        .iter()
        .min_by(|a, b| trace(a).total_cmp(&trace(b)))
        .ok_or(Error::NoStabilizingSolution)?;
    let p = ss.solutions[index].p.clone();
    let law = gain_from_p(problem, &crate::path::MatrixPath::Constant(p.clone()), None)?;
    Ok(Selection { index, p, law, qualifiers })
}

//! The equivalent problem built from a quadratic Krotov function
//! `q(x, t) = xᵀP(t)x − 2g(t)ᵀx`.
//!
//! All quantities here live on the doubled cost scale: the running
//! function is `s = ∂q/∂t + ∂q/∂x·(Ax + Bu) + eᵀQe + uᵀRu` and the
//! terminal one `s_f = eᵀFe − q`. [`equivalent_cost`] halves the result so
//! it compares directly with [`crate::sim::evaluate_cost`].

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{inverse, min_sym_eig, simpson};
use crate::model::LqProblem;
use crate::path::{MatrixPath, VectorPath};
use crate::sim::Trajectory;
use crate::solvers::{generalized_residual, spd_sqrt};

/// One-sided eigenvalue tolerance of the convexity certificate.
pub const CERTIFICATE_TOL: f64 = 1e-8;

/// Quadratic Krotov function. `P` need not be symmetric; `g` is absent
/// (identically zero) for regulation.
#[derive(Debug, Clone)]
pub struct KrotovFunction {
    p: MatrixPath,
    g: Option<VectorPath>,
}

impl KrotovFunction {
    pub fn new(p: MatrixPath, g: Option<VectorPath>) -> Self {
        KrotovFunction { p, g }
    }

    pub fn constant(p: DMatrix<f64>) -> Self {
        KrotovFunction { p: MatrixPath::Constant(p), g: None }
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(DMatrix::zeros(n, n))
    }

    pub fn p_path(&self) -> &MatrixPath {
        &self.p
    }

    pub fn g_path(&self) -> Option<&VectorPath> {
        self.g.as_ref()
    }

    pub fn n(&self) -> usize {
        match &self.p {
            MatrixPath::Constant(p) => p.nrows(),
            MatrixPath::Sampled { values, .. } => values[0].nrows(),
        }
    }

    pub fn p(&self, t: f64) -> DMatrix<f64> {
        self.p.at(t)
    }

    pub fn p_dot(&self, t: f64) -> DMatrix<f64> {
        self.p.derivative(t)
    }

    pub fn g(&self, t: f64) -> DVector<f64> {
        self.g.as_ref().map_or_else(|| DVector::zeros(self.n()), |g| g.at(t))
    }

    pub fn g_dot(&self, t: f64) -> DVector<f64> {
        self.g.as_ref().map_or_else(|| DVector::zeros(self.n()), |g| g.derivative(t))
    }

    pub fn covers(&self, t: f64) -> bool {
        self.p.covers(t) && self.g.as_ref().is_none_or(|g| g.covers(t))
    }

    pub fn q(&self, x: &DVector<f64>, t: f64) -> f64 {
        x.dot(&(self.p(t) * x)) - 2.0 * self.g(t).dot(x)
    }
}

fn check_time(problem: &LqProblem, kf: &KrotovFunction, t: f64) -> Result<()> {
    problem.horizon().check(t)?;
    if !kf.covers(t) {
        let (t0, tf) = kf.p.span();
        return Err(Error::OutOfHorizon { t, t0, tf });
    }
    Ok(())
}

fn check_dims(problem: &LqProblem, kf: &KrotovFunction, x: &DVector<f64>) -> Result<()> {
    if kf.n() != problem.n() || x.len() != problem.n() {
        return Err(Error::DimensionMismatch(format!(
            "Krotov function of order {} and state of length {} for n = {}",
            kf.n(),
            x.len(),
            problem.n()
        )));
    }
    Ok(())
}

/// Running function `s(x, u, t)` of the equivalent problem.
pub fn s_value(
    problem: &LqProblem,
    kf: &KrotovFunction,
    x: &DVector<f64>,
    u: &DVector<f64>,
    t: f64,
) -> Result<f64> {
    check_time(problem, kf, t)?;
    check_dims(problem, kf, x)?;
    if u.len() != problem.m() {
        return Err(Error::DimensionMismatch(format!("input of length {}", u.len())));
    }
    let sys = problem.at(t)?;
    let p = kf.p(t);
    let g = kf.g(t);
    let dq_dt = x.dot(&(kf.p_dot(t) * x)) - 2.0 * kf.g_dot(t).dot(x);
    let grad = (&p + p.transpose()) * x - &g * 2.0;
    let xdot = &sys.a * x + &sys.b * u;
    Ok(dq_dt + grad.dot(&xdot) + problem.running_cost_doubled(x, u, t)?)
}

/// Terminal function `s_f(x_f) = eᵀFe − q(x_f, t_f)`.
pub fn s_terminal_value(problem: &LqProblem, kf: &KrotovFunction, xf: &DVector<f64>) -> Result<f64> {
    let tf = problem.horizon().tf().ok_or(Error::InfiniteHorizon)?;
    check_time(problem, kf, tf)?;
    check_dims(problem, kf, xf)?;
    Ok(problem.terminal_cost_doubled(xf, tf)? - kf.q(xf, tf))
}

/// Algebraic split of `s` into a quadratic residual, a linear term, a
/// completed square in `u` and an offset:
///
/// `s = xᵀ M x − 2 aᵀx + ‖R̃u + ½R̃⁻¹Bᵀ(P+Pᵀ)x − R̃⁻¹Bᵀg‖² + c`
#[derive(Debug, Clone)]
pub struct SDecomposition {
    /// Quadratic residual `M` (the generalized Riccati expression).
    pub m_resid: DMatrix<f64>,
    /// `ġ + Aᵀg + CᵀQz − ½(P+Pᵀ)BR⁻¹Bᵀg`
    pub affine_coeff: DVector<f64>,
    /// `R̃`, the SPD square root of R.
    pub r_sqrt: DMatrix<f64>,
    /// `½R̃⁻¹Bᵀ(P+Pᵀ)`
    pub state_gain: DMatrix<f64>,
    /// `R̃⁻¹Bᵀg`
    pub bias: DVector<f64>,
    /// `zᵀQz − gᵀBR⁻¹Bᵀg`
    pub offset: f64,
}

impl SDecomposition {
    pub fn completed_square_shift(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.r_sqrt * u + &self.state_gain * x - &self.bias
    }

    /// `s` reassembled from the parts.
    pub fn eval(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        x.dot(&(&self.m_resid * x)) - 2.0 * self.affine_coeff.dot(x)
            + self.completed_square_shift(x, u).norm_squared()
            + self.offset
    }
}

pub fn decompose_s(problem: &LqProblem, kf: &KrotovFunction, t: f64) -> Result<SDecomposition> {
    check_time(problem, kf, t)?;
    if kf.n() != problem.n() {
        return Err(Error::DimensionMismatch("Krotov function order".into()));
    }
    let sys = problem.at(t)?;
    let p = kf.p(t);
    let g = kf.g(t);
    let s = &p + p.transpose();
    let m_resid = generalized_residual(problem, &p, Some(&kf.p_dot(t)), t)?;
    let affine_coeff = kf.g_dot(t) + sys.a.transpose() * &g + &sys.cq_z - &s * (&sys.m * &g) * 0.5;
    let r_sqrt = spd_sqrt(problem.r())?;
    let r_sqrt_inv = inverse(&r_sqrt, "R̃")?;
    let state_gain = &r_sqrt_inv * sys.b.transpose() * &s * 0.5;
    let bias = &r_sqrt_inv * (sys.b.transpose() * &g);
    let offset = sys.z.dot(&(problem.q() * &sys.z)) - g.dot(&(&sys.m * &g));
    Ok(SDecomposition { m_resid, affine_coeff, r_sqrt, state_gain, bias, offset })
}

/// Whether the trajectory ends on the terminal time of a finite horizon.
pub(crate) fn ends_at_terminal(problem: &LqProblem, t_end: f64) -> bool {
    problem
        .horizon()
        .tf()
        .is_some_and(|tf| (t_end - tf).abs() <= 1e-9 * (1.0 + tf.abs()))
}

/// `J_eq = ½[s_f(x(t_end)) + q(x(t_start), t_start) + ∫ s dt]` over the
/// trajectory window. When the window stops short of a terminal time (or
/// the horizon is infinite) the terminal weight is absent and `s_f = −q`.
pub fn equivalent_cost(problem: &LqProblem, kf: &KrotovFunction, traj: &Trajectory) -> Result<f64> {
    let times = &traj.times;
    if times.len() < 3 {
        return Err(Error::GridTooCoarse { nodes: times.len() });
    }
    let (start, end) = (times[0], times[times.len() - 1]);
    if !kf.covers(start) || !kf.covers(end) {
        return Err(Error::GridMismatch(format!(
            "Krotov function does not cover the trajectory window [{start}, {end}]"
        )));
    }
    if !problem.horizon().contains(start) || !problem.horizon().contains(end) {
        return Err(Error::GridMismatch("trajectory leaves the problem horizon".into()));
    }
    let s_vals = times
        .iter()
        .zip(traj.states.iter().zip(&traj.inputs))
        .map(|(&t, (x, u))| s_value(problem, kf, x, u, t))
        .collect::<Result<Vec<_>>>()?;
    let integral = simpson(times, &s_vals)?;
    let x_end = &traj.states[times.len() - 1];
    let terminal = if ends_at_terminal(problem, end) {
        problem.terminal_cost_doubled(x_end, end)? - kf.q(x_end, end)
    } else {
        -kf.q(x_end, end)
    };
    Ok(0.5 * (terminal + kf.q(&traj.states[0], start) + integral))
}

#[derive(Debug, Clone)]
pub struct ConvexityCertificate {
    pub certified: bool,
    pub min_eig_over_grid: f64,
    /// Smallest eigenvalue of `CᵀFC − P(tf)`; `+∞` for infinite horizons,
    /// which carry no terminal condition.
    pub terminal_min_eig: f64,
    pub failure_time: Option<f64>,
    /// `(t, smallest eigenvalue of sym(M_resid(t)))` per grid node.
    pub samples: Vec<(f64, f64)>,
}

pub fn convexity_certificate(
    problem: &LqProblem,
    kf: &KrotovFunction,
    grid: &[f64],
) -> Result<ConvexityCertificate> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty certificate grid".into()));
    }
    let samples = grid
        .par_iter()
        .map(|&t| {
            check_time(problem, kf, t)?;
            let m = generalized_residual(problem, &kf.p(t), Some(&kf.p_dot(t)), t)?;
            Ok((t, min_sym_eig(&m)))
        })
        .collect::<Result<Vec<_>>>()?;
    let min_eig_over_grid = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let failure_time = samples.iter().find(|s| s.1 < -CERTIFICATE_TOL).map(|s| s.0);
    let terminal_min_eig = match problem.horizon().tf() {
        Some(tf) => {
            check_time(problem, kf, tf)?;
            min_sym_eig(&(problem.terminal_state_weight(tf)? - kf.p(tf)))
        }
        None => f64::INFINITY,
    };
    let certified = min_eig_over_grid >= -CERTIFICATE_TOL && terminal_min_eig >= -CERTIFICATE_TOL;
    Ok(ConvexityCertificate {
        certified,
        min_eig_over_grid,
        terminal_min_eig,
        failure_time,
        samples,
    })
}

/// Bisection for the largest parameter in `(lo, hi]` whose Krotov function
/// certifies, given that `lo` certifies and `hi` does not.
pub fn largest_certified(
    problem: &LqProblem,
    grid: &[f64],
    lo: f64,
    hi: f64,
    tol: f64,
    family: impl Fn(f64) -> KrotovFunction,
) -> Result<f64> {
    let ok = |v: f64| convexity_certificate(problem, &family(v), grid).map(|c| c.certified);
    if !(tol > 0.0) || !(hi > lo) {
        return Err(Error::InvalidArgument("bisection needs lo < hi and tol > 0".into()));
    }
    if !ok(lo)? {
        return Err(Error::InvalidArgument(format!("lower end {lo} does not certify")));
    }
    if ok(hi)? {
        return Ok(hi);
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

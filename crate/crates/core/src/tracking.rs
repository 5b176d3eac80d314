//! Feedforward synthesis for tracking.
//!
//! The linear coefficient `g` of the Krotov function obeys
//! `ġ + Aᵀg + CᵀQz − ½(P+Pᵀ)BR⁻¹Bᵀg = 0` with `g(tf) = CᵀF z(tf)`. On an
//! infinite horizon with constant `P` the bounded solution is
//!
//! `g(t) = ∫ₜ^∞ exp(A_clᵀ(τ−t)) CᵀQ z(τ) dτ`,  `A_cl = A − ½BR⁻¹Bᵀ(P+Pᵀ)`,
//!
//! taken with a positive sign so that `u = −Kx + R⁻¹Bᵀg` drives `Cx`
//! toward `z`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_vec, simpson, spectral_abscissa};
use crate::model::{LqProblem, ReferenceSignal};
use crate::ode::{integrate_backward_substeps, uniform_grid};
use crate::path::{MatrixPath, VectorPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedforwardMethod {
    BackwardOde,
    TruncatedIntegral,
    ClosedFormSinusoid,
    HarmonicBalance,
}

#[derive(Debug, Clone)]
pub struct FeedforwardSolution {
    pub g: VectorPath,
    pub method: FeedforwardMethod,
    /// Largest g-equation residual over the grid, with `ġ` from finite
    /// differences of the samples.
    pub ode_residual_max: f64,
}

/// `ġ + Aᵀg + CᵀQz − ½(P+Pᵀ)BR⁻¹Bᵀg` at one instant.
pub fn g_residual(
    problem: &LqProblem,
    p: &DMatrix<f64>,
    g: &DVector<f64>,
    g_dot: &DVector<f64>,
    t: f64,
) -> Result<DVector<f64>> {
    let sys = problem.at(t)?;
    let s = p + p.transpose();
    Ok(g_dot + sys.a.transpose() * g + &sys.cq_z - s * (&sys.m * g) * 0.5)
}

fn sampled_residual(problem: &LqProblem, p: &MatrixPath, g: &VectorPath) -> Result<f64> {
    let (times, values) = match g {
        VectorPath::Constant(v) => {
            let t = problem.horizon().t0();
            return Ok(max_abs_vec(&g_residual(problem, &p.at(t), v, &DVector::zeros(v.len()), t)?));
        }
        VectorPath::Sampled { times, values, .. } => (times, values),
    };
    if times.len() < 3 {
        return Err(Error::GridTooCoarse { nodes: times.len() });
    }
    let worst = (0..times.len())
        .into_par_iter()
        .map(|i| {
            let r = g_residual(problem, &p.at(times[i]), &values[i], &g.fd_derivative_at_node(i), times[i])?;
            Ok(max_abs_vec(&r))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

/// RK4 steps per grid interval for the g-equation.
const G_SUBSTEPS: usize = 4;

/// Backward RK4 solution of the g-equation on the finite horizon, with `P`
/// read from `p` (which must cover the horizon).
pub fn integrate_g(problem: &LqProblem, p: &MatrixPath, dt: f64) -> Result<FeedforwardSolution> {
    let tf = problem.horizon().tf().ok_or(Error::InfiniteHorizon)?;
    let t0 = problem.horizon().t0();
    if !p.covers(t0) || !p.covers(tf) {
        let (a, b) = p.span();
        return Err(Error::GridMismatch(format!("P covers [{a}, {b}], horizon is [{t0}, {tf}]")));
    }
    let times = uniform_grid(t0, tf, dt)?;
    let terminal = problem.terminal_linear_weight(tf)?;
    let rhs = |t: f64, g: &DVector<f64>| -> Result<DVector<f64>> {
        let sys = problem.at(t)?;
        let pt = p.at(t);
        let s = &pt + pt.transpose();
        Ok(s * (&sys.m * g) * 0.5 - sys.a.transpose() * g - &sys.cq_z)
    };
    let out = integrate_backward_substeps(&times, terminal, "g-equation", G_SUBSTEPS, rhs)?;
    let g = VectorPath::sampled_with_slopes(times, out.values, out.slopes)?;
    let ode_residual_max = sampled_residual(problem, p, &g)?;
    Ok(FeedforwardSolution { g, method: FeedforwardMethod::BackwardOde, ode_residual_max })
}

fn closed_loop(problem: &LqProblem, p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !problem.is_time_invariant() {
        return Err(Error::InvalidArgument("steady-state feedforward needs a time-invariant problem".into()));
    }
    let n = problem.n();
    if p.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("P must be {n}x{n}")));
    }
    let sys = problem.at(problem.horizon().t0())?;
    let a_cl = &sys.a - &sys.m * (p + p.transpose()) * 0.5;
    let max_re = spectral_abscissa(&a_cl);
    if !(max_re < 0.0) {
        return Err(Error::NotHurwitz { max_re });
    }
    Ok(a_cl)
}

fn frequency(reference: &ReferenceSignal) -> f64 {
    match reference {
        ReferenceSignal::Sinusoid { omega, .. } => omega.abs(),
        _ => 0.0,
    }
}

/// Truncation length for the steady-state integral: the smallest
/// `T = 23/σ · 2^k` with `‖exp(A_clᵀT)‖ < 1e-10`, `σ` the stability margin.
pub fn truncation_horizon(a_cl: &DMatrix<f64>) -> Result<f64> {
    let max_re = spectral_abscissa(a_cl);
    if !(max_re < 0.0) {
        return Err(Error::NotHurwitz { max_re });
    }
    let mut t = 23.0 / (-max_re);
    for _ in 0..20 {
        if (a_cl.transpose() * t).exp().norm() < 1e-10 {
            return Ok(t);
        }
        t *= 2.0;
    }
    Err(Error::NotHurwitz { max_re })
}

/// Steady-state `g(t)` by composite Simpson over `[t, t + T]`; `T` is
/// chosen automatically unless `truncation` is given.
pub fn steady_state_g(
    problem: &LqProblem,
    p: &DMatrix<f64>,
    t: f64,
    truncation: Option<f64>,
) -> Result<DVector<f64>> {
    let a_cl = closed_loop(problem, p)?;
    let horizon = match truncation {
        Some(v) if v > 0.0 && v.is_finite() => v,
        Some(v) => return Err(Error::InvalidArgument(format!("truncation must be positive, got {v}"))),
        None => truncation_horizon(&a_cl)?,
    };
    let n = problem.n();
    if problem.reference().is_zero() {
        return Ok(DVector::zeros(n));
    }
    let fastest = a_cl
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    let rate = fastest.max(frequency(problem.reference())).max(1.0 / horizon);
    let mut steps = (horizon * rate / 0.01).ceil() as usize;
    steps += steps % 2;
    steps = steps.max(2);
    let h = horizon / steps as f64;
    let step_prop = (a_cl.transpose() * h).exp();
    let c = problem.c().base();
    let cq = c.transpose() * problem.q();

    let mut prop = DMatrix::<f64>::identity(n, n);
    let mut samples: Vec<DVector<f64>> = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let tau = t + k as f64 * h;
        samples.push(&prop * (&cq * problem.reference().eval(tau)));
        prop = &step_prop * prop;
    }
    let nodes: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
    let mut g = DVector::zeros(n);
    for i in 0..n {
        let col: Vec<f64> = samples.iter().map(|v| v[i]).collect();
        g[i] = simpson(&nodes, &col)?;
    }
    Ok(g)
}

/// [`steady_state_g`] sampled on `grid`, with its residual.
pub fn steady_state_feedforward(
    problem: &LqProblem,
    p: &DMatrix<f64>,
    grid: &[f64],
    truncation: Option<f64>,
) -> Result<FeedforwardSolution> {
    let values = grid
        .par_iter()
        .map(|&t| steady_state_g(problem, p, t, truncation))
        .collect::<Result<Vec<_>>>()?;
    let g = VectorPath::sampled(grid.to_vec(), values)?;
    let ode_residual_max = sampled_residual(problem, &MatrixPath::Constant(p.clone()), &g)?;
    Ok(FeedforwardSolution { g, method: FeedforwardMethod::TruncatedIntegral, ode_residual_max })
}

/// Closed-form steady-state `g` for references whose forced response stays
/// in a finite-dimensional family.
#[derive(Debug, Clone, PartialEq)]
pub enum SteadyStateG {
    /// `g = sin_coeff · sin ωt + cos_coeff · cos ωt`; `ω = 0` covers constants.
    Harmonic { sin_coeff: DVector<f64>, cos_coeff: DVector<f64>, omega: f64 },
    /// `g = offset + slope · t`
    Affine { offset: DVector<f64>, slope: DVector<f64> },
}

impl SteadyStateG {
    pub fn eval(&self, t: f64) -> DVector<f64> {
        match self {
            SteadyStateG::Harmonic { sin_coeff, cos_coeff, omega } => {
                sin_coeff * (omega * t).sin() + cos_coeff * (omega * t).cos()
            }
            SteadyStateG::Affine { offset, slope } => offset + slope * t,
        }
    }

    pub fn derivative(&self, t: f64) -> DVector<f64> {
        match self {
            SteadyStateG::Harmonic { sin_coeff, cos_coeff, omega } => {
                (sin_coeff * (omega * t).cos() - cos_coeff * (omega * t).sin()) * *omega
            }
            SteadyStateG::Affine { slope, .. } => slope.clone(),
        }
    }

    pub fn sample(&self, grid: &[f64]) -> Result<VectorPath> {
        let values = grid.iter().map(|&t| self.eval(t)).collect();
        let slopes = grid.iter().map(|&t| self.derivative(t)).collect();
        VectorPath::sampled_with_slopes(grid.to_vec(), values, slopes)
    }
}

/// Steady-state `g` by balancing coefficients of the forced response.
pub fn harmonic_g(problem: &LqProblem, p: &DMatrix<f64>) -> Result<SteadyStateG> {
    let a_cl = closed_loop(problem, p)?;
    let n = problem.n();
    let act = a_cl.transpose();
    let cq = problem.c().base().transpose() * problem.q();
    let solve = |m: &DMatrix<f64>, rhs: &DVector<f64>| {
        m.clone().lu().solve(rhs).ok_or(Error::Singular("harmonic balance"))
    };
    Ok(match problem.reference() {
        ReferenceSignal::Zero { .. } => SteadyStateG::Harmonic {
            sin_coeff: DVector::zeros(n),
            cos_coeff: DVector::zeros(n),
            omega: 0.0,
        },
        ReferenceSignal::Constant(z) => SteadyStateG::Harmonic {
            sin_coeff: DVector::zeros(n),
            cos_coeff: solve(&act, &-(&cq * z))?,
            omega: 0.0,
        },
        ReferenceSignal::Ramp { slope } => {
            let g1 = solve(&act, &-(&cq * slope))?;
            let g0 = solve(&act, &-&g1)?;
            SteadyStateG::Affine { offset: g0, slope: g1 }
        }
        ReferenceSignal::Sinusoid { amplitude, omega } => {
            let w = &cq * amplitude;
            let mut block = DMatrix::zeros(2 * n, 2 * n);
            block.view_mut((0, 0), (n, n)).copy_from(&act);
            block.view_mut((n, n), (n, n)).copy_from(&act);
            for i in 0..n {
                block[(i, n + i)] = -omega;
                block[(n + i, i)] = *omega;
            }
            let mut rhs = DVector::zeros(2 * n);
            rhs.rows_mut(0, n).copy_from(&-w);
            let sol = solve(&block, &rhs)?;
            SteadyStateG::Harmonic {
                sin_coeff: sol.rows(0, n).into_owned(),
                cos_coeff: sol.rows(n, n).into_owned(),
                omega: *omega,
            }
        }
    })
}

/// Scalar tracking data: `ẋ = ax + bu`, `y = cx`, weights `m` (output) and
/// `n` (input), reference `α sin ωt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarTrackingData {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub m: f64,
    pub n: f64,
    pub alpha: f64,
    pub omega: f64,
}

impl ScalarTrackingData {
    pub fn from_problem(problem: &LqProblem) -> Result<Self> {
        if problem.n() != 1 || problem.m() != 1 || problem.p() != 1 || !problem.is_time_invariant() {
            return Err(Error::InvalidArgument("expected a scalar time-invariant problem".into()));
        }
        let (alpha, omega) = match problem.reference() {
            ReferenceSignal::Sinusoid { amplitude, omega } => (amplitude[0], *omega),
            ReferenceSignal::Zero { .. } => (0.0, 0.0),
            _ => return Err(Error::InvalidArgument("expected a sinusoidal reference".into())),
        };
        Ok(ScalarTrackingData {
            a: problem.a().base()[(0, 0)],
            b: problem.b().base()[(0, 0)],
            c: problem.c().base()[(0, 0)],
            m: problem.q()[(0, 0)],
            n: problem.r()[(0, 0)],
            alpha,
            omega,
        })
    }
}

/// Coefficients `(sin, cos)` of the steady-state `g` for the scalar
/// sinusoid case: with `β = αcmn / ((na − b²p)² + n²ω²)`,
/// `g = −β(an − pb²) sin ωt + βnω cos ωt`.
pub fn sinusoid_feedforward_closed_form(d: &ScalarTrackingData, p: f64) -> Result<(f64, f64)> {
    let exponent = d.a - p * d.b * d.b / d.n;
    if !(exponent < 0.0) {
        return Err(Error::UnstableExponent { exponent });
    }
    let k = d.n * d.a - d.b * d.b * p;
    let beta = d.alpha * d.c * d.m * d.n / (k * k + d.n * d.n * d.omega * d.omega);
    Ok((-beta * k, beta * d.n * d.omega))
}

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::max_abs;
use crate::model::LqProblem;
use crate::ode::{integrate_backward, uniform_grid};
use crate::path::MatrixPath;

use super::residual::{generalized_at, standard_at};

/// Which quadratic term the differential equation carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiccatiForm {
    /// `½PMP + ¼PMPᵀ + ¼PᵀMP`
    Generalized,
    /// `PMP`
    Standard,
}

fn integrate(problem: &LqProblem, dt: f64, form: RiccatiForm) -> Result<MatrixPath> {
    let tf = problem.horizon().tf().ok_or(Error::InfiniteHorizon)?;
    let times = uniform_grid(problem.horizon().t0(), tf, dt)?;
    let terminal = problem.terminal_state_weight(tf)?;
    let rhs = |t: f64, p: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let sys = problem.at(t)?;
        Ok(match form {
            RiccatiForm::Generalized => -generalized_at(&sys, p),
            RiccatiForm::Standard => -standard_at(&sys, p),
        })
    };
    let what = match form {
        RiccatiForm::Generalized => "generalized Riccati equation",
        RiccatiForm::Standard => "Riccati equation",
    };
    let out = integrate_backward(&times, terminal, what, rhs)?;
    MatrixPath::sampled_with_slopes(times, out.values, out.slopes)
}

/// Backward RK4 solution of the generalized matrix differential equation
/// with `P(tf) = CᵀFC`.
pub fn integrate_mdre(problem: &LqProblem, dt: f64) -> Result<MatrixPath> {
    integrate(problem, dt, RiccatiForm::Generalized)
}

/// Backward RK4 solution of the classical differential Riccati equation.
pub fn integrate_standard_mdre(problem: &LqProblem, dt: f64) -> Result<MatrixPath> {
    integrate(problem, dt, RiccatiForm::Standard)
}

/// Largest residual entry over the nodes of `path`, with `Ṗ` estimated by
/// finite differences of the samples alone.
pub fn riccati_fd_residual(problem: &LqProblem, path: &MatrixPath, form: RiccatiForm) -> Result<f64> {
    let (times, values) = match path {
        MatrixPath::Constant(p) => {
            let t = problem.horizon().t0();
            let sys = problem.at(t)?;
            let r = match form {
                RiccatiForm::Generalized => generalized_at(&sys, p),
                RiccatiForm::Standard => standard_at(&sys, p),
            };
            return Ok(max_abs(&r));
        }
        MatrixPath::Sampled { times, values, .. } => (times, values),
    };
    let mut worst = 0.0_f64;
    for (i, (&t, p)) in times.iter().zip(values).enumerate() {
        let sys = problem.at(t)?;
        let r = match form {
            RiccatiForm::Generalized => generalized_at(&sys, p),
            RiccatiForm::Standard => standard_at(&sys, p),
        } + path.fd_derivative_at_node(i);
        worst = worst.max(max_abs(&r));
    }
    Ok(worst)
}

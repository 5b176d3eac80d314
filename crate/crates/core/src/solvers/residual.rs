use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{LqProblem, SystemAt};

fn check(problem: &LqProblem, p: &DMatrix<f64>, pdot: Option<&DMatrix<f64>>) -> Result<()> {
    let n = problem.n();
    if p.shape() != (n, n) || pdot.is_some_and(|d| d.shape() != (n, n)) {
        return Err(Error::DimensionMismatch(format!("P must be {n}x{n}")));
    }
    Ok(())
}

pub(crate) fn generalized_at(sys: &SystemAt, p: &DMatrix<f64>) -> DMatrix<f64> {
    let pm = p * &sys.m;
    let pt = p.transpose();
    p * &sys.a + sys.a.transpose() * p + &sys.q_eff
        - &pm * p * 0.5
        - &pm * &pt * 0.25
        - &pt * &sys.m * p * 0.25
}

pub(crate) fn standard_at(sys: &SystemAt, p: &DMatrix<f64>) -> DMatrix<f64> {
    p * &sys.a + sys.a.transpose() * p + &sys.q_eff - p * &sys.m * p
}

/// `Ṗ + PA + AᵀP + CᵀQC − ½PMP − ¼PMPᵀ − ¼PᵀMP` with `M = BR⁻¹Bᵀ`;
/// `pdot = None` gives the algebraic form.
pub fn generalized_residual(
    problem: &LqProblem,
    p: &DMatrix<f64>,
    pdot: Option<&DMatrix<f64>>,
    t: f64,
) -> Result<DMatrix<f64>> {
    check(problem, p, pdot)?;
    let r = generalized_at(&problem.at(t)?, p);
    Ok(match pdot {
        Some(d) => r + d,
        None => r,
    })
}

/// Classical Riccati residual `Ṗ + PA + AᵀP + CᵀQC − PMP`.
pub fn standard_residual(
    problem: &LqProblem,
    p: &DMatrix<f64>,
    pdot: Option<&DMatrix<f64>>,
    t: f64,
) -> Result<DMatrix<f64>> {
    check(problem, p, pdot)?;
    let r = standard_at(&problem.at(t)?, p);
    Ok(match pdot {
        Some(d) => r + d,
        None => r,
    })
}

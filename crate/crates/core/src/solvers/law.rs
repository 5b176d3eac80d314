use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::all_finite;
use crate::model::LqProblem;
use crate::path::{MatrixPath, VectorPath};

/// State feedback `u(x, t) = −K(t)x + u_ff(t)`.
#[derive(Debug, Clone)]
pub struct ControlLaw {
    pub gain: MatrixPath,
    /// Absent for regulation.
    pub feedforward: Option<VectorPath>,
}

impl ControlLaw {
    pub fn constant(gain: DMatrix<f64>) -> Self {
        ControlLaw { gain: MatrixPath::Constant(gain), feedforward: None }
    }

    pub fn gain_at(&self, t: f64) -> DMatrix<f64> {
        self.gain.at(t)
    }

    pub fn feedforward_at(&self, t: f64) -> DVector<f64> {
        match &self.feedforward {
            Some(v) => v.at(t),
            None => DVector::zeros(self.gain_rows()),
        }
    }

    fn gain_rows(&self) -> usize {
        match &self.gain {
            MatrixPath::Constant(k) => k.nrows(),
            MatrixPath::Sampled { values, .. } => values[0].nrows(),
        }
    }

    pub fn input(&self, x: &DVector<f64>, t: f64) -> DVector<f64> {
        self.feedforward_at(t) - self.gain_at(t) * x
    }

    pub fn covers(&self, t: f64) -> bool {
        self.gain.covers(t) && self.feedforward.as_ref().is_none_or(|v| v.covers(t))
    }
}

/// `K = ½R⁻¹Bᵀ(P+Pᵀ)` and `u_ff = R⁻¹Bᵀg` node by node. Slopes carried by
/// `p` and `g` are propagated through the product rule.
pub fn gain_from_p(problem: &LqProblem, p: &MatrixPath, g: Option<&VectorPath>) -> Result<ControlLaw> {
    let n = problem.n();
    let bad_p = match p {
        MatrixPath::Constant(m) => m.shape() != (n, n),
        MatrixPath::Sampled { values, .. } => values.iter().any(|m| m.shape() != (n, n)),
    };
    let bad_g = g.is_some_and(|g| match g {
        VectorPath::Constant(v) => v.len() != n,
        VectorPath::Sampled { values, .. } => values.iter().any(|v| v.len() != n),
    });
    if bad_p || bad_g {
        return Err(Error::DimensionMismatch(format!("P must be {n}x{n} and g of length {n}")));
    }
    let r_inv = problem.r_inv();
    let gain_at = |t: f64, p: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let b = problem.b().eval(t)?;
        Ok(r_inv * b.transpose() * (p + p.transpose()) * 0.5)
    };
    let gain_slope = |t: f64, p: &DMatrix<f64>, pd: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let b = problem.b().eval(t)?;
        let bd = problem.b().derivative(t)?;
        Ok(r_inv * (bd.transpose() * (p + p.transpose()) + b.transpose() * (pd + pd.transpose())) * 0.5)
    };
    let gain = match p {
        MatrixPath::Constant(m) => {
            if !problem.b().is_time_invariant() {
                return Err(Error::InvalidArgument("constant P needs a time-invariant B".into()));
            }
            MatrixPath::Constant(gain_at(problem.horizon().t0(), m)?)
        }
        MatrixPath::Sampled { times, values, slopes } => {
            let ks = times
                .iter()
                .zip(values)
                .map(|(&t, m)| gain_at(t, m))
                .collect::<Result<Vec<_>>>()?;
            match slopes {
                Some(d) => {
                    let kd = times
                        .iter()
                        .zip(values.iter().zip(d))
                        .map(|(&t, (m, md))| gain_slope(t, m, md))
                        .collect::<Result<Vec<_>>>()?;
                    MatrixPath::sampled_with_slopes(times.clone(), ks, kd)?
                }
                None => MatrixPath::sampled(times.clone(), ks)?,
            }
        }
    };
    let ff_at = |t: f64, g: &DVector<f64>| -> Result<DVector<f64>> {
        Ok(r_inv * (problem.b().eval(t)?.transpose() * g))
    };
    let feedforward = match g {
        None => None,
        Some(VectorPath::Constant(v)) => {
            if !problem.b().is_time_invariant() {
                return Err(Error::InvalidArgument("constant g needs a time-invariant B".into()));
            }
            Some(VectorPath::Constant(ff_at(problem.horizon().t0(), v)?))
        }
        Some(VectorPath::Sampled { times, values, slopes }) => {
            let vs = times
                .iter()
                .zip(values)
                .map(|(&t, v)| ff_at(t, v))
                .collect::<Result<Vec<_>>>()?;
            Some(match slopes {
                Some(d) => {
                    let vd = times
                        .iter()
                        .zip(values.iter().zip(d))
                        .map(|(&t, (v, vdot))| -> Result<DVector<f64>> {
                            let b = problem.b().eval(t)?;
                            let bd = problem.b().derivative(t)?;
                            Ok(r_inv * (bd.transpose() * v + b.transpose() * vdot))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    VectorPath::sampled_with_slopes(times.clone(), vs, vd)?
                }
                None => VectorPath::sampled(times.clone(), vs)?,
            })
        }
    };
    let finite = match &gain {
        MatrixPath::Constant(k) => all_finite(k),
        MatrixPath::Sampled { values, .. } => values.iter().all(all_finite),
    };
    if !finite {
        return Err(Error::InvalidArgument("gain has non-finite entries".into()));
    }
    Ok(ControlLaw { gain, feedforward })
}

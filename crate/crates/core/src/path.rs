//! Time-indexed matrices and vectors.
//!
//! A [`Path`] is either a constant value or a set of samples on a strictly
//! increasing grid. Samples may carry exact slopes (as produced by the ODE
//! integrators, which know the right-hand side at every node); with slopes
//! the path interpolates with cubic Hermite polynomials, without them it is
//! piecewise linear and derivatives come from finite differences.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{fd_weights, stencil_window};

/// Values a [`Path`] can carry.
pub trait PathValue: Clone + std::fmt::Debug {
    /// `a * x + b * y`
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self;
    fn zeros_like(&self) -> Self;
    fn max_abs(&self) -> f64;
}

impl PathValue for DMatrix<f64> {
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        x * a + y * b
    }
    fn zeros_like(&self) -> Self {
        DMatrix::zeros(self.nrows(), self.ncols())
    }
    fn max_abs(&self) -> f64 {
        crate::linalg::max_abs(self)
    }
}

impl PathValue for DVector<f64> {
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        x * a + y * b
    }
    fn zeros_like(&self) -> Self {
        DVector::zeros(self.len())
    }
    fn max_abs(&self) -> f64 {
        crate::linalg::max_abs_vec(self)
    }
}

/// Number of points in the finite-difference stencil used for node
/// derivatives (eighth order where the grid is long enough).
const FD_POINTS: usize = 9;

#[derive(Debug, Clone)]
pub enum Path<T: PathValue> {
    Constant(T),
    Sampled {
        times: Vec<f64>,
        values: Vec<T>,
        slopes: Option<Vec<T>>,
    },
}

pub type MatrixPath = Path<DMatrix<f64>>;
pub type VectorPath = Path<DVector<f64>>;

impl<T: PathValue> Path<T> {
    pub fn sampled(times: Vec<f64>, values: Vec<T>) -> Result<Self> {
        Self::check_grid(&times, values.len())?;
        Ok(Path::Sampled { times, values, slopes: None })
    }

    pub fn sampled_with_slopes(times: Vec<f64>, values: Vec<T>, slopes: Vec<T>) -> Result<Self> {
        Self::check_grid(&times, values.len())?;
        if slopes.len() != values.len() {
            return Err(Error::GridMismatch("slope count differs from sample count".into()));
        }
        Ok(Path::Sampled { times, values, slopes: Some(slopes) })
    }

    fn check_grid(times: &[f64], n_values: usize) -> Result<()> {
        if times.is_empty() || times.len() != n_values {
            return Err(Error::GridMismatch(format!(
                "{} times for {} samples",
                times.len(),
                n_values
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::GridMismatch("grid must be finite and strictly increasing".into()));
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Path::Constant(_))
    }

    pub fn times(&self) -> Option<&[f64]> {
        match self {
            Path::Constant(_) => None,
            Path::Sampled { times, .. } => Some(times),
        }
    }

    pub fn values(&self) -> Option<&[T]> {
        match self {
            Path::Constant(_) => None,
            Path::Sampled { values, .. } => Some(values),
        }
    }

    /// Time span covered; constants cover the whole real line.
    pub fn span(&self) -> (f64, f64) {
        match self {
            Path::Constant(_) => (f64::NEG_INFINITY, f64::INFINITY),
            Path::Sampled { times, .. } => (times[0], times[times.len() - 1]),
        }
    }

    pub fn covers(&self, t: f64) -> bool {
        let (a, b) = self.span();
        let slack = 1e-9 * (1.0 + a.abs().max(b.abs()).min(1e12));
        t >= a - slack && t <= b + slack
    }

    /// Interval index `i` with `times[i] <= t <= times[i + 1]`, clamped.
    fn locate(times: &[f64], t: f64) -> usize {
        let n = times.len();
        if n < 2 {
            return 0;
        }
        let idx = times.partition_point(|&s| s <= t);
        idx.saturating_sub(1).min(n - 2)
    }

    pub fn at(&self, t: f64) -> T {
        match self {
            Path::Constant(v) => v.clone(),
            Path::Sampled { times, values, slopes } => {
                if times.len() == 1 {
                    return values[0].clone();
                }
                let i = Self::locate(times, t);
                let h = times[i + 1] - times[i];
                let s = ((t - times[i]) / h).clamp(0.0, 1.0);
                match slopes {
                    None => T::axpby(1.0 - s, &values[i], s, &values[i + 1]),
                    Some(d) => {
                        let (s2, s3) = (s * s, s * s * s);
                        let (s4, s5) = (s3 * s, s3 * s2);
                        let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
                        let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
                        let h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
                        let h3 = 0.5 * s3 - s4 + 0.5 * s5;
                        let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
                        let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
                        let (a0, a1) = (fd_node(times, d, i), fd_node(times, d, i + 1));
                        let v = T::axpby(h0, &values[i], h5, &values[i + 1]);
                        let sl = T::axpby(h1 * h, &d[i], h4 * h, &d[i + 1]);
                        let cu = T::axpby(h2 * h * h, &a0, h3 * h * h, &a1);
                        T::axpby(1.0, &T::axpby(1.0, &v, 1.0, &sl), 1.0, &cu)
                    }
                }
            }
        }
    }

    /// Time derivative; exact zero for constants.
    pub fn derivative(&self, t: f64) -> T {
        match self {
            Path::Constant(v) => v.zeros_like(),
            Path::Sampled { times, values, slopes } => {
                if times.len() == 1 {
                    return values[0].zeros_like();
                }
                let i = Self::locate(times, t);
                let h = times[i + 1] - times[i];
                let s = ((t - times[i]) / h).clamp(0.0, 1.0);
                match slopes {
                    Some(d) => {
                        let (s2, s3) = (s * s, s * s * s);
                        let s4 = s3 * s;
                        let d0 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
                        let d1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
                        let d2 = s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4;
                        let d3 = 1.5 * s2 - 4.0 * s3 + 2.5 * s4;
                        let d4 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
                        let d5 = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
                        let (a0, a1) = (fd_node(times, d, i), fd_node(times, d, i + 1));
                        let v = T::axpby(d0 / h, &values[i], d5 / h, &values[i + 1]);
                        let sl = T::axpby(d1, &d[i], d4, &d[i + 1]);
                        let cu = T::axpby(d2 * h, &a0, d3 * h, &a1);
                        T::axpby(1.0, &T::axpby(1.0, &v, 1.0, &sl), 1.0, &cu)
                    }
                    None => {
                        let d0 = self.fd_derivative_at_node(i);
                        let d1 = self.fd_derivative_at_node(i + 1);
                        T::axpby(1.0 - s, &d0, s, &d1)
                    }
                }
            }
        }
    }

    /// Finite-difference derivative at node `i` from samples only (slopes,
    /// if present, are ignored). Central where the grid allows it,
    /// one-sided at the ends.
    pub fn fd_derivative_at_node(&self, i: usize) -> T {
        match self {
            Path::Constant(v) => v.zeros_like(),
            Path::Sampled { times, values, .. } => {
                if times.len() == 1 {
                    return values[0].zeros_like();
                }
                fd_node(times, values, i)
            }
        }
    }

    /// Derivative from finite differences of the samples alone, linearly
    /// interpolated between nodes.
    pub fn fd_derivative(&self, t: f64) -> T {
        match self {
            Path::Constant(v) => v.zeros_like(),
            Path::Sampled { times, values, .. } => {
                if times.len() == 1 {
                    return values[0].zeros_like();
                }
                let i = Self::locate(times, t);
                let s = ((t - times[i]) / (times[i + 1] - times[i])).clamp(0.0, 1.0);
                T::axpby(1.0 - s, &self.fd_derivative_at_node(i), s, &self.fd_derivative_at_node(i + 1))
            }
        }
    }

    pub fn map<U: PathValue>(&self, f: impl Fn(&T) -> U) -> Path<U> {
        match self {
            Path::Constant(v) => Path::Constant(f(v)),
            Path::Sampled { times, values, .. } => Path::Sampled {
                times: times.clone(),
                values: values.iter().map(&f).collect(),
                slopes: None,
            },
        }
    }
}

/// Finite-difference first derivative of `values` at node `i`.
fn fd_node<T: PathValue>(times: &[f64], values: &[T], i: usize) -> T {
    let window = stencil_window(i, times.len(), FD_POINTS);
    let w = fd_weights(times[i], &times[window.clone()]);
    let mut acc = values[i].zeros_like();
    for (wj, j) in w.iter().zip(window) {
        acc = T::axpby(1.0, &acc, *wj, &values[j]);
    }
    acc
}

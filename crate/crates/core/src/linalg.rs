//! Small dense-matrix helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub fn sym_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_sym_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    sym_part(m).symmetric_eigenvalues().min()
}

/// Largest real part over the spectrum of a square matrix.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    max_abs(&(m - m.transpose()))
}

pub fn inverse(m: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    m.clone().try_inverse().ok_or(Error::Singular(what))
}

pub fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Solves `AᵀX + XA + C = 0` through the Kronecker form.
pub fn solve_lyapunov(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let at = a.transpose();
    let op = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = -DVector::from_column_slice(c.as_slice());
    let x = op.lu().solve(&rhs).ok_or(Error::Singular("Lyapunov operator"))?;
    Ok(DMatrix::from_column_slice(n, n, x.as_slice()))
}

/// Composite Simpson rule over nodes that may be non-uniform only through
/// rounding; an odd interval count closes with the 3/8 rule on the tail.
pub fn simpson(times: &[f64], values: &[f64]) -> Result<f64> {
    let n = times.len();
    if n < 3 || values.len() != n {
        return Err(Error::GridTooCoarse { nodes: n.min(values.len()) });
    }
    let intervals = n - 1;
    let (simpson_end, tail) = if intervals % 2 == 0 || intervals < 3 {
        (intervals - intervals % 2, intervals % 2 == 1)
    } else {
        (intervals - 3, true)
    };
    let mut total = 0.0;
    let mut i = 0;
    while i < simpson_end {
        let h = (times[i + 2] - times[i]) / 2.0;
        total += h / 3.0 * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
        i += 2;
    }
    if tail {
        if intervals - simpson_end == 3 {
            let h = (times[i + 3] - times[i]) / 3.0;
            total += 3.0 * h / 8.0
                * (values[i] + 3.0 * values[i + 1] + 3.0 * values[i + 2] + values[i + 3]);
        } else {
            // single trailing interval (only possible when n == 2, excluded above)
            total += 0.5 * (times[i + 1] - times[i]) * (values[i] + values[i + 1]);
        }
    }
    Ok(total)
}

/// Finite-difference weights for the first derivative at `x0` over the
/// given stencil points (Fornberg's recursion).
pub fn fd_weights(x0: f64, points: &[f64]) -> Vec<f64> {
    let n = points.len();
    // c[j][k]: weight of point j for derivative order k (k = 0, 1)
    let mut c = vec![[0.0_f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = points[0] - x0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = points[i] - x0;
        for j in 0..i {
            let c3 = points[i] - points[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[1]).collect()
}

/// Index window of `width` consecutive nodes, centred on `i` where possible.
pub fn stencil_window(i: usize, len: usize, width: usize) -> std::ops::Range<usize> {
    let width = width.min(len);
    let half = width / 2;
    let start = i.saturating_sub(half).min(len - width);
    start..start + width
}

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, inverse, max_abs, sym_part};

/// Unique symmetric positive definite square root, by the Denman–Beavers
/// iteration `Y ← ½(Y + Z⁻¹)`, `Z ← ½(Z + Y⁻¹)` started from `(R, I)`.
pub fn spd_sqrt(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !r.is_square() || r.nrows() == 0 {
        return Err(Error::NotSpd(format!("{}x{} matrix", r.nrows(), r.ncols())));
    }
    let scale = max_abs(r);
    if asymmetry(r) > 1e-12 * scale.max(1.0) {
        return Err(Error::NotSpd("matrix is not symmetric".into()));
    }
    let min_eig = crate::linalg::min_sym_eig(r);
    if !(min_eig > 1e-10) {
        return Err(Error::NotSpd(format!("min eigenvalue {min_eig:e}")));
    }
    let n = r.nrows();
    let mut y = sym_part(r);
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let y_inv = inverse(&y, "Denman-Beavers Y")?;
        let z_inv = inverse(&z, "Denman-Beavers Z")?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let change = max_abs(&(&y_next - &y));
        y = y_next;
        z = z_next;
        if change <= 1e-15 * max_abs(&y) {
            break;
        }
    }
    Ok(sym_part(&y))
}

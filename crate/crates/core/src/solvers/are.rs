use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, max_abs, solve_lyapunov, sym_part};
use crate::model::LqProblem;

use super::residual::standard_at;

/// Stabilizing solution of `AᵀP + PA + CᵀQC − PBR⁻¹BᵀP = 0` from the
/// stable invariant subspace of the Hamiltonian
/// `[[A, −BR⁻¹Bᵀ], [−CᵀQC, −Aᵀ]]`.
pub fn solve_standard_are(problem: &LqProblem) -> Result<DMatrix<f64>> {
    if problem.horizon().is_finite() {
        return Err(Error::FiniteHorizon);
    }
    let sys = problem.at(problem.horizon().t0())?;
    let n = problem.n();
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&sys.a);
    h.view_mut((0, n), (n, n)).copy_from(&(-&sys.m));
    h.view_mut((n, 0), (n, n)).copy_from(&(-&sys.q_eff));
    h.view_mut((n, n), (n, n)).copy_from(&(-sys.a.transpose()));

    let scale = 1.0 + max_abs(&h);
    let eigs = h.complex_eigenvalues();
    let mut stable: Vec<Complex<f64>> =
        eigs.iter().copied().filter(|z| z.re < -1e-9 * scale).collect();
    if stable.len() < n {
        return Err(Error::NotStabilizable { stable: stable.len(), n });
    }
    stable.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    stable.truncate(n);

    let mut clusters: Vec<(Complex<f64>, usize)> = Vec::new();
    for z in stable {
        match clusters.iter_mut().find(|(c, _)| (z - *c).norm() <= 1e-6 * (1.0 + z.norm())) {
            Some(entry) => entry.1 += 1,
            None => clusters.push((z, 1)),
        }
    }

    let hc = h.map(|v| Complex::new(v, 0.0));
    let mut basis = DMatrix::<Complex<f64>>::zeros(2 * n, n);
    let mut col = 0;
    for (lambda, k) in clusters {
        let mut shifted = hc.clone();
        for i in 0..2 * n {
            shifted[(i, i)] -= lambda;
        }
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.ok_or(Error::Singular("Hamiltonian SVD"))?;
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        for &idx in order.iter().take(k) {
            for r in 0..2 * n {
                basis[(r, col)] = v_t[(idx, r)].conj();
            }
            col += 1;
        }
    }

    let x1 = basis.rows(0, n).into_owned();
    let x2 = basis.rows(n, n).into_owned();
    let Some(x1_inv) = x1.try_inverse() else {
        return Err(Error::NotStabilizable { stable: n, n });
    };
    let mut p = sym_part(&(x2 * x1_inv).map(|z| z.re));

    // Newton polish on the classical equation.
    for _ in 0..5 {
        let res = standard_at(&sys, &p);
        if max_abs(&res) <= 1e-13 * (1.0 + max_abs(&p)) {
            break;
        }
        let a_cl = &sys.a - &sys.m * &p;
        let delta = solve_lyapunov(&a_cl, &res)?;
        p = sym_part(&(p + delta));
    }
    let a_cl = &sys.a - &sys.m * &p;
    let closed_stable = a_cl.complex_eigenvalues().iter().filter(|z| z.re < 0.0).count();
    if closed_stable < n || !all_finite(&p) {
        return Err(Error::NotStabilizable { stable: closed_stable, n });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Horizon, ProblemData, ProblemKind, TimeMatrix};
    use nalgebra::DVector;

    fn problem(a: &[f64], q: f64, n: usize) -> LqProblem {
        ProblemData {
            kind: ProblemKind::Regulation,
            a: TimeMatrix::from_rows(n, n, a),
            b: TimeMatrix::constant(DMatrix::identity(n, n)),
            c: None,
            q: DMatrix::identity(n, n) * q,
            r: DMatrix::identity(n, n),
            f: None,
            horizon: Horizon::Infinite { t0: 0.0 },
            x0: DVector::zeros(n),
            reference: None,
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn scalar_root() {
        let p = solve_standard_are(&problem(&[-1.0], 1.0, 1)).unwrap();
        assert!((p[(0, 0)] - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_state_weight_on_stable_plant() {
        let p = solve_standard_are(&problem(&[-1.0, 0.0, 0.0, -1.0], 0.0, 2)).unwrap();
        assert!(max_abs(&p) < 1e-12);
    }

    #[test]
    fn repeated_eigenvalues() {
        // A = 0, B = Q = R = I gives P = I with a double Hamiltonian eigenvalue.
        let p = solve_standard_are(&problem(&[0.0, 0.0, 0.0, 0.0], 1.0, 2)).unwrap();
        assert!(max_abs(&(p - DMatrix::identity(2, 2))) < 1e-10);
    }
}

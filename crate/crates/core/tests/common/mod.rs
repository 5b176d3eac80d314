#![allow(dead_code)]

use krotov_lq::{Horizon, LqProblem, ProblemData, ProblemKind, TimeMatrix};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-scale..=scale))
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let m = random_matrix(rng, n, n, scale);
    (&m + m.transpose()) * 0.5
}

/// `A`, `B` random, `Q = LLᵀ`, `R = I + NNᵀ`.
pub fn random_lti(rng: &mut ChaCha8Rng, n: usize, m: usize, horizon: Horizon) -> LqProblem {
    let a = random_matrix(rng, n, n, 1.0);
    let b = random_matrix(rng, n, m, 1.0);
    let l = random_matrix(rng, n, n, 1.0);
    let nn = random_matrix(rng, m, m, 0.5);
    ProblemData {
        kind: ProblemKind::Regulation,
        a: TimeMatrix::constant(a),
        b: TimeMatrix::constant(b),
        c: None,
        q: &l * l.transpose(),
        r: DMatrix::identity(m, m) + &nn * nn.transpose(),
        f: None,
        horizon,
        x0: DVector::from_fn(n, |_, _| rng.random_range(-2.0..=2.0)),
        reference: None,
    }
    .validate()
    .unwrap()
}

pub fn scalar_regulation(a: f64, b: f64, q: f64, r: f64, horizon: Horizon, x0: f64) -> LqProblem {
    ProblemData {
        kind: ProblemKind::Regulation,
        a: TimeMatrix::from_rows(1, 1, &[a]),
        b: TimeMatrix::from_rows(1, 1, &[b]),
        c: None,
        q: DMatrix::from_element(1, 1, q),
        r: DMatrix::from_element(1, 1, r),
        f: None,
        horizon,
        x0: DVector::from_element(1, x0),
        reference: None,
    }
    .validate()
    .unwrap()
}

/// Closed form of the time-varying scalar example:
/// `p(t) = (t+1)(e^{2t}+C) / (C(t+2) − t e^{2t})`, `C = 11e^{10}`.
pub fn ex3_exact(t: f64) -> f64 {
    let c = 11.0 * 10f64.exp();
    let e = (2.0 * t).exp();
    (t + 1.0) * (e + c) / (c * (t + 2.0) - t * e)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

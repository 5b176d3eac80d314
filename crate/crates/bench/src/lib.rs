//! Problem fixtures shared by the benchmarks.

use krotov_lq::{Horizon, LqProblem, ProblemData, ProblemKind, TimeMatrix};
use nalgebra::{DMatrix, DVector};

/// Chain of `n` lightly damped integrators, each coupled to its neighbours,
/// actuated at both ends.
pub fn chain(n: usize, horizon: Horizon) -> LqProblem {
    assert!(n >= 2, "chain needs at least two states");
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = -0.1;
        if i + 1 < n {
            a[(i, i + 1)] = 1.0;
            a[(i + 1, i)] = -0.5;
        }
    }
    let mut b = DMatrix::zeros(n, 2);
    b[(0, 0)] = 1.0;
    b[(n - 1, 1)] = 1.0;
    ProblemData {
        kind: ProblemKind::Regulation,
        a: TimeMatrix::constant(a),
        b: TimeMatrix::constant(b),
        c: None,
        q: DMatrix::identity(n, n),
        r: DMatrix::identity(2, 2),
        f: None,
        horizon,
        x0: DVector::from_element(n, 1.0),
        reference: None,
    }
    .validate()
    .expect("chain fixture is well posed")
}

pub fn infinite_chain(n: usize) -> LqProblem {
    chain(n, Horizon::Infinite { t0: 0.0 })
}

pub fn finite_chain(n: usize, tf: f64) -> LqProblem {
    chain(n, Horizon::Finite { t0: 0.0, tf })
}

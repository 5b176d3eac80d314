//! Linear-quadratic regulator and tracker synthesis through quadratic
//! Krotov functions.
//!
//! A quadratic function `q(x, t) = xᵀP(t)x − 2g(t)ᵀx` turns the optimal
//! control problem into pointwise minimizations of
//! `s = ∂q/∂t + ∂q/∂x·(Ax + Bu) + eᵀQe + uᵀRu`. When `P` satisfies the
//! generalized Riccati equation (which splits the quadratic term as
//! `½PMP + ¼PMPᵀ + ¼PᵀMP` and so admits non-symmetric solutions) and `g`
//! its linear companion, `s` is convex in `(x, u)` and minimized by
//! `u = −½R⁻¹Bᵀ(P+Pᵀ)x + R⁻¹Bᵀg`.
//!
//! The crate provides the equivalent-problem machinery ([`krotov`]),
//! direct solvers ([`solvers`], [`tracking`]), the iterative improvement
//! scheme ([`iterative`]), simulation and runtime checks ([`sim`]), and the
//! classical Riccati solvers used as cross-checks.

pub mod catalog;
pub mod error;
pub mod export;
pub mod iterative;
pub mod krotov;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod path;
pub mod published;
pub mod scenario;
pub mod sim;
pub mod solvers;
pub mod tracking;

pub use catalog::ExampleId;
pub use error::{Error, ErrorCategory, Result};
pub use iterative::{krotov_iterate, InitialControl, IterationRecord, KrotovRunConfig};
pub use krotov::{
    convexity_certificate, decompose_s, equivalent_cost, s_terminal_value, s_value, ConvexityCertificate,
    KrotovFunction, SDecomposition,
};
pub use model::{Horizon, LqProblem, ProblemData, ProblemKind, Profile, ReferenceSignal, TimeMatrix};
pub use path::{MatrixPath, Path, VectorPath};
pub use sim::{evaluate_cost, simulate, Trajectory};
pub use solvers::{
    gain_from_p, integrate_mdre, integrate_standard_mdre, select_stabilizing, solve_algebraic,
    solve_standard_are, spd_sqrt, ControlLaw, NewtonOptions, SolutionSet,
};
pub use tracking::{integrate_g, steady_state_g, FeedforwardMethod, FeedforwardSolution};

//! Matrix machinery: SPD square roots, generalized and classical Riccati
//! residuals, backward integration, multistart Newton enumeration of the
//! generalized algebraic equation, and the Hamiltonian ARE oracle.

mod algebraic;
mod are;
mod law;
mod residual;
mod riccati;
mod sqrt;

pub use algebraic::{
    select_stabilizing, solve_algebraic, NewtonOptions, Selection, SolutionEntry, SolutionSet,
};
pub use are::solve_standard_are;
pub use law::{gain_from_p, ControlLaw};
pub use residual::{generalized_residual, standard_residual};
pub use riccati::{integrate_mdre, integrate_standard_mdre, riccati_fd_residual, RiccatiForm};
pub use sqrt::spd_sqrt;

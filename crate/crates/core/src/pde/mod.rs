//! Grid solver for `div(B'(H(∇u))∇H(∇u)) + F'(u) = 0` on a square with
//! Dirichlet data, and the rescaled-energy diagnostics on Wulff balls.

mod diagnostics;
mod field;
mod problem;
mod solver;

pub use field::GridField;
pub use problem::{residual, Initial, Potential, ProblemSpec, DEFAULT_LADDER};
pub use solver::{solve_dirichlet, Solution, StageReport};
pub use diagnostics::{
    check_monotonicity, check_pointwise_bound, check_radii, energy_trace, gauge, liouville_mass_test, p_function,
    rescaled_energy, wulff_indicator, EnergyTrace,
};

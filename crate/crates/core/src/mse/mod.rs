//! Dirichlet problem for the minimal surface equation
//! `div(grad phi / sqrt(1 + |grad phi|^2)) = 0` on a rectangle.
//!
//! The discrete problem is the minimization of a triangle-quadrature area
//! functional over interior nodal values (see [`discrete`]). [`solve_mse`]
//! runs damped Newton on its Euler-Lagrange residual, [`energy_minimize`]
//! descends the energy directly; both converge to the same grid function.

pub mod discrete;
mod grid;
mod solver;

pub use discrete::{area_energy, gradient_bound, mse_residual, mse_residual_full};
pub use grid::{Grid2D, GridFunction};
pub use solver::{
    energy_minimize, harmonic_extension, residual_function, solve_mse, Init, SolverOptions, SolverReport,
    MAX_HALVINGS, PICARD_SWEEPS,
};

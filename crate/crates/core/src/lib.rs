//! Numerical laboratory for the equivalence between generalized harmonicity
//! of two-valued jump functions and minimality of the separating hypersurface.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] - graph hypersurfaces, their 2-jets and mean curvature, the
//!   jump function `f_S`, and a catalog of analytic fixtures.
//! * [`quadrature`] - ball sampling (Monte Carlo, Halton, tensor lattice),
//!   two-sided volume splits and ball averages with standard errors.
//! * [`genlap`] - the generalized Laplacian as a finite-radius estimator, the
//!   power-law fit over a radius schedule and the harmonicity verdict.
//! * [`asymptotics`] - the volume-asymmetry constant `c_n`, the curvature
//!   recovery fit and the Taylor ball-average check.
//! * [`mse`] - a Dirichlet solver for the minimal surface equation on
//!   rectangles (damped Newton and area-energy descent).
//! * [`viscosity`] - touching paraboloids, discrete viscosity audits and the
//!   shared-sample comparison inequality.
//!
//! Sampling work is split into fixed-size chunks with independent
//! deterministic streams, so results are bit-identical whether the chunks run
//! on the rayon pool (feature `parallel`, on by default) or sequentially.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod exec;
pub mod genlap;
pub mod geometry;
pub mod mse;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod viscosity;

pub use error::{Error, Result};
pub use exec::Execution;

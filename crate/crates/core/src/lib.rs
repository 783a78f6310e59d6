//! Numerical laboratory for the fractal Burgers equation
//! `∂_t u + ∂_x A(u) = ε Δ^{α/2} u`, `1 < α < 2`: shock layers, the
//! shift-corrected relative entropy and inviscid-limit rates.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod entropy;
pub mod error;
pub mod flux;
pub mod fractional;
pub mod grid;
pub mod interp;
pub mod profile;
pub mod quadrature;
pub mod run;
pub mod shift;
pub mod solver;

pub use error::{Error, Result};
pub use flux::FluxSpec;
pub use fractional::{normalization_constant, FracLapOperator};
pub use grid::{FarField, Grid1D};
pub use solver::{Reconstruction, SolverConfig, Solver, State, TimeIntegrator};
pub use profile::{compute_profile, InviscidShock, ProfileConfig, ViscousProfile};

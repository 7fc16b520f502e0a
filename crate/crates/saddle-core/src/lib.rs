//! Numerical machinery for saddle-shaped solutions of the bistable diffusion
//! equation −Δu = f(u) in ℝ^{2m}, reduced to the two radial variables
//! s = |(x₁,…,x_m)| and t = |(x_{m+1},…,x_{2m})|.
//!
//! The crate computes the saddle solution on a truncated triangle
//! {0 ≤ t ≤ s ≤ S} by monotone iteration or damped Newton, evaluates the
//! linearized operator Δ + f′(u) and its smallest eigenvalue in the class of
//! (s,t)-dependent perturbations, builds the supersolution certificate
//! φ = t^{−b}u_s − s^{−b}u_t available in dimensions 2m ≥ 14, and packages
//! monotonicity, asymptotics, uniqueness, and barrier checks as machine
//! verdicts.
//!
//! The core is `no_std` (with `alloc`); IO, file formats, and the command
//! line live in the companion `saddle-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod barrier;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod linearized;
pub mod nonlinearity;
pub mod profile;
pub mod rng;
pub mod solver;
pub mod verify;

pub use geometry::{DimensionParams, STPoint, YZPoint};
pub use grid::{QuadrantGrid, ScalarField, SquareField};
pub use nonlinearity::BistableNonlinearity;
pub use profile::Profile1D;
pub use solver::{SaddleSolution, SolverConfig, SolverError, SolverMode};

//! Solver and Monte Carlo verifier for zero-sum stochastic switching games.
//!
//! Two players control the regime pair `(i, j)` of a diffusion: player I
//! (the maximizer) switches the first coordinate at cost `C(i, k)`, player II
//! (the minimizer) switches the second at cost `χ(j, l)`. The value functions
//! `V^{ij}` of the infinite-horizon discounted game solve a system of
//! quasi-variational inequalities with two solution-dependent obstacles,
//!
//! ```text
//! max{ min[ rV^{ij} − 𝒜V^{ij} − f^{ij} ; V^{ij} − M^{ij}[V] ] ; V^{ij} − N^{ij}[V] } = 0,
//! M^{ij}[V] = max_{k≠i} { V^{kj} − C(i,k) },   N^{ij}[V] = min_{l≠j} { V^{il} + χ(j,l) },
//! ```
//!
//! where `𝒜` is the drift-diffusion generator of the controlled state.
//!
//! The crate provides:
//! - [`game`] — domain types for the game and validators for the standing
//!   cost conditions (triangular, back-and-forth, no-free-loop);
//! - [`grid`] / [`generator`] — a truncated 1-D mesh and a monotone upwind
//!   finite-difference discretization of `𝒜`;
//! - [`solver`] — Howard policy iteration on the coupled system, an
//!   independent Gauss–Seidel fixed-point oracle, and residual diagnostics;
//! - [`strategy`] — region decomposition, switching-threshold extraction and
//!   feedback policy lookup;
//! - [`montecarlo`] — Euler–Maruyama simulation of the controlled diffusion
//!   under the feedback strategies, verifying `V(x) = J(x, δ*, ν*)`;
//! - [`config`] / [`io`] — JSON ingestion and CSV import/export.

pub mod config;
pub mod field;
pub mod game;
pub mod generator;
pub mod grid;
pub mod io;
pub mod montecarlo;
pub mod presets;
pub mod solver;
pub mod strategy;

pub use field::{Action, PairIndex, PolicyTable, ValueField};
pub use game::{
    CoefficientModel, CostMatrices, GameError, GameSpec, RegimeIndex, Severity, ValidationReport,
};
pub use grid::Grid;
pub use solver::{SolveReport, Solved, SolverError};

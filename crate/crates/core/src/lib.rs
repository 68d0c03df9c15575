//! Hybridizable discontinuous Galerkin discretization of the time-dependent
//! drift-diffusion system
//!
//! ```text
//!   u_t - Δu + ∇·(u∇φ) = f1,     -εΔφ + u = f2
//! ```
//!
//! on triangulated polygons. The transport equation uses degree `k+1` for the
//! density, degree `k` for its flux and traces, with the projected
//! `h_K^{-1}(Π_k u - û)` stabilization. The Poisson equation uses equal order
//! `k+1` for potential, field and traces with an O(1) stabilization `τ`.
//! Both subproblems are statically condensed onto face traces; the coupled
//! system is advanced with BDF2 (BDF1 start) and a Gummel fixed point per step.
//!
//! Module map:
//!
//! - [`mesh`]: triangulations, refinement, boundary tags, element geometry
//! - [`fem`]: reference bases, quadrature, elementary matrices
//! - [`projections`]: L² and HDG projections, discrete fields
//! - [`operators`]: local HDG blocks, numerical fluxes, static condensation
//! - [`solver`]: global trace assembly and the two subproblem solvers
//! - [`timestepping`]: BDF integration with Gummel coupling
//! - [`manufactured`]: exact solutions, problem presets, error norms, EOC tables
//! - [`harness`]: configuration, drivers, CSV and VTK output

pub mod error;
pub mod fem;
pub mod harness;
pub mod manufactured;
pub mod mesh;
pub mod operators;
pub mod projections;
pub mod solver;
pub mod timestepping;

pub use error::{Error, Result};

/// A point in the plane.
pub type Point = [f64; 2];

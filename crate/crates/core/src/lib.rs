//! Anisotropic curve shortening flow for closed curves in `R^d`, `d >= 2`.
//!
//! A 1-homogeneous density `phi` on tangent vectors induces the energy
//! `E_phi = ∫ phi(x_rho) drho` over parameterized closed curves. Its gradient
//! flow (with mobility weight `m`) is rewritten as the strictly parabolic
//! divergence-form system
//!
//! ```text
//! H(x_rho) x_t = [Phi'(x_rho)]_rho,      Phi = phi^2 / 2,
//! ```
//!
//! where `H` fixes the tangential velocity so that the normal motion is the
//! anisotropic curvature flow. This crate provides:
//!
//! - [`anisotropy`]: densities `phi`, mobilities `m`, the derived `Phi` and
//!   all their derivatives, plus structural validation;
//! - [`flow_matrix`]: the matrices `H(p)`, `H^{-1}(p)` and a parabolicity
//!   check;
//! - [`mesh`]: periodic grids on `[0,1]`, piecewise-linear vector fields,
//!   energies and error norms;
//! - [`assembly`]: residual/Jacobian of the fully discrete scheme and
//!   manufactured-solution forcing;
//! - [`solver`]: Newton iteration per implicit Euler step, cyclic
//!   block-tridiagonal solves, and the outer time loop;
//! - [`ritz`]: the nonlinear Ritz-type projection used for initialization and
//!   as a high-order accuracy oracle;
//! - [`diagnostics`]: discrete curvature, mesh-ratio/energy monitors and
//!   convergence (EOC) studies;
//! - [`presets`]: the canonical initial curves and exact solutions used by
//!   the benchmark runs.
//!
//! The crate is `no_std`-compatible (`default-features = false`); it then
//! relies on `alloc` and `libm`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod anisotropy;
pub mod assembly;
pub mod diagnostics;
pub mod error;
pub mod flow_matrix;
pub(crate) mod linalg;
pub(crate) mod math;
pub mod mesh;
pub mod presets;
pub(crate) mod quadrature;
pub mod ritz;
pub mod solver;

pub use error::{Error, Result};

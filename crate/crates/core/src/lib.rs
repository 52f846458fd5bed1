//! Numerical laboratory for the repulsive Keller-Segel system with a lethal,
//! self-produced chemorepellent:
//!
//! ```text
//! u_t = D Δu + χ ∇·(u ∇v) + r u (1 - u) - u v
//! v_t = Δv + a u - v + f
//! ```
//!
//! on a rectangle with zero-flux boundaries. The crate provides
//!
//! - [`grid`]: cell-centered finite-volume operators with mirrored ghosts,
//! - [`model`]: right-hand side, RK4 stepping and the simulation driver,
//! - [`equilibria`]: homogeneous steady states and their local stability,
//! - [`lyapunov`]: the entropy-type functionals and decay certification,
//! - [`thresholds`]: the algebra behind the critical logistic rate `r_c`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibria;
pub mod error;
pub mod grid;
pub mod lyapunov;
pub mod model;
pub mod thresholds;

pub use error::{Error, Result};
pub use grid::{Field, Grid};
pub use model::{ModelParams, State};

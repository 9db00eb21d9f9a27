//! Numerical laboratory for the singular parabolic MEMS equation
//!
//! ```text
//! u_t = Δu + λ f(x) / (1 − u)²,   u = 0 on ∂Ω,   u(x, 0) = 0
//! ```
//!
//! The crate covers the steady problem (minimal branch, pull-in voltage,
//! extremal solution, linearized eigenpairs), Crank–Nicolson time
//! integration with quenching detection, the analytic quenching-time and
//! quenching-location estimates, and self-similar diagnostics near a
//! quenching point.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod mesh;
pub mod profiles;
pub mod selfsim;
pub mod steady;
pub mod sweep;
pub mod tridiag;

pub use error::{Error, Result};
pub use mesh::{build_mesh, Field, Geometry, Mesh};
pub use profiles::{Profile, ProfileKind, ProfileReport};

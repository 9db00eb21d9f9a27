//! Closed-form singular extremal solution on the unit ball for `N >= 8`
//! and `f = |x|^α`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularExtremal {
    pub dimension: usize,
    pub alpha: f64,
    /// Exponent `β = (2 + α) / 3` in `w*(r) = 1 - r^β`.
    pub beta: f64,
    /// `β (N + β - 2)`.
    pub lambda_star: f64,
    /// Largest admissible `α` for this dimension.
    pub alpha_max: f64,
}

impl SingularExtremal {
    pub fn w_star(&self, r: f64) -> f64 {
        1.0 - r.abs().powf(self.beta)
    }

    pub fn field(&self, mesh: &Arc<Mesh>) -> Result<Field> {
        Field::from_fn(mesh.clone(), |r| self.w_star(r))
    }
}

/// `(4 - 6N + 3√6 (N - 2)) / 4`.
pub fn alpha_max(dimension: usize) -> f64 {
    let n = dimension as f64;
    (4.0 - 6.0 * n + 3.0 * 6f64.sqrt() * (n - 2.0)) / 4.0
}

pub fn singular_extremal_radial(dimension: usize, alpha: f64) -> Result<SingularExtremal> {
    if dimension < 8 {
        return Err(Error::InvalidArgument(format!(
            "the singular extremal form needs N >= 8, got {dimension}"
        )));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
    }
    let amax = alpha_max(dimension);
    if alpha > amax {
        return Err(Error::OutOfRange { alpha, alpha_max: amax });
    }
    let beta = (2.0 + alpha) / 3.0;
    Ok(SingularExtremal {
        dimension,
        alpha,
        beta,
        lambda_star: beta * (dimension as f64 + beta - 2.0),
        alpha_max: amax,
    })
}

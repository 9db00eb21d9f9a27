//! First eigenpair of a tridiagonal operator that is self-adjoint in a
//! weighted inner product.
//!
//! The eigenvalue is bracketed by Sturm-count bisection, which picks out the
//! smallest eigenvalue unambiguously; inverse power iteration shifted just
//! below it then recovers the eigenvector in a few sweeps.

use crate::error::{Error, Result};
use crate::tridiag::Tridiagonal;

const MAX_SWEEPS: usize = 12;

pub(crate) fn smallest_eigenvalue_bracket(a: &Tridiagonal) -> (f64, f64) {
    let (mut lo, hi) = a.gershgorin();
    let mut hi = hi + 1e-12 * hi.abs().max(1.0);
    lo -= 1e-12 * lo.abs().max(1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if a.count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Smallest eigenvalue and its eigenvector (sign unnormalized, unit max-norm).
pub(crate) fn first_eigenpair(a: &Tridiagonal, weights: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = a.len();
    let (lo, hi) = smallest_eigenvalue_bracket(a);
    let guess = 0.5 * (lo + hi);
    let scale = a.norm_inf().max(1.0);
    let shift = guess - 1e-9 * (guess.abs().max(1.0)).max(1e-10 * scale);
    let shifted = a.scaled_shift(1.0, -shift);

    let mut x = vec![1.0; n];
    let mut residual = f64::INFINITY;
    let mut mu = guess;
    let floor = 1e3 * f64::EPSILON * scale;
    for _ in 0..MAX_SWEEPS {
        let y = shifted.solve(&x).or_else(|_| {
            // shift landed on an eigenvalue; nudge it
            a.scaled_shift(1.0, -(shift - 1e-7 * scale)).solve(&x)
        })?;
        let norm = y.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::IterationLimit { residual: f64::NAN });
        }
        x = y.into_iter().map(|v| v / norm).collect();

        let ax = a.mul_vec(&x);
        let num: f64 = (0..n).map(|i| weights[i] * x[i] * ax[i]).sum();
        let den: f64 = (0..n).map(|i| weights[i] * x[i] * x[i]).sum();
        mu = num / den;
        residual = (0..n).map(|i| (ax[i] - mu * x[i]).abs()).fold(0.0, f64::max);
        if residual <= 1e-8f64.max(floor) {
            return Ok((mu, x));
        }
    }
    if residual <= 1e-6 {
        // converged as far as rounding in A x permits
        return Ok((mu, x));
    }
    Err(Error::IterationLimit { residual })
}

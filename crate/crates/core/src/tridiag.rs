//! Tridiagonal matrices: Thomas solves, products and Sturm counts.
//!
//! Every discrete operator in this crate (slab or radial Laplacian, the
//! steady Jacobian, the Crank–Nicolson stage Jacobian and the linearized
//! operator) is tridiagonal, so this is the only linear algebra needed.

use crate::error::{Error, Result};

/// Row `i` reads `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`.
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Returns `alpha * self + beta * I`.
    pub fn scaled_shift(&self, alpha: f64, beta: f64) -> Self {
        Self {
            lower: self.lower.iter().map(|v| alpha * v).collect(),
            diag: self.diag.iter().map(|v| alpha * v + beta).collect(),
            upper: self.upper.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Adds `d[i]` to the diagonal.
    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (a, b) in self.diag.iter_mut().zip(d) {
            *a += b;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.len())
            .map(|i| self.lower[i].abs() + self.diag[i].abs() + self.upper[i].abs())
            .fold(0.0, f64::max)
    }

    /// Thomas algorithm without pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solve_with_pivots(rhs).map(|(x, _)| x)
    }

    /// Thomas solve that also reports the number of non-positive pivots.
    ///
    /// For matrices similar to a symmetric one (positive off-diagonal
    /// products) the count equals the number of non-positive eigenvalues.
    pub fn solve_with_pivots(&self, rhs: &[f64]) -> Result<(Vec<f64>, usize)> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::InvalidArgument(format!(
                "rhs length {} does not match matrix size {}",
                rhs.len(),
                n
            )));
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut non_positive = 0;
        let mut pivot = self.diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = self.diag[i] - self.lower[i] * c[i - 1];
            }
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "singular tridiagonal pivot at row {i}"
                )));
            }
            if pivot < 0.0 {
                non_positive += 1;
            }
            c[i] = if i + 1 < n { self.upper[i] / pivot } else { 0.0 };
            let prev = if i > 0 { self.lower[i] * d[i - 1] } else { 0.0 };
            d[i] = (rhs[i] - prev) / pivot;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok((d, non_positive))
    }

    /// Number of eigenvalues strictly below `x`.
    ///
    /// Valid when `lower[i+1] * upper[i] >= 0` for every coupling, i.e. the
    /// matrix is diagonally similar to a symmetric tridiagonal matrix.
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.len();
        let mut count = 0;
        let mut d = self.diag[0] - x;
        for i in 0..n {
            if i > 0 {
                let off = self.lower[i] * self.upper[i - 1];
                d = self.diag[i] - x - off / d;
            }
            if d == 0.0 {
                d = -f64::EPSILON * (self.diag[i].abs() + x.abs() + 1.0);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.lower[i].abs();
            }
            if i + 1 < n {
                r += self.upper[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }
}

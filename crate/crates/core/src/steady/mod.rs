//! Steady problem `-Δw = λ f / (1 - w)²` with `w = 0` on the boundary.
//!
//! Minimal solutions come from Newton's method started at `w = 0`: the
//! nonlinearity is convex and increasing, so the iterates rise monotonically
//! toward the minimal solution and stay below it, and the Jacobian along the
//! way is a nonsingular M-matrix. When no minimal solution exists the
//! iterates eventually reach `w = 1` or the Jacobian loses definiteness,
//! which is how `NoSolution` is detected.

mod continuation;
pub(crate) mod eigen;
mod extremal;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{weighted_sum, Field, Mesh};
use crate::profiles::Profile;
use crate::tridiag::Tridiagonal;

pub use continuation::{continue_branch, BranchPoint, ContinuationOptions, SteadyBranch};
pub use extremal::{singular_extremal_radial, SingularExtremal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadyOptions {
    /// Sup-norm tolerance on the residual (raised to the rounding floor of
    /// the discrete Laplacian on fine meshes).
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub lambda: f64,
    pub w: Field,
    pub residual_norm: f64,
    /// First eigenvalue of the linearization at `w`.
    pub mu1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    L2,
    L1,
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub eigenvalue: f64,
    pub eigenfunction: Field,
    pub normalization: Normalization,
}

/// `1 / (1 - w)²` with a guard for `w >= 1`.
#[inline]
pub(crate) fn forcing(w: f64) -> f64 {
    let g = 1.0 - w;
    1.0 / (g * g)
}

/// `-Δw - λ f (1 - w)^-2` on free nodes, zero on Dirichlet nodes.
pub(crate) fn residual(mesh: &Mesh, f: &[f64], lambda: f64, w: &[f64]) -> Vec<f64> {
    let lap = mesh.laplacian().mul_vec(w);
    let mut r = vec![0.0; w.len()];
    for i in mesh.free_range() {
        r[i] = -lap[i] - lambda * f[i] * forcing(w[i]);
    }
    r
}

/// Jacobian `-Δ - 2λ f (1 - w)^-3` with identity rows on Dirichlet nodes.
pub(crate) fn jacobian(mesh: &Mesh, f: &[f64], lambda: f64, w: &[f64]) -> Tridiagonal {
    let mut j = mesh.laplacian().scaled_shift(-1.0, 0.0);
    for i in 0..w.len() {
        if mesh.is_boundary(i) {
            j.lower[i] = 0.0;
            j.upper[i] = 0.0;
            j.diag[i] = 1.0;
        } else {
            let g = 1.0 - w[i];
            j.diag[i] -= 2.0 * lambda * f[i] / (g * g * g);
        }
    }
    // decouple free rows from the fixed boundary values
    let free = mesh.free_range();
    if free.start > 0 {
        j.lower[free.start] = 0.0;
    }
    j.upper[free.end - 1] = 0.0;
    j
}

/// Linearized operator restricted to free nodes.
pub(crate) fn linearized_operator(mesh: &Mesh, f: &[f64], lambda: f64, w: &[f64]) -> Tridiagonal {
    let full = jacobian(mesh, f, lambda, w);
    let free = mesh.free_range();
    Tridiagonal {
        lower: full.lower[free.clone()].to_vec(),
        diag: full.diag[free.clone()].to_vec(),
        upper: full.upper[free].to_vec(),
    }
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Residual tolerance, never below the rounding floor of `Δw` on this mesh.
pub(crate) fn effective_tolerance(mesh: &Mesh, f: &[f64], lambda: f64, w: &[f64], tol: f64) -> f64 {
    let forcing_scale = w
        .iter()
        .zip(f)
        .map(|(wi, fi)| lambda * fi * forcing(*wi))
        .fold(0.0, f64::max);
    let floor = 64.0 * f64::EPSILON * (mesh.laplacian().norm_inf() * sup_norm(w) + forcing_scale);
    tol.max(floor)
}

pub fn solve_minimal(lambda: f64, profile: &Profile, mesh: &Arc<Mesh>, opts: &SteadyOptions) -> Result<SteadyState> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
    }
    let f = profile.sample(mesh)?;
    let (w, residual_norm) = minimal_newton(mesh, &f, lambda, opts)?;
    let w = Field::new(mesh.clone(), w)?;
    let mu1 = first_eigenvalue(mesh, &f, lambda, w.values())?;
    Ok(SteadyState {
        lambda,
        w,
        residual_norm,
        mu1,
    })
}

pub(crate) fn minimal_newton(mesh: &Mesh, f: &[f64], lambda: f64, opts: &SteadyOptions) -> Result<(Vec<f64>, f64)> {
    let n = mesh.len();
    let mut w = vec![0.0; n];
    for _ in 0..=opts.max_iterations {
        let r = residual(mesh, f, lambda, &w);
        let norm = sup_norm(&r);
        if !norm.is_finite() {
            return Err(Error::NonConvergence {
                lambda,
                reason: "non-finite residual".into(),
            });
        }
        if norm <= effective_tolerance(mesh, f, lambda, &w, opts.tolerance) {
            return Ok((w, norm));
        }
        let j = jacobian(mesh, f, lambda, &w);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let (delta, negative_pivots) = match j.solve_with_pivots(&rhs) {
            Ok(v) => v,
            Err(_) => return Err(Error::NoSolution { lambda }),
        };
        if negative_pivots > 0 {
            return Err(Error::NoSolution { lambda });
        }
        let mut theta = 1.0;
        while w.iter().zip(&delta).any(|(a, d)| a + theta * d >= 1.0 - 1e-12) {
            theta *= 0.5;
            if theta < 1e-8 {
                return Err(Error::NoSolution { lambda });
            }
        }
        for (a, d) in w.iter_mut().zip(&delta) {
            *a += theta * d;
        }
    }
    // iterates kept rising without settling
    Err(Error::NoSolution { lambda })
}

pub(crate) fn first_eigenvalue(mesh: &Mesh, f: &[f64], lambda: f64, w: &[f64]) -> Result<f64> {
    let a = linearized_operator(mesh, f, lambda, w);
    let (lo, hi) = eigen::smallest_eigenvalue_bracket(&a);
    Ok(0.5 * (lo + hi))
}

pub fn linearized_eigenpair(state: &SteadyState, profile: &Profile, normalization: Normalization) -> Result<Eigenpair> {
    let mesh = state.w.mesh();
    let f = profile.sample(mesh)?;
    eigenpair_at(mesh, &f, state.lambda, state.w.values(), normalization)
}

pub(crate) fn eigenpair_at(
    mesh: &Arc<Mesh>,
    f: &[f64],
    lambda: f64,
    w: &[f64],
    normalization: Normalization,
) -> Result<Eigenpair> {
    if w.iter().any(|v| *v >= 1.0 - 1e-12) {
        return Err(Error::InvalidArgument("linearization needs 1 - w bounded away from 0".into()));
    }
    let a = linearized_operator(mesh, f, lambda, w);
    let free = mesh.free_range();
    let weights = &mesh.weights()[free.clone()];
    let (mu, x) = eigen::first_eigenpair(&a, weights)?;
    let mut phi = vec![0.0; mesh.len()];
    let sign = if x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    for (k, i) in free.enumerate() {
        phi[i] = sign * x[k];
    }
    let scale = match normalization {
        Normalization::L2 => {
            let sq: Vec<f64> = phi.iter().map(|v| v * v).collect();
            weighted_sum(mesh.weights(), &sq).sqrt()
        }
        Normalization::L1 => weighted_sum(mesh.weights(), &phi),
    };
    for v in phi.iter_mut() {
        *v /= scale;
    }
    Ok(Eigenpair {
        eigenvalue: mu,
        eigenfunction: Field::new(mesh.clone(), phi)?,
        normalization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, Geometry};
    use std::f64::consts::PI;

    fn unit_slab(n: usize) -> Arc<Mesh> {
        build_mesh(Geometry::Slab { x_left: -0.5, x_right: 0.5 }, n).unwrap()
    }

    #[test]
    fn zero_voltage_gives_zero() {
        let m = unit_slab(101);
        let s = solve_minimal(0.0, &Profile::constant(1.0).unwrap(), &m, &SteadyOptions::default()).unwrap();
        assert!(s.w.values().iter().all(|v| *v == 0.0));
        assert!((s.mu1 - PI * PI).abs() < 1e-3);
    }

    #[test]
    fn above_pull_in_has_no_solution() {
        let m = unit_slab(401);
        let r = solve_minimal(2.0, &Profile::constant(1.0).unwrap(), &m, &SteadyOptions::default());
        assert!(matches!(r, Err(Error::NoSolution { .. })), "{r:?}");
    }

    #[test]
    fn unperturbed_linearization() {
        // w = 0: μ₁ = π² - 2λ on the unit slab, eigenfunction cos(πx)
        let n = 801;
        let m = unit_slab(n);
        let f = vec![1.0; n];
        let lambda = 1.3;
        let e = eigenpair_at(&m, &f, lambda, &vec![0.0; n], Normalization::L2).unwrap();
        let h = m.spacing();
        assert!((e.eigenvalue - (PI * PI - 2.0 * lambda)).abs() < PI.powi(4) * h * h / 12.0 * 1.1);
        let mid = n / 2;
        let amp = e.eigenfunction.values()[mid];
        assert!((amp - 2f64.sqrt()).abs() < 1e-4);
        for (x, v) in m.nodes().iter().zip(e.eigenfunction.values()) {
            assert!((v - amp * (PI * x).cos()).abs() < 1e-4);
        }
    }

    #[test]
    fn normalizations() {
        let n = 201;
        let m = unit_slab(n);
        let f = vec![1.0; n];
        let w: Vec<f64> = m.nodes().iter().map(|x| 0.2 * (1.0 - 4.0 * x * x)).collect();
        let l2 = eigenpair_at(&m, &f, 1.0, &w, Normalization::L2).unwrap();
        let l1 = eigenpair_at(&m, &f, 1.0, &w, Normalization::L1).unwrap();
        let sq: Vec<f64> = l2.eigenfunction.values().iter().map(|v| v * v).collect();
        assert!((weighted_sum(m.weights(), &sq) - 1.0).abs() < 1e-10);
        assert!((l1.eigenfunction.integrate() - 1.0).abs() < 1e-10);
        let total = l2.eigenfunction.integrate();
        for (a, b) in l1.eigenfunction.values().iter().zip(l2.eigenfunction.values()) {
            assert!((a - b / total).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_touching_state() {
        let m = unit_slab(11);
        let mut w = vec![0.0; 11];
        w[5] = 1.0;
        assert!(eigenpair_at(&m, &[1.0; 11], 1.0, &w, Normalization::L2).is_err());
    }
}

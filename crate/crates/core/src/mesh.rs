//! Uniform meshes on a slab or a radially symmetric ball, nodal fields,
//! quadrature and the discrete Dirichlet Laplacian.
//!
//! Radial meshes use a finite-volume form of `u_rr + (N-1)/r u_r`: node `i`
//! owns the shell `[r_i - h/2, r_i + h/2] ∩ [0, R]` and the flux through a
//! face at radius `ρ` carries the area factor `ρ^(N-1)`. The origin row
//! reduces to the symmetry limit `Δu(0) ≈ 2N (u_1 - u_0) / h²`, the scheme is
//! exact on `r²`, and the operator is symmetric with respect to the shell
//! volumes, which are also the quadrature weights. On a slab the same
//! construction is the standard three-point stencil with trapezoid weights.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tridiag::Tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    Slab { x_left: f64, x_right: f64 },
    RadialBall { dimension: usize, radius: f64 },
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Geometry::Slab { x_left, x_right } => {
                if !(x_left.is_finite() && x_right.is_finite() && x_left < x_right) {
                    return Err(Error::InvalidGeometry(format!(
                        "slab needs x_left < x_right, got [{x_left}, {x_right}]"
                    )));
                }
            }
            Geometry::RadialBall { dimension, radius } => {
                if dimension < 1 {
                    return Err(Error::InvalidGeometry("ball dimension must be >= 1".into()));
                }
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(Error::InvalidGeometry(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Spatial dimension `N` of the physical domain.
    pub fn dimension(&self) -> usize {
        match *self {
            Geometry::Slab { .. } => 1,
            Geometry::RadialBall { dimension, .. } => dimension,
        }
    }

    /// Coordinate range covered by the mesh (`[0, R]` for a ball).
    pub fn coordinate_range(&self) -> (f64, f64) {
        match *self {
            Geometry::Slab { x_left, x_right } => (x_left, x_right),
            Geometry::RadialBall { radius, .. } => (0.0, radius),
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Geometry::Slab { x_left, x_right } => x_right - x_left,
            Geometry::RadialBall { radius, .. } => 2.0 * radius,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, Geometry::RadialBall { .. })
    }
}

/// Surface area of the unit sphere `S^(N-1)` in `R^N` (2 for `N = 1`).
pub fn unit_sphere_area(dimension: usize) -> f64 {
    use std::f64::consts::PI;
    match dimension {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        n => 2.0 * PI / (n as f64 - 2.0) * unit_sphere_area(n - 2),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    geometry: Geometry,
    nodes: Vec<f64>,
    spacing: f64,
    weights: Vec<f64>,
    laplacian: Tridiagonal,
}

pub fn build_mesh(geometry: Geometry, node_count: usize) -> Result<Arc<Mesh>> {
    Mesh::new(geometry, node_count).map(Arc::new)
}

impl Mesh {
    pub fn new(geometry: Geometry, node_count: usize) -> Result<Self> {
        geometry.validate()?;
        if node_count < 3 {
            return Err(Error::InvalidGeometry(format!(
                "a mesh needs at least 3 nodes, got {node_count}"
            )));
        }
        let (lo, hi) = geometry.coordinate_range();
        let h = (hi - lo) / (node_count - 1) as f64;
        let mut nodes: Vec<f64> = (0..node_count).map(|i| lo + i as f64 * h).collect();
        if geometry.is_radial() {
            nodes[node_count - 1] = hi;
        } else {
            // mirror so that symmetric slabs get exactly symmetric nodes
            for i in 0..node_count / 2 {
                nodes[node_count - 1 - i] = (lo + hi) - nodes[i];
            }
            if node_count % 2 == 1 {
                nodes[node_count / 2] = 0.5 * (lo + hi);
            }
        }

        let (weights, laplacian) = match geometry {
            Geometry::Slab { .. } => slab_operators(node_count, h),
            Geometry::RadialBall { dimension, radius } => {
                radial_operators(&nodes, h, dimension, radius)
            }
        };
        Ok(Self {
            geometry,
            nodes,
            spacing: h,
            weights,
            laplacian,
        })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Quadrature weights; `Σ w_i g(x_i)` approximates `∫_Ω g dx`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Laplacian with Dirichlet rows: boundary rows are identically zero.
    pub fn laplacian(&self) -> &Tridiagonal {
        &self.laplacian
    }

    /// True when the node carries the homogeneous Dirichlet condition.
    pub fn is_boundary(&self, i: usize) -> bool {
        match self.geometry {
            Geometry::Slab { .. } => i == 0 || i + 1 == self.len(),
            Geometry::RadialBall { .. } => i + 1 == self.len(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.geometry.dimension()
    }

    /// Contiguous range of unknown (non-Dirichlet) nodes.
    pub fn free_range(&self) -> std::ops::Range<usize> {
        match self.geometry {
            Geometry::Slab { .. } => 1..self.len() - 1,
            Geometry::RadialBall { .. } => 0..self.len() - 1,
        }
    }

    /// Index of the node nearest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let lo = self.nodes[0];
        let i = ((x - lo) / self.spacing).round();
        i.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Face areas `ω ρ^(N-1)` between node `i` and `i + 1` (1 on a slab).
    pub(crate) fn face_area(&self, i: usize) -> f64 {
        match self.geometry {
            Geometry::Slab { .. } => 1.0,
            Geometry::RadialBall { dimension, .. } => {
                let rho = 0.5 * (self.nodes[i] + self.nodes[i + 1]);
                unit_sphere_area(dimension) * rho.powi(dimension as i32 - 1)
            }
        }
    }

    /// Linear interpolation of nodal values at `x`; `None` outside the mesh.
    pub fn interpolate(&self, values: &[f64], x: f64) -> Option<f64> {
        let lo = self.nodes[0];
        let hi = self.nodes[self.len() - 1];
        if !(x >= lo - 1e-14 * self.spacing && x <= hi + 1e-14 * self.spacing) {
            return None;
        }
        let s = ((x - lo) / self.spacing).clamp(0.0, (self.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.len() - 2);
        let theta = s - i as f64;
        Some((1.0 - theta) * values[i] + theta * values[i + 1])
    }
}

fn slab_operators(n: usize, h: f64) -> (Vec<f64>, Tridiagonal) {
    let mut weights = vec![h; n];
    weights[0] = 0.5 * h;
    weights[n - 1] = 0.5 * h;
    let mut lap = Tridiagonal::zeros(n);
    let c = 1.0 / (h * h);
    for i in 1..n - 1 {
        lap.lower[i] = c;
        lap.diag[i] = -2.0 * c;
        lap.upper[i] = c;
    }
    (weights, lap)
}

fn radial_operators(nodes: &[f64], h: f64, dim: usize, radius: f64) -> (Vec<f64>, Tridiagonal) {
    let n = nodes.len();
    let nd = dim as f64;
    let omega = unit_sphere_area(dim);
    let shell = |a: f64, b: f64| (b.powi(dim as i32) - a.powi(dim as i32)) / nd;
    let area = |rho: f64| rho.powi(dim as i32 - 1);

    let mut weights = vec![0.0; n];
    let mut lap = Tridiagonal::zeros(n);
    for i in 0..n {
        let r_minus = (nodes[i] - 0.5 * h).max(0.0);
        let r_plus = (nodes[i] + 0.5 * h).min(radius);
        let volume = shell(r_minus, r_plus);
        weights[i] = omega * volume;
        if i + 1 == n {
            continue;
        }
        let a_plus = area(r_plus) / (h * volume);
        let a_minus = if i == 0 { 0.0 } else { area(r_minus) / (h * volume) };
        lap.lower[i] = a_minus;
        lap.upper[i] = a_plus;
        lap.diag[i] = -(a_plus + a_minus);
    }
    (weights, lap)
}

/// Nodal scalar function on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for {} nodes",
                values.len(),
                mesh.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite field value at node {i}")));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.len();
        Self {
            mesh,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(mesh: Arc<Mesh>, g: impl Fn(f64) -> f64) -> Result<Self> {
        let values = mesh.nodes().iter().map(|&x| g(x)).collect();
        Self::new(mesh, values)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn integrate(&self) -> f64 {
        integrate(self)
    }
}

/// Volume integral of a field over the domain.
pub fn integrate(field: &Field) -> f64 {
    weighted_sum(field.mesh.weights(), &field.values)
}

pub(crate) fn weighted_sum(weights: &[f64], values: &[f64]) -> f64 {
    weights.iter().zip(values).map(|(w, v)| w * v).sum()
}

/// Discrete `Δu` with zero Dirichlet data; boundary rows come back as 0.
pub fn apply_laplacian(field: &Field) -> Field {
    let values = field.mesh.laplacian().mul_vec(&field.values);
    Field {
        mesh: field.mesh.clone(),
        values,
    }
}

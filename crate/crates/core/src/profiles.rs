//! Permittivity profiles `f(x)`.
//!
//! A profile must satisfy `0 <= f <= 1`, be Hölder continuous with some
//! exponent `α ∈ (0, 1]`, and be positive on a set of positive measure.
//! Profiles that leave `[0, 1]` are rejected rather than clamped.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Geometry, Mesh};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileKind {
    /// `f ≡ c`, `c ∈ (0, 1]`.
    Constant { c: f64 },
    /// `f(x) = |x|^β` (radius on a ball).
    Power { exponent: f64 },
    /// Piecewise profile on the slab `[-1/2, 1/2]` with maxima at `x = ±1/4`:
    /// `1 - 16(x + 1/4)²` left of `-1/4`, `|sin 2πx|` in the middle and
    /// `1 - 16(x - 1/4)²` right of `1/4`.
    SlabSinPiecewise,
    /// Piecewise-linear interpolation of `(coordinate, value)` samples.
    Tabulated { nodes: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub kind: ProfileKind,
    /// Declared Hölder exponent `α`.
    pub holder_exponent: f64,
}

impl Profile {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidArgument(format!("constant profile needs c in (0,1], got {c}")));
        }
        Ok(Self {
            kind: ProfileKind::Constant { c },
            holder_exponent: 1.0,
        })
    }

    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent >= 0.0 && exponent.is_finite()) {
            return Err(Error::InvalidArgument(format!("power profile needs exponent >= 0, got {exponent}")));
        }
        let alpha = if exponent == 0.0 { 1.0 } else { exponent.min(1.0) };
        Ok(Self {
            kind: ProfileKind::Power { exponent },
            holder_exponent: alpha,
        })
    }

    /// The two-bump slab profile; Lipschitz, so `α = 1`.
    pub fn slab_sin_piecewise() -> Self {
        Self {
            kind: ProfileKind::SlabSinPiecewise,
            holder_exponent: 1.0,
        }
    }

    pub fn tabulated(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(Error::InvalidArgument(
                "tabulated profile needs at least two (coordinate, value) pairs".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("tabulated coordinates must increase strictly".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
            return Err(Error::InvalidArgument(format!("tabulated value {v} outside [0,1]")));
        }
        Ok(Self {
            kind: ProfileKind::Tabulated { nodes, values },
            holder_exponent: 1.0,
        })
    }

    /// Two-column CSV `(coordinate, value)`, with or without a header row.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)?;
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::InvalidArgument(format!(
                    "row {row} of {} has {} columns, expected 2",
                    path.display(),
                    record.len()
                )));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(x), Ok(v)) => {
                    nodes.push(x);
                    values.push(v);
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "row {row} of {} is not numeric",
                        path.display()
                    )))
                }
            }
        }
        Self::tabulated(nodes, values)
    }

    pub fn with_holder_exponent(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!("Hölder exponent must lie in (0,1], got {alpha}")));
        }
        self.holder_exponent = alpha;
        Ok(self)
    }

    /// Intrinsic domain of the formula, if bounded.
    fn domain(&self) -> (f64, f64) {
        match &self.kind {
            ProfileKind::Constant { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            ProfileKind::Power { .. } => (-1.0, 1.0),
            ProfileKind::SlabSinPiecewise => (-0.5, 0.5),
            ProfileKind::Tabulated { nodes, .. } => (nodes[0], nodes[nodes.len() - 1]),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let slack = 1e-12 * (1.0 + x.abs());
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        let x = x.clamp(lo, hi);
        Ok(match &self.kind {
            ProfileKind::Constant { c } => *c,
            ProfileKind::Power { exponent } => {
                if *exponent == 0.0 {
                    1.0
                } else {
                    x.abs().powf(*exponent)
                }
            }
            ProfileKind::SlabSinPiecewise => slab_sin_piecewise(x),
            ProfileKind::Tabulated { nodes, values } => {
                let j = nodes.partition_point(|&p| p <= x).clamp(1, nodes.len() - 1);
                let theta = (x - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
                (1.0 - theta) * values[j - 1] + theta * values[j]
            }
        })
    }

    /// Profile values at every mesh node.
    pub fn sample(&self, mesh: &Mesh) -> Result<Vec<f64>> {
        self.check_geometry(mesh.geometry())?;
        mesh.nodes().iter().map(|&x| self.eval(x)).collect()
    }

    pub fn check_geometry(&self, geometry: &Geometry) -> Result<()> {
        let (a, b) = geometry.coordinate_range();
        let (lo, hi) = self.domain();
        if let ProfileKind::SlabSinPiecewise = self.kind {
            match *geometry {
                Geometry::Slab { x_left, x_right }
                    if (x_left + 0.5).abs() < 1e-12 && (x_right - 0.5).abs() < 1e-12 => {}
                _ => {
                    return Err(Error::IncompatibleGeometry(
                        "the piecewise sine profile lives on the slab [-1/2, 1/2]".into(),
                    ))
                }
            }
        }
        if a < lo - 1e-12 || b > hi + 1e-12 {
            return Err(Error::IncompatibleGeometry(format!(
                "mesh spans [{a}, {b}] but the profile is defined on [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// Whether `∫ ψ/f` can be finite for a positive eigenfunction `ψ`
    /// vanishing linearly on the boundary.
    ///
    /// Analytic kinds are decided from the order of their interior zeros;
    /// tabulated profiles fall back to node values.
    pub fn reciprocal_integrable(&self, mesh: &Mesh) -> bool {
        match &self.kind {
            ProfileKind::Constant { .. } => true,
            ProfileKind::Power { exponent } => {
                let (a, b) = mesh.geometry().coordinate_range();
                let contains_origin = mesh.geometry().is_radial() || (a < 0.0 && b > 0.0);
                !contains_origin || *exponent < mesh.dimension() as f64
            }
            // |sin 2πx| has a simple zero at the interior point x = 0.
            ProfileKind::SlabSinPiecewise => false,
            ProfileKind::Tabulated { .. } => mesh
                .nodes()
                .iter()
                .enumerate()
                .filter(|(i, _)| !mesh.is_boundary(*i))
                .all(|(_, &x)| self.eval(x).map(|v| v >= 1e-12).unwrap_or(false)),
        }
    }
}

fn slab_sin_piecewise(x: f64) -> f64 {
    use std::f64::consts::PI;
    let v = if x < -0.25 {
        1.0 - 16.0 * (x + 0.25) * (x + 0.25)
    } else if x > 0.25 {
        1.0 - 16.0 * (x - 0.25) * (x - 0.25)
    } else {
        (2.0 * PI * x).sin().abs()
    };
    v.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub sup_f: f64,
    pub argmax: Vec<f64>,
    pub inf_f: f64,
    /// Lower estimate of the Hölder constant for the declared exponent.
    pub holder_constant: f64,
    pub holder_exponent: f64,
    /// `0 <= f <= 1` on every node and `f > 0` on at least two adjacent nodes.
    pub satisfies_range_condition: bool,
    /// `∂f/∂ν <= 0` within the boundary collar.
    pub satisfies_boundary_monotonicity: bool,
    pub collar: f64,
}

pub fn validate(profile: &Profile, mesh: &Mesh, collar: f64) -> Result<ProfileReport> {
    if !(collar > 0.0) {
        return Err(Error::InvalidArgument(format!("collar width must be positive, got {collar}")));
    }
    let f = profile.sample(mesh)?;
    let sup_f = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let inf_f = f.iter().cloned().fold(f64::INFINITY, f64::min);
    let argmax = mesh
        .nodes()
        .iter()
        .zip(&f)
        .filter(|(_, v)| sup_f - **v <= 1e-12)
        .map(|(x, _)| *x)
        .collect();

    let in_range = f.iter().all(|v| (0.0..=1.0).contains(v));
    let positive_patch = f.windows(2).any(|w| w[0] > 0.0 && w[1] > 0.0);

    let nodes = mesh.nodes();
    let n = nodes.len();
    let (lo, hi) = mesh.geometry().coordinate_range();
    let tol = 1e-14;
    // outward along +x near the right end; along -x near the left end of a slab
    let mut monotone = (0..n - 1)
        .filter(|&i| hi - nodes[i] <= collar + 1e-12)
        .all(|i| f[i + 1] - f[i] <= tol);
    if !mesh.geometry().is_radial() {
        monotone &= (0..n - 1)
            .filter(|&i| nodes[i + 1] - lo <= collar + 1e-12)
            .all(|i| f[i] - f[i + 1] <= tol);
    }

    let holder = holder_constant(profile, mesh.geometry(), profile.holder_exponent, n)?;
    Ok(ProfileReport {
        sup_f,
        argmax,
        inf_f,
        holder_constant: holder,
        holder_exponent: profile.holder_exponent,
        satisfies_range_condition: in_range && positive_patch,
        satisfies_boundary_monotonicity: monotone,
        collar,
    })
}

/// Pair-sampled lower estimate of `sup |f(x) - f(y)| / |x - y|^α`.
///
/// Samples a dyadic grid with `2^L + 1 <= sample_count` points and compares
/// every pair at every power-of-two lag, so refining never loses pairs and
/// the estimate is nondecreasing in `sample_count`.
pub fn holder_constant(profile: &Profile, geometry: &Geometry, alpha: f64, sample_count: usize) -> Result<f64> {
    if sample_count < 2 {
        return Err(Error::InvalidArgument("holder_constant needs at least 2 samples".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("Hölder exponent must lie in (0,1], got {alpha}")));
    }
    profile.check_geometry(geometry)?;
    let (a, b) = geometry.coordinate_range();
    let level = usize::BITS - 1 - (sample_count - 1).leading_zeros();
    let m = 1usize << level;
    let h = (b - a) / m as f64;
    let values: Vec<f64> = (0..=m)
        .map(|i| profile.eval(if i == m { b } else { a + i as f64 * h }))
        .collect::<Result<_>>()?;
    let mut best: f64 = 0.0;
    let mut lag = 1;
    while lag <= m {
        let dist = (lag as f64 * h).powf(alpha);
        for i in 0..=m - lag {
            best = best.max((values[i + lag] - values[i]).abs() / dist);
        }
        lag *= 2;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_slab(n: usize) -> std::sync::Arc<Mesh> {
        build_mesh(Geometry::Slab { x_left: -0.5, x_right: 0.5 }, n).unwrap()
    }

    #[test]
    fn piecewise_profile_values() {
        let f = Profile::slab_sin_piecewise();
        assert_relative_eq!(f.eval(0.25).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(f.eval(-0.25).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
        assert_eq!(f.eval(-0.5).unwrap(), 0.0);
        assert_eq!(f.eval(0.5).unwrap(), 0.0);
        assert!(matches!(f.eval(0.6), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn validate_constant() {
        let m = unit_slab(101);
        let r = validate(&Profile::constant(1.0).unwrap(), &m, 0.1).unwrap();
        assert_eq!(r.sup_f, 1.0);
        assert_eq!(r.inf_f, 1.0);
        assert!(r.satisfies_range_condition);
        assert!(r.satisfies_boundary_monotonicity);
        assert_eq!(r.holder_constant, 0.0);
    }

    #[test]
    fn validate_piecewise() {
        // 0.25 is a node of this mesh
        let m = unit_slab(1001);
        let r = validate(&Profile::slab_sin_piecewise(), &m, 0.1).unwrap();
        assert_relative_eq!(r.sup_f, 1.0, epsilon = 1e-14);
        assert_eq!(r.inf_f, 0.0);
        assert_eq!(r.argmax.len(), 2);
        assert_relative_eq!(r.argmax[0], -0.25, epsilon = 1e-12);
        assert_relative_eq!(r.argmax[1], 0.25, epsilon = 1e-12);
        assert!(r.satisfies_range_condition);
        assert!(r.satisfies_boundary_monotonicity);
    }

    #[test]
    fn validate_increasing_power() {
        let m = build_mesh(Geometry::Slab { x_left: -1.0, x_right: 1.0 }, 201).unwrap();
        let r = validate(&Profile::power(2.0).unwrap(), &m, 0.1).unwrap();
        assert_eq!(r.argmax, vec![-1.0, 1.0]);
        assert!(!r.satisfies_boundary_monotonicity);
    }

    #[test]
    fn holder_examples() {
        let g = Geometry::Slab { x_left: 0.0, x_right: 1.0 };
        let c = Profile::constant(0.4).unwrap();
        assert_eq!(holder_constant(&c, &g, 0.5, 100).unwrap(), 0.0);

        let id = Profile::tabulated(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert_relative_eq!(holder_constant(&id, &g, 1.0, 257).unwrap(), 1.0, epsilon = 1e-12);

        assert!(holder_constant(&id, &g, 1.0, 1).is_err());
    }

    #[test]
    fn piecewise_lipschitz_constant() {
        // oracle: max |f'| over the three analytic pieces; 2π from the sine
        // piece at 0 and 8 from the quadratic pieces at the endpoints ±1/2
        let slopes = [2.0 * std::f64::consts::PI, 32.0 * 0.25];
        let oracle = slopes.iter().cloned().fold(0.0, f64::max);
        let g = Geometry::Slab { x_left: -0.5, x_right: 0.5 };
        let k = holder_constant(&Profile::slab_sin_piecewise(), &g, 1.0, 1 << 14).unwrap();
        assert!(k <= oracle * (1.0 + 1e-12));
        assert!((k - oracle).abs() / oracle < 0.01, "K = {k}");
    }

    #[test]
    fn reciprocal_integrability() {
        let m = unit_slab(6000);
        assert!(!Profile::slab_sin_piecewise().reciprocal_integrable(&m));
        assert!(Profile::constant(0.5).unwrap().reciprocal_integrable(&m));
        let b = build_mesh(Geometry::RadialBall { dimension: 3, radius: 1.0 }, 50).unwrap();
        // ψ/|x|^β on a 3-ball is integrable at the origin iff β < 3
        assert!(Profile::power(1.0).unwrap().reciprocal_integrable(&b));
        assert!(!Profile::power(3.0).unwrap().reciprocal_integrable(&b));
        let t = Profile::tabulated(vec![-0.5, 0.0, 0.5], vec![1.0, 0.0, 1.0]).unwrap();
        assert!(!t.reciprocal_integrable(&unit_slab(11)));
    }

    #[test]
    fn tabulated_rejects_out_of_range() {
        assert!(Profile::tabulated(vec![0.0, 1.0], vec![0.0, 1.2]).is_err());
        assert!(Profile::tabulated(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn tabulated_from_csv() {
        let dir = std::env::temp_dir().join(format!("quench-profile-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.csv");
        std::fs::write(&path, "x,f\n-0.5,0\n0,1\n0.5,0\n").unwrap();
        let p = Profile::from_csv(&path).unwrap();
        assert_relative_eq!(p.eval(0.25).unwrap(), 0.5);
        std::fs::remove_dir_all(&dir).ok();
    }

    proptest! {
        #[test]
        fn piecewise_is_even_and_bounded(x in -0.5f64..=0.5) {
            let f = Profile::slab_sin_piecewise();
            let a = f.eval(x).unwrap();
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert_eq!(a, f.eval(-x).unwrap());
        }

        #[test]
        fn holder_nondecreasing_in_samples(n in 2usize..2000, extra in 1usize..2000) {
            let g = Geometry::Slab { x_left: -0.5, x_right: 0.5 };
            let f = Profile::slab_sin_piecewise();
            let a = holder_constant(&f, &g, 1.0, n).unwrap();
            let b = holder_constant(&f, &g, 1.0, n + extra).unwrap();
            prop_assert!(b >= a);
        }
    }
}

//! Self-similar diagnostics near a quenching point `a` with quenching time `T`:
//!
//! ```text
//! y = (x - a) / √(T - t),   s = -log(1 - t/T),   1 - u = (T - t)^{1/3} w(y, s)
//! ```
//!
//! Under this change of variables `w` tends to `k(a) = (3λ f(a))^{1/3}`.

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::mesh::unit_sphere_area;

/// Spacing of the uniform `y`-grid.
pub const Y_SPACING: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledSample {
    pub t: f64,
    pub s: f64,
    /// Uniform grid covering `B_s ∩ Ω(s)`; radial frames use `y >= 0`.
    pub y: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledFrame {
    pub center: f64,
    pub quench_time: f64,
    pub dimension: usize,
    pub radial: bool,
    pub samples: Vec<RescaledSample>,
    /// First sampled `s` from which `B_s ⊂ Ω(s)` holds for every later sample.
    pub s0: Option<f64>,
    /// Whether the uniform-convergence hypothesis holds: `N = 1`, or a
    /// radial ball centred at the origin.
    pub hypothesis_met: bool,
}

impl RescaledSample {
    /// Maps the sample back to `(x, 1 - u)` pairs.
    pub fn to_physical(&self, center: f64, quench_time: f64) -> Vec<(f64, f64)> {
        let tau = quench_time - self.t;
        self.y
            .iter()
            .zip(&self.w)
            .map(|(y, w)| (center + y * tau.sqrt(), tau.cbrt() * w))
            .collect()
    }

    fn nearest(&self, y: f64) -> Option<f64> {
        let i = self
            .y
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - y).abs().total_cmp(&(b.1 - y).abs()))?
            .0;
        Some(self.w[i])
    }

    /// `w(0, s)`.
    pub fn center_value(&self) -> Option<f64> {
        self.nearest(0.0)
    }
}

pub fn rescale(trajectory: &Trajectory, center: f64, quench_time: f64) -> Result<RescaledFrame> {
    let mesh = trajectory.mesh();
    let geometry = mesh.geometry();
    let (lo, hi) = geometry.coordinate_range();
    let radial = geometry.is_radial();
    if radial && center != 0.0 {
        return Err(Error::InvalidArgument("radial frames must be centred at the origin".into()));
    }
    if !(center >= lo && center <= hi) {
        return Err(Error::OutOfDomain { x: center, lo, hi });
    }
    if !(quench_time > 0.0) {
        return Err(Error::InvalidArgument(format!("quench time must be positive, got {quench_time}")));
    }
    let mut samples = Vec::with_capacity(trajectory.snapshots.len());
    for (t, field) in &trajectory.snapshots {
        if *t >= quench_time {
            return Err(Error::DomainError(format!("snapshot at t = {t} is not before T = {quench_time}")));
        }
        let tau = quench_time - t;
        let s = -(1.0 - t / quench_time).ln();
        let scale = tau.sqrt();
        let y_lo = if radial { 0.0 } else { ((lo - center) / scale).max(-s) };
        let y_hi = ((hi - center) / scale).min(s);
        let j_lo = (y_lo / Y_SPACING).ceil() as i64;
        let j_hi = (y_hi / Y_SPACING).floor() as i64;
        let mut y = Vec::new();
        let mut w = Vec::new();
        for j in j_lo..=j_hi {
            let yj = j as f64 * Y_SPACING;
            if let Some(u) = mesh.interpolate(field.values(), center + yj * scale) {
                y.push(yj);
                w.push((1.0 - u) / tau.cbrt());
            }
        }
        samples.push(RescaledSample { t: *t, s, y, w });
    }
    if samples.windows(2).any(|p| p[1].s <= p[0].s) {
        return Err(Error::InvalidArgument("snapshot times must increase".into()));
    }

    let contained = |smp: &RescaledSample| {
        let scale = (quench_time - smp.t).sqrt();
        let right = (hi - center) / scale >= smp.s;
        let left = radial || (center - lo) / scale >= smp.s;
        left && right
    };
    let mut s0 = None;
    for smp in samples.iter().rev() {
        if contained(smp) {
            s0 = Some(smp.s);
        } else {
            break;
        }
    }
    Ok(RescaledFrame {
        center,
        quench_time,
        dimension: mesh.dimension(),
        radial,
        samples,
        s0,
        hypothesis_met: mesh.dimension() == 1 || (radial && center == 0.0),
    })
}

/// `k(a) = (3λ f(a))^{1/3}`.
pub fn asymptotic_limit(lambda: f64, f_at_a: f64) -> Result<f64> {
    if !(f_at_a > 0.0) || !(lambda > 0.0) {
        return Err(Error::DomainError(format!(
            "need lambda > 0 and f(a) > 0, got {lambda} and {f_at_a}"
        )));
    }
    Ok((3.0 * lambda * f_at_a).cbrt())
}

/// `F(z) = -z²/6 - λ f(a)/z` and `F''(z) = -1/3 - 2λ f(a)/z³`.
pub fn f_profile(z: f64, lambda: f64, f_at_a: f64) -> Result<(f64, f64)> {
    if !(z > 0.0) {
        return Err(Error::DomainError(format!("z must be positive, got {z}")));
    }
    let c = lambda * f_at_a;
    Ok((-z * z / 6.0 - c / z, -1.0 / 3.0 - 2.0 * c / (z * z * z)))
}

/// Trapezoid weights on a uniform grid times the radial measure.
fn measure(y: &[f64], dimension: usize, radial: bool) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            let trap = if n == 1 {
                0.0
            } else if i == 0 || i == n - 1 {
                0.5 * Y_SPACING
            } else {
                Y_SPACING
            };
            if radial {
                trap * unit_sphere_area(dimension) * y[i].abs().powi(dimension as i32 - 1)
            } else {
                trap
            }
        })
        .collect()
}

fn rho(y: f64) -> f64 {
    (-y * y / 4.0).exp()
}

/// `Γ(s) = ∫_{B_s} ρ` with the same quadrature as the frozen energy.
pub fn gaussian_mass(y: &[f64], dimension: usize, radial: bool) -> f64 {
    measure(y, dimension, radial).iter().zip(y).map(|(m, y)| m * rho(*y)).sum()
}

/// Restricts a sample to `B_s`.
fn ball_part(sample: &RescaledSample) -> (Vec<f64>, Vec<f64>) {
    sample
        .y
        .iter()
        .zip(&sample.w)
        .filter(|(y, _)| y.abs() <= sample.s + 1e-12)
        .map(|(y, w)| (*y, *w))
        .unzip()
}

/// Frozen energy of `w` on a uniform `y`-grid.
pub fn frozen_energy_values(y: &[f64], w: &[f64], lambda: f64, f_at_a: f64, dimension: usize, radial: bool) -> Result<f64> {
    if w.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::DomainError("w must be positive on B_s".into()));
    }
    let m = measure(y, dimension, radial);
    let mut e = 0.0;
    for i in 0..y.len() {
        e += m[i] * rho(y[i]) * (-w[i] * w[i] / 6.0 - lambda * f_at_a / w[i]);
    }
    let area = |r: f64| if radial { unit_sphere_area(dimension) * r.abs().powi(dimension as i32 - 1) } else { 1.0 };
    for i in 0..y.len().saturating_sub(1) {
        let mid = 0.5 * (y[i] + y[i + 1]);
        let g = (w[i + 1] - w[i]) / Y_SPACING;
        e += 0.5 * Y_SPACING * area(mid) * rho(mid) * g * g;
    }
    Ok(e)
}

/// Frozen energy of the sample nearest `s`.
pub fn frozen_energy(frame: &RescaledFrame, lambda: f64, f_at_a: f64, s: f64) -> Result<f64> {
    let s0 = frame
        .s0
        .ok_or_else(|| Error::DomainError("B_s never lies inside Ω(s)".into()))?;
    if s < s0 {
        return Err(Error::DomainError(format!("s = {s} precedes s0 = {s0}")));
    }
    let sample = frame
        .samples
        .iter()
        .min_by(|a, b| (a.s - s).abs().total_cmp(&(b.s - s).abs()))
        .ok_or_else(|| Error::MissingData("frame has no samples".into()))?;
    let (y, w) = ball_part(sample);
    frozen_energy_values(&y, &w, lambda, f_at_a, frame.dimension, frame.radial)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub s: f64,
    pub energy: f64,
    /// `E(k(a)) = F(k(a)) Γ(s)` on the same ball.
    pub energy_of_k: f64,
    /// `w(0, s)`.
    pub w_center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub rows: Vec<EnergyRow>,
    pub k_a: f64,
    /// `F(k(a)) (4π)^{N/2}`: the limit of `E(k(a))` as `s → ∞`.
    pub e_limit: f64,
    pub s0: Option<f64>,
}

/// Frozen energy along every sample with `s >= s₀` whose ball holds at
/// least two grid points.
pub fn energy_trace(frame: &RescaledFrame, lambda: f64, f_at_a: f64) -> Result<EnergyTrace> {
    let k = asymptotic_limit(lambda, f_at_a)?;
    let (fk, _) = f_profile(k, lambda, f_at_a)?;
    let mut rows = Vec::new();
    if let Some(s0) = frame.s0 {
        for sample in frame.samples.iter().filter(|smp| smp.s >= s0) {
            let (y, w) = ball_part(sample);
            if y.len() < 2 {
                continue;
            }
            rows.push(EnergyRow {
                s: sample.s,
                energy: frozen_energy_values(&y, &w, lambda, f_at_a, frame.dimension, frame.radial)?,
                energy_of_k: fk * gaussian_mass(&y, frame.dimension, frame.radial),
                w_center: sample.center_value().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(EnergyTrace {
        rows,
        k_a: k,
        e_limit: fk * (4.0 * std::f64::consts::PI).powf(frame.dimension as f64 / 2.0),
        s0: frame.s0,
    })
}

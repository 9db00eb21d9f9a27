//! Analytic quenching-time and quenching-location estimates.
//!
//! Every bound is evaluated from mesh data: suprema and infima are node
//! extrema and integrals use the mesh quadrature, so each is an `O(h^α)`
//! approximation of its continuous counterpart.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::dynamics::QuenchReport;
use crate::error::{Error, Result};
use crate::mesh::{build_mesh, Geometry};
use crate::profiles::{holder_constant, Profile};
use crate::steady::{self, Normalization, SteadyBranch};

/// `8(λ+λ*)² / (3 inf f (λ-λ*)² (λ+3λ*)) · [1 + ((λ+3λ*)/(2λ+2λ*))^{1/2}]`.
pub fn bound_gg2(lambda: f64, lambda_star: f64, inf_f: f64) -> Result<f64> {
    if !(inf_f > 0.0) {
        return Err(Error::NotApplicable("requires inf f > 0".into()));
    }
    above_fold(lambda, lambda_star)?;
    let (l, s) = (lambda, lambda_star);
    let d = l - s;
    Ok(8.0 * (l + s).powi(2) / (3.0 * inf_f * d * d * (l + 3.0 * s))
        * (1.0 + ((l + 3.0 * s) / (2.0 * l + 2.0 * s)).sqrt()))
}

fn above_fold(lambda: f64, lambda_star: f64) -> Result<()> {
    if !(lambda > lambda_star && lambda_star > 0.0) {
        return Err(Error::DomainError(format!(
            "need lambda > lambda* > 0, got lambda = {lambda}, lambda* = {lambda_star}"
        )));
    }
    Ok(())
}

/// Riccati blow-up time of `F' = a + b F²`, `F(0) = -E₀`.
pub fn blowup_time_f(a: f64, b: f64, e0: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::DomainError(format!("need a, b > 0, got a = {a}, b = {b}")));
    }
    if !(e0 > 0.0 && e0 < 1.0) {
        return Err(Error::DomainError(format!("E0 must lie in (0, 1), got {e0}")));
    }
    Ok((PI / 2.0 + (e0 * (b / a).sqrt()).atan()) / (a * b).sqrt())
}

/// Upper-bound forms for the quenching time near the fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperForm {
    Simplified,
    Arctan,
}

/// Steady-state and profile quantities the bounds are assembled from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundIngredients {
    pub lambda_star: f64,
    pub dimension: usize,
    pub sup_phi_star: f64,
    /// `sup f / (1 - w*)⁴`.
    pub sup_weight: f64,
    /// `∫ φ* / (1 - w*)²`.
    pub integral_phi: f64,
    /// `∫ ψ* f`.
    pub i1: f64,
    /// `∫ ψ* / f`; absent when it diverges.
    pub j: Option<f64>,
    /// `3λ* / J`.
    pub i2: Option<f64>,
    /// `∫ ψ* w*`.
    pub e0: f64,
    pub sup_f: f64,
    pub inf_f: f64,
    /// Hölder exponent and sampled constant of the profile.
    pub alpha: f64,
    pub holder_k: f64,
    pub holder_k_is_estimate: bool,
    pub d_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsOptions {
    /// Evaluate the near-fold bounds for `N >= 8`, where `w*` may be singular.
    pub allow_singular: bool,
    pub holder_samples: usize,
    /// Relative slack of the embedded ordering checks.
    pub ordering_slack: f64,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        Self {
            allow_singular: false,
            holder_samples: (1 << 14) + 1,
            ordering_slack: 0.01,
        }
    }
}

impl BoundIngredients {
    pub fn from_branch(branch: &SteadyBranch, profile: &Profile, opts: &BoundsOptions) -> Result<Self> {
        let mesh = branch.mesh();
        let f = profile.sample(mesh)?;
        let w = branch.w_star.values();
        let phi = branch.phi_star.values();
        let psi = branch.psi_star.values();
        let weights = mesh.weights();
        let quad = |g: &dyn Fn(usize) -> f64| (0..mesh.len()).map(|i| weights[i] * g(i)).sum::<f64>();

        let sup_f = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let inf_f = f.iter().cloned().fold(f64::INFINITY, f64::min);
        let sup_weight = (0..mesh.len())
            .map(|i| f[i] / (1.0 - w[i]).powi(4))
            .fold(f64::NEG_INFINITY, f64::max);
        let integral_phi = quad(&|i| phi[i] / (1.0 - w[i]).powi(2));
        let i1 = quad(&|i| psi[i] * f[i]);
        let e0 = quad(&|i| psi[i] * w[i]);
        let j = if profile.reciprocal_integrable(mesh) {
            Some(quad(&|i| if psi[i] == 0.0 { 0.0 } else { psi[i] / f[i] }))
        } else {
            None
        };
        let alpha = profile.holder_exponent;
        let holder_k = holder_constant(profile, mesh.geometry(), alpha, opts.holder_samples)?;
        Ok(Self {
            lambda_star: branch.lambda_star,
            dimension: mesh.dimension(),
            sup_phi_star: branch.phi_star.sup(),
            sup_weight,
            integral_phi,
            i1,
            j,
            i2: j.map(|j| 3.0 * branch.lambda_star / j),
            e0,
            sup_f,
            inf_f,
            alpha,
            holder_k,
            holder_k_is_estimate: true,
            d_n: dirichlet_constant(mesh.dimension())?,
        })
    }

    fn check_regular(&self, opts: &BoundsOptions) -> Result<()> {
        if self.dimension >= 8 && !opts.allow_singular {
            return Err(Error::NotApplicable(format!(
                "N = {} >= 8: the extremal solution may be singular",
                self.dimension
            )));
        }
        Ok(())
    }
}

/// `T_L = [sup φ* / (12 λ* sup(f/(1-w*)⁴) ∫φ*/(1-w*)²)]^{1/2} (λ-λ*)^{-1/2}`.
pub fn bound_lower_tl(lambda: f64, ing: &BoundIngredients, opts: &BoundsOptions) -> Result<f64> {
    ing.check_regular(opts)?;
    above_fold(lambda, ing.lambda_star)?;
    let c = ing.sup_phi_star / (12.0 * ing.lambda_star * ing.sup_weight * ing.integral_phi);
    Ok((c / (lambda - ing.lambda_star)).sqrt())
}

pub fn bound_upper_t1(lambda: f64, ing: &BoundIngredients, form: UpperForm, opts: &BoundsOptions) -> Result<f64> {
    ing.check_regular(opts)?;
    above_fold(lambda, ing.lambda_star)?;
    let (j, i2) = match (ing.j, ing.i2) {
        (Some(j), Some(i2)) => (j, i2),
        _ => return Err(Error::NotApplicable("∫ψ*/f diverges".into())),
    };
    let d = lambda - ing.lambda_star;
    Ok(match form {
        UpperForm::Simplified => 3f64.sqrt() * PI / 4.0 * (j / (ing.lambda_star * ing.i1)).sqrt() / d.sqrt(),
        UpperForm::Arctan => (PI / 4.0 + (i2 / (d * ing.i1)).sqrt().atan()) / (d * ing.i1 * i2).sqrt(),
    })
}

/// First Dirichlet eigenvalue of the unit ball in dimension `N`.
///
/// `π²/4` for the interval `(-1, 1)`; otherwise the radial eigen-solver on a
/// 4001-node mesh, cached per dimension.
pub fn dirichlet_constant(dimension: usize) -> Result<f64> {
    if dimension == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    if dimension == 1 {
        return Ok(PI * PI / 4.0);
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&dimension) {
        return Ok(*v);
    }
    let mesh = build_mesh(Geometry::RadialBall { dimension, radius: 1.0 }, 4001)?;
    let zero = vec![0.0; mesh.len()];
    let d = steady::eigenpair_at(&mesh, &zero, 0.0, &zero, Normalization::L2)?.eigenvalue;
    cache.lock().unwrap().insert(dimension, d);
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeLambdaBounds {
    /// `1 / (3λ sup f)`.
    pub lower: f64,
    /// `1 / (3λ (sup f - ε))` when `ε < sup f`.
    pub upper: Option<f64>,
    pub epsilon: f64,
    /// `(ε / 2K)^{1/α}`; absent when `K = 0` leaves it unconstrained.
    pub delta: Option<f64>,
    /// `D δ^{-2}`.
    pub mu1_delta: Option<f64>,
    /// Whether `λ` is large enough for the upper bound to exist.
    pub lambda0_indicator: bool,
    /// `(2 + 2α) / (2 + α)`: decay exponent of the `C λ^{-(2+2α)/(2+α)}` gap.
    pub gap_exponent: f64,
}

/// `ε = 2 D^{α/(2+α)} K^{2/(2+α)} λ^{-α/(2+α)}`.
pub fn large_lambda_bounds(lambda: f64, sup_f: f64, alpha: f64, holder_k: f64, dimension: usize) -> Result<LargeLambdaBounds> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::DomainError(format!("lambda must be positive, got {lambda}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) || !(sup_f > 0.0) || holder_k < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "need alpha in (0, 1], sup f > 0, K >= 0; got {alpha}, {sup_f}, {holder_k}"
        )));
    }
    let lower = 1.0 / (3.0 * lambda * sup_f);
    let gap_exponent = (2.0 + 2.0 * alpha) / (2.0 + alpha);
    if holder_k == 0.0 {
        return Ok(LargeLambdaBounds {
            lower,
            upper: Some(lower),
            epsilon: 0.0,
            delta: None,
            mu1_delta: None,
            lambda0_indicator: true,
            gap_exponent,
        });
    }
    let d = dirichlet_constant(dimension)?;
    let p = alpha / (2.0 + alpha);
    let epsilon = 2.0 * d.powf(p) * holder_k.powf(2.0 / (2.0 + alpha)) / lambda.powf(p);
    let delta = (epsilon / (2.0 * holder_k)).powf(1.0 / alpha);
    let margin = sup_f - epsilon;
    Ok(LargeLambdaBounds {
        lower,
        upper: (margin > 0.0).then(|| 1.0 / (3.0 * lambda * margin)),
        epsilon,
        delta: Some(delta),
        mu1_delta: Some(d / (delta * delta)),
        lambda0_indicator: margin > 0.0,
        gap_exponent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationCheck {
    pub point: f64,
    pub f_at_point: f64,
    /// `(sup f)^{1/3} - f(a)^{1/3}`.
    pub lhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationBound {
    pub points: Vec<LocationCheck>,
    /// `α / (2 + α)`.
    pub decay_exponent_target: f64,
}

pub fn location_bound_check(report: &QuenchReport, profile: &Profile, sup_f: f64) -> Result<LocationBound> {
    if !report.quenched || report.quench_set.is_empty() {
        return Err(Error::MissingData("quench set is empty".into()));
    }
    let alpha = profile.holder_exponent;
    let points = report
        .quench_set
        .iter()
        .map(|&a| {
            let fa = profile.eval(a)?;
            Ok(LocationCheck {
                point: a,
                f_at_point: fa,
                lhs: sup_f.cbrt() - fa.cbrt(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(LocationBound {
        points,
        decay_exponent_target: alpha / (2.0 + alpha),
    })
}

/// A bound value or the reason it was not evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: Option<f64>,
    pub applicable: bool,
    pub reason: Option<String>,
}

impl BoundValue {
    fn from_result(r: Result<f64>) -> Self {
        match r {
            Ok(v) => Self { value: Some(v), applicable: true, reason: None },
            Err(e) => Self::absent(e.to_string()),
        }
    }

    fn absent(reason: impl Into<String>) -> Self {
        Self { value: None, applicable: false, reason: Some(reason.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lambda: f64,
    pub lambda_star: f64,
    pub ingredients: BoundIngredients,
    pub bound_gg2: BoundValue,
    pub t_lower: BoundValue,
    pub t1_simplified: BoundValue,
    pub t1_arctan: BoundValue,
    pub large_lambda_lower: BoundValue,
    pub large_lambda_upper: BoundValue,
    pub large_lambda: Option<LargeLambdaBounds>,
    pub location: Option<LocationBound>,
    pub measured_t: Option<f64>,
    /// `max(lower bounds) <= T (1 + slack)`.
    pub lower_ordering_ok: Option<bool>,
    /// `T <= min(near-fold upper bounds) (1 + slack)`.
    pub upper_ordering_ok: Option<bool>,
    /// `lower_1_7 <= T <= upper_1_7 (1 + slack)`; only meaningful for `λ >= λ₀`.
    pub large_lambda_sandwich_ok: Option<bool>,
    /// `T̄₁(arctan) <= T̄₁(simplified) (1 + slack)`.
    pub t1_forms_ordered: Option<bool>,
    pub ordering_slack: f64,
    pub holder_constant_note: String,
}

pub fn evaluate_all(
    lambda: f64,
    branch: &SteadyBranch,
    profile: &Profile,
    quench: Option<&QuenchReport>,
    opts: &BoundsOptions,
) -> Result<BoundsReport> {
    let ing = BoundIngredients::from_branch(branch, profile, opts)?;
    let ls = ing.lambda_star;
    let below = !(lambda > ls);
    let below_reason = format!("lambda = {lambda} <= lambda* = {ls}: no finite-time quenching");
    let eval = |r: Result<f64>| {
        if below {
            BoundValue::absent(below_reason.clone())
        } else {
            BoundValue::from_result(r)
        }
    };

    let gg2 = eval(bound_gg2(lambda, ls, ing.inf_f));
    let tl = eval(bound_lower_tl(lambda, &ing, opts));
    let t1s = eval(bound_upper_t1(lambda, &ing, UpperForm::Simplified, opts));
    let t1a = eval(bound_upper_t1(lambda, &ing, UpperForm::Arctan, opts));
    let large = large_lambda_bounds(lambda, ing.sup_f, ing.alpha, ing.holder_k, ing.dimension)?;
    let (ll, lu) = if below {
        (BoundValue::absent(below_reason.clone()), BoundValue::absent(below_reason.clone()))
    } else {
        (
            BoundValue::from_result(Ok(large.lower)),
            match large.upper {
                Some(u) => BoundValue::from_result(Ok(u)),
                None => BoundValue::absent(format!("epsilon = {} >= sup f", large.epsilon)),
            },
        )
    };

    let measured = quench.and_then(|q| q.quench_time);
    let location = quench
        .filter(|q| q.quenched && !q.quench_set.is_empty())
        .map(|q| location_bound_check(q, profile, ing.sup_f))
        .transpose()?;
    let slack = opts.ordering_slack;
    let lowers: Vec<f64> = [&tl, &ll].iter().filter_map(|b| b.value).collect();
    let uppers: Vec<f64> = [&gg2, &t1s, &t1a].iter().filter_map(|b| b.value).collect();
    let lower_ordering_ok = measured
        .filter(|_| !lowers.is_empty())
        .map(|t| lowers.iter().all(|l| *l <= t * (1.0 + slack)));
    let upper_ordering_ok = measured
        .filter(|_| !uppers.is_empty())
        .map(|t| uppers.iter().all(|u| t <= u * (1.0 + slack)));
    let large_lambda_sandwich_ok = match (measured, ll.value, lu.value) {
        (Some(t), Some(lo), Some(up)) => Some(lo <= t * (1.0 + slack) && t <= up * (1.0 + slack)),
        _ => None,
    };
    let t1_forms_ordered = match (t1a.value, t1s.value) {
        (Some(a), Some(s)) => Some(a <= s * (1.0 + slack)),
        _ => None,
    };

    Ok(BoundsReport {
        lambda,
        lambda_star: ls,
        bound_gg2: gg2,
        t_lower: tl,
        t1_simplified: t1s,
        t1_arctan: t1a,
        large_lambda_lower: ll,
        large_lambda_upper: lu,
        large_lambda: Some(large),
        location,
        measured_t: measured,
        lower_ordering_ok,
        upper_ordering_ok,
        large_lambda_sandwich_ok,
        t1_forms_ordered,
        ordering_slack: slack,
        holder_constant_note: format!(
            "K = {} is a pair-sampled lower estimate on {} samples",
            ing.holder_k, opts.holder_samples
        ),
        ingredients: ing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gg2_at_twice_the_fold() {
        let s = 1.7;
        let v = bound_gg2(2.0 * s, s, 1.0).unwrap();
        assert_relative_eq!(v, 24.0 / (5.0 * s) * (1.0 + (5.0f64 / 6.0).sqrt()), max_relative = 1e-14);
        assert!((v * s - 9.1818).abs() < 1e-4);
    }

    #[test]
    fn gg2_large_lambda_limit() {
        let s = 1.4;
        let l = 1e6 * s;
        let asym = 8.0 / (3.0 * l) * (1.0 + 0.5f64.sqrt());
        assert!((bound_gg2(l, s, 1.0).unwrap() / asym - 1.0).abs() < 0.01);
    }

    #[test]
    fn gg2_domain() {
        assert!(matches!(bound_gg2(2.0, 1.0, 0.0), Err(Error::NotApplicable(_))));
        assert!(matches!(bound_gg2(1.0, 1.0, 1.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn riccati_closed_forms() {
        assert_relative_eq!(blowup_time_f(1.0, 4.0, 0.5).unwrap(), 3.0 * PI / 8.0, max_relative = 1e-15);
        assert!((blowup_time_f(1.0, 1.0, 1e-12).unwrap() - PI / 2.0).abs() < 1e-11);
        assert!(blowup_time_f(1.0, 1.0, 1.0).is_err());
        assert!(blowup_time_f(0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn dirichlet_constants() {
        assert_relative_eq!(dirichlet_constant(1).unwrap(), PI * PI / 4.0);
        // j_{0,1}² and π²
        assert!((dirichlet_constant(2).unwrap() - 2.404825557695773f64.powi(2)).abs() < 1e-4);
        assert!((dirichlet_constant(3).unwrap() - PI * PI).abs() < 1e-4);
    }

    #[test]
    fn constant_profile_collapses_sandwich() {
        let b = large_lambda_bounds(1e3, 0.5, 1.0, 0.0, 1).unwrap();
        assert_eq!(b.upper, Some(b.lower));
        assert_eq!(b.epsilon, 0.0);
        assert_relative_eq!(b.lower, 1.0 / 1.5e3);
    }

    #[test]
    fn large_lambda_assembly() {
        let b = large_lambda_bounds(1e5, 1.0, 1.0, 8.0, 1).unwrap();
        assert!((b.lower - 3.33333e-6).abs() < 1e-11);
        let eps = 2.0 * (PI * PI / 4.0).cbrt() * 64f64.cbrt() / 1e5f64.cbrt();
        assert_relative_eq!(b.epsilon, eps, max_relative = 1e-14);
        assert_relative_eq!(b.delta.unwrap(), eps / 16.0, max_relative = 1e-14);
        assert!(b.lower < b.upper.unwrap());
        assert_relative_eq!(b.gap_exponent, 4.0 / 3.0);
        assert!(large_lambda_bounds(1e2, 1.0, 1.0, 8.0, 1).unwrap().upper.is_none());
    }
}

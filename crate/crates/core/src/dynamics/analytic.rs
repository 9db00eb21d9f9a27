//! Closed-form companions of the time-dependent problem: the Liapunov
//! functional, the supersolution transform `Φ_ε`, and the spatially
//! homogeneous comparison solution `η(t)`.

use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};
use crate::profiles::Profile;

/// `V(u) = ½∫|∇u|² - λ∫ f / (1 - u)`.
pub fn liapunov(state: &Field, lambda: f64, profile: &Profile) -> Result<f64> {
    let mesh = state.mesh();
    let f = profile.sample(mesh)?;
    liapunov_values(mesh, state.values(), lambda, &f)
}

pub(crate) fn liapunov_values(mesh: &Mesh, u: &[f64], lambda: f64, f: &[f64]) -> Result<f64> {
    let h = mesh.spacing();
    let mut dirichlet = 0.0;
    for i in 0..u.len() - 1 {
        let du = u[i + 1] - u[i];
        dirichlet += mesh.face_area(i) * du * du / h;
    }
    let mut potential = 0.0;
    for ((w, ui), fi) in mesh.weights().iter().zip(u).zip(f) {
        let gap = 1.0 - ui;
        if gap < 1e-14 {
            return Err(Error::Overflow(gap));
        }
        potential += w * fi / gap;
    }
    Ok(0.5 * dirichlet - lambda * potential)
}

/// `Φ_ε(u) = 1 - [ε/λ + (λ - ε)/λ · (1 - u)³]^{1/3}`.
pub fn supersolution_transform(u: f64, lambda: f64, eps: f64) -> Result<f64> {
    check_eps(lambda, eps)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::DomainError(format!("u = {u} outside [0, 1]")));
    }
    let g = 1.0 - u;
    Ok(1.0 - (eps / lambda + (lambda - eps) / lambda * g * g * g).cbrt())
}

/// `C_ε = Φ_ε(1) = 1 - (ε/λ)^{1/3}`.
pub fn supersolution_cap(lambda: f64, eps: f64) -> Result<f64> {
    check_eps(lambda, eps)?;
    Ok(1.0 - (eps / lambda).cbrt())
}

fn check_eps(lambda: f64, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < lambda) {
        return Err(Error::DomainError(format!("need 0 < eps < lambda, got eps = {eps}, lambda = {lambda}")));
    }
    Ok(())
}

/// Quench time `1 / (3λM)` of `η' = λM / (1 - η)²`, `η(0) = 0`.
pub fn eta_quench_time(lambda: f64, sup_f: f64) -> Result<f64> {
    let lm = lambda * sup_f;
    if !(lm > 0.0 && lm.is_finite()) {
        return Err(Error::DomainError(format!("need lambda * M > 0, got {lm}")));
    }
    Ok(1.0 / (3.0 * lm))
}

/// `η(t) = 1 - (1 - 3λMt)^{1/3}` for `t` before the quench time.
pub fn comparison_eta(lambda: f64, sup_f: f64, t: f64) -> Result<f64> {
    let t_star = eta_quench_time(lambda, sup_f)?;
    if !(t >= 0.0 && t < t_star) {
        return Err(Error::DomainError(format!("t = {t} outside [0, {t_star})")));
    }
    Ok(1.0 - (1.0 - 3.0 * lambda * sup_f * t).cbrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, Geometry};
    use approx::assert_relative_eq;

    #[test]
    fn liapunov_of_zero_state() {
        let m = build_mesh(Geometry::Slab { x_left: -0.5, x_right: 0.5 }, 51).unwrap();
        let z = Field::zeros(m);
        let one = Profile::constant(1.0).unwrap();
        assert_relative_eq!(liapunov(&z, 1.0, &one).unwrap(), -1.0, epsilon = 1e-14);
        assert_eq!(liapunov(&z, 0.0, &one).unwrap(), 0.0);
    }

    #[test]
    fn liapunov_overflow_guard() {
        let m = build_mesh(Geometry::Slab { x_left: -0.5, x_right: 0.5 }, 5).unwrap();
        let u = Field::new(m, vec![0.0, 0.5, 1.0 - 1e-16, 0.5, 0.0]).unwrap();
        assert!(matches!(
            liapunov(&u, 1.0, &Profile::constant(1.0).unwrap()),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn transform_values() {
        assert!(supersolution_transform(0.0, 2.0, 0.3).unwrap().abs() < 1e-15);
        assert_relative_eq!(
            supersolution_transform(1.0, 2.0, 0.3).unwrap(),
            supersolution_cap(2.0, 0.3).unwrap(),
            epsilon = 1e-15
        );
        assert_relative_eq!(supersolution_cap(2.0, 0.3).unwrap(), 1.0 - 0.15f64.cbrt(), epsilon = 1e-15);
        // hand evaluation: 1 - (1/2 + 1/16)^{1/3} = 1 - (9/16)^{1/3}
        let v = supersolution_transform(0.5, 1.0, 0.5).unwrap();
        assert_relative_eq!(v, 1.0 - (9.0f64 / 16.0).cbrt(), epsilon = 1e-15);
        assert!((v - 0.174518).abs() < 1e-6);
        assert!(supersolution_transform(0.5, 1.0, 1.0).is_err());
        assert!(supersolution_transform(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn comparison_solution() {
        assert_relative_eq!(eta_quench_time(1.0, 1.0 / 3.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(eta_quench_time(1e5, 1.0).unwrap(), 1.0 / 3e5, epsilon = 1e-20);
        let eta = comparison_eta(1.0, 1.0 / 3.0, 0.5).unwrap();
        assert_relative_eq!(eta, 1.0 - 0.5f64.cbrt(), epsilon = 1e-15);
        assert!((eta - 0.20630).abs() < 1e-5);
        assert!(comparison_eta(1.0, 1.0 / 3.0, 1.0).is_err());
        // η solves η' = λM/(1-η)²: centred difference check
        let (l, m, t, h) = (2.0, 0.7, 0.1, 1e-6);
        let d = (comparison_eta(l, m, t + h).unwrap() - comparison_eta(l, m, t - h).unwrap()) / (2.0 * h);
        let e = comparison_eta(l, m, t).unwrap();
        assert_relative_eq!(d, l * m / ((1.0 - e) * (1.0 - e)), max_relative = 1e-8);
    }
}

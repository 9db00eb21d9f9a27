//! Independent reference solutions shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use quench_core::{build_mesh, Geometry, Mesh};

pub fn unit_slab(n: usize) -> Arc<Mesh> {
    build_mesh(Geometry::Slab { x_left: -0.5, x_right: 0.5 }, n).unwrap()
}

/// Shooting for `-w'' = λ/(1-w)²` on `(-1/2, 1/2)` with `f ≡ 1`.
///
/// With `x = s/√λ`, `W'' = -1/(1-W)²`, `W(0) = m`, `W'(0) = 0`; if `W`
/// first vanishes at `s₀(m)` then `λ = 4 s₀(m)²`.
pub mod shooting {
    fn rhs(y: [f64; 2]) -> [f64; 2] {
        [y[1], -1.0 / ((1.0 - y[0]) * (1.0 - y[0]))]
    }

    /// First zero of `W` for peak value `m`, by RK4 and a final secant.
    pub fn first_zero(m: f64) -> f64 {
        let h = 1e-4;
        let mut s = 0.0;
        let mut y = [m, 0.0];
        loop {
            let k1 = rhs(y);
            let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
            let next = [
                y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            if next[0] <= 0.0 {
                // cubic Hermite root on the last step
                let (mut a, mut b) = (0.0, h);
                let herm = |t: f64| {
                    let u = t / h;
                    let h00 = 2.0 * u * u * u - 3.0 * u * u + 1.0;
                    let h10 = u * u * u - 2.0 * u * u + u;
                    let h01 = -2.0 * u * u * u + 3.0 * u * u;
                    let h11 = u * u * u - u * u;
                    h00 * y[0] + h10 * h * y[1] + h01 * next[0] + h11 * h * next[1]
                };
                for _ in 0..60 {
                    let c = 0.5 * (a + b);
                    if herm(c) > 0.0 {
                        a = c;
                    } else {
                        b = c;
                    }
                }
                return s + 0.5 * (a + b);
            }
            y = next;
            s += h;
        }
    }

    pub fn lambda_of_peak(m: f64) -> f64 {
        let s0 = first_zero(m);
        4.0 * s0 * s0
    }

    /// `(λ*, peak at the fold)` by golden-section search on `m`.
    pub fn fold() -> (f64, f64) {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (0.1, 0.7);
        for _ in 0..60 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if lambda_of_peak(c) > lambda_of_peak(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let m = 0.5 * (a + b);
        (lambda_of_peak(m), m)
    }

    /// Peak of the minimal solution at `λ < λ*`.
    pub fn minimal_peak(lambda: f64) -> f64 {
        let (_, m_star) = fold();
        let (mut a, mut b) = (0.0, m_star);
        for _ in 0..60 {
            let c = 0.5 * (a + b);
            if lambda_of_peak(c) < lambda {
                a = c;
            } else {
                b = c;
            }
        }
        0.5 * (a + b)
    }
}

/// Adaptive Runge–Kutta–Fehlberg integration of the Riccati equation
/// `F' = a + b F²`, `F(0) = -E₀`, to its blow-up.
///
/// Integrates `F` while `F < 1`, then `G = 1/F` (`G' = -(a G² + b)`) until
/// `G` crosses zero, which is the blow-up instant.
pub fn riccati_blowup(a: f64, b: f64, e0: f64) -> f64 {
    fn rkf45(
        f: &dyn Fn(f64) -> f64,
        mut y: f64,
        mut t: f64,
        stop: &dyn Fn(f64) -> bool,
        tol: f64,
    ) -> (f64, f64, f64, f64) {
        let mut h = 1e-3;
        loop {
            let k1 = f(y);
            let k2 = f(y + h * k1 / 4.0);
            let k3 = f(y + h * (3.0 * k1 + 9.0 * k2) / 32.0);
            let k4 = f(y + h * (1932.0 * k1 - 7200.0 * k2 + 7296.0 * k3) / 2197.0);
            let k5 = f(y + h * (439.0 * k1 / 216.0 - 8.0 * k2 + 3680.0 * k3 / 513.0 - 845.0 * k4 / 4104.0));
            let k6 = f(y + h
                * (-8.0 * k1 / 27.0 + 2.0 * k2 - 3544.0 * k3 / 2565.0 + 1859.0 * k4 / 4104.0 - 11.0 * k5 / 40.0));
            let y4 = y + h * (25.0 * k1 / 216.0 + 1408.0 * k3 / 2565.0 + 2197.0 * k4 / 4104.0 - k5 / 5.0);
            let y5 = y + h
                * (16.0 * k1 / 135.0 + 6656.0 * k3 / 12825.0 + 28561.0 * k4 / 56430.0 - 9.0 * k5 / 50.0
                    + 2.0 * k6 / 55.0);
            let err = (y5 - y4).abs();
            if err <= tol * (1.0 + y.abs()) {
                if stop(y5) {
                    return (t, y, h, y5);
                }
                t += h;
                y = y5;
                h *= 1.5f64.min(0.9 * (tol * (1.0 + y.abs()) / err.max(1e-300)).powf(0.2));
            } else {
                h *= 0.5f64.max(0.9 * (tol * (1.0 + y.abs()) / err).powf(0.25));
            }
        }
    }
    let tol = 1e-13;
    // phase 1: F from -E0 up to 1
    let fp = move |y: f64| a + b * y * y;
    let (mut t, mut y, _, _) = rkf45(&fp, -e0, 0.0, &|y| y >= 1.0, tol);
    // finish phase 1 exactly at F = 1 by Newton on the remaining time
    while (1.0 - y).abs() > 1e-14 {
        let dt = (1.0 - y) / fp(y);
        let (t2, y2) = rk4_fixed(&fp, y, t, dt, 64);
        t = t2;
        y = y2;
    }
    // phase 2: G = 1/F from 1 down to 0
    let gp = move |g: f64| -(a * g * g + b);
    let (mut t, mut g, _, _) = rkf45(&gp, 1.0, t, &|g| g <= 1e-3, tol);
    while g.abs() > 1e-15 {
        let dt = -g / gp(g);
        let (t2, g2) = rk4_fixed(&gp, g, t, dt, 64);
        t = t2;
        g = g2;
    }
    t
}

fn rk4_fixed(f: &dyn Fn(f64) -> f64, mut y: f64, t: f64, span: f64, steps: usize) -> (f64, f64) {
    let h = span / steps as f64;
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    (t + span, y)
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

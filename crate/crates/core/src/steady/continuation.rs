//! Pseudo-arclength continuation of the minimal branch through the fold.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    eigenpair_at, effective_tolerance, first_eigenvalue, forcing, jacobian, residual, sup_norm,
    Normalization, SteadyOptions, SteadyState,
};
use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};
use crate::profiles::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationOptions {
    /// Arclength step in the `(L²(Ω) × R)` norm.
    pub ds: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    pub max_steps: usize,
    /// Number of times the fold neighbourhood is re-traced with `ds / 8`.
    pub fold_refinements: usize,
    /// Points kept beyond the fold before stopping.
    pub steps_past_fold: usize,
    pub newton: SteadyOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            ds: 0.05,
            ds_min: 1e-9,
            ds_max: 0.2,
            max_steps: 4000,
            fold_refinements: 3,
            steps_past_fold: 4,
            newton: SteadyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub sup_w: f64,
    pub mu1: f64,
}

#[derive(Debug, Clone)]
pub struct SteadyBranch {
    /// Minimal branch, `λ` strictly increasing up to the fold.
    pub states: Vec<SteadyState>,
    /// Points traced beyond the fold (upper branch, `μ₁ < 0`).
    pub beyond_fold: Vec<BranchPoint>,
    /// Vertex of the quadratic fit of `λ(‖w‖∞)` at the fold.
    pub lambda_star: f64,
    /// `‖w‖∞` at the fitted vertex.
    pub sup_w_star: f64,
    /// Discrete solution nearest the fold, and the `λ` it solves.
    pub w_star: Field,
    pub lambda_at_w_star: f64,
    pub mu1_at_w_star: f64,
    pub phi_star: Field,
    pub psi_star: Field,
}

impl SteadyBranch {
    /// `(λ, sup w, μ₁)` for every traced point, minimal branch first.
    pub fn points(&self) -> Vec<BranchPoint> {
        self.states
            .iter()
            .map(|s| BranchPoint {
                lambda: s.lambda,
                sup_w: s.w.sup(),
                mu1: s.mu1,
            })
            .chain(self.beyond_fold.iter().cloned())
            .collect()
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.w_star.mesh()
    }
}

#[derive(Debug, Clone)]
struct Point {
    w: Vec<f64>,
    lambda: f64,
    residual: f64,
}

struct Tracer<'a> {
    mesh: &'a Mesh,
    f: &'a [f64],
    opts: &'a ContinuationOptions,
}

impl Tracer<'_> {
    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.mesh
            .weights()
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }

    /// Unit secant `(Δw, Δλ)` between two points.
    fn secant(&self, from: &Point, to: &Point) -> (Vec<f64>, f64) {
        let dw: Vec<f64> = to.w.iter().zip(&from.w).map(|(a, b)| a - b).collect();
        let dl = to.lambda - from.lambda;
        let norm = (self.dot(&dw, &dw) + dl * dl).sqrt();
        (dw.into_iter().map(|v| v / norm).collect(), dl / norm)
    }

    /// Tangent at `λ = 0, w = 0`, where `dw/dλ` solves `-Δ ẇ = f`.
    fn initial_tangent(&self) -> Result<(Vec<f64>, f64)> {
        let n = self.mesh.len();
        let zero = vec![0.0; n];
        let j = jacobian(self.mesh, self.f, 0.0, &zero);
        let mut rhs = vec![0.0; n];
        for i in self.mesh.free_range() {
            rhs[i] = self.f[i];
        }
        let b = j.solve(&rhs)?;
        let norm = (self.dot(&b, &b) + 1.0).sqrt();
        Ok((b.into_iter().map(|v| v / norm).collect(), 1.0 / norm))
    }

    /// Newton on the bordered system from the predictor `x + ds t`.
    fn correct(&self, from: &Point, tangent: &(Vec<f64>, f64), ds: f64) -> Option<(Point, usize)> {
        let (tw, tl) = tangent;
        let wp: Vec<f64> = from.w.iter().zip(tw).map(|(w, t)| w + ds * t).collect();
        let lp = from.lambda + ds * tl;
        if wp.iter().any(|v| *v >= 1.0) {
            return None;
        }
        let mut w = wp.clone();
        let mut lambda = lp;
        let free = self.mesh.free_range();
        for iter in 0..25 {
            let g = residual(self.mesh, self.f, lambda, &w);
            let dw: Vec<f64> = w.iter().zip(&wp).map(|(a, b)| a - b).collect();
            let constraint = self.dot(tw, &dw) + tl * (lambda - lp);
            let gnorm = sup_norm(&g);
            if !gnorm.is_finite() {
                return None;
            }
            let tol = effective_tolerance(self.mesh, self.f, lambda, &w, self.opts.newton.tolerance);
            if gnorm <= tol && constraint.abs() <= 1e-12 * ds.max(1e-3) {
                return Some((Point { w, lambda, residual: gnorm }, iter));
            }
            let j = jacobian(self.mesh, self.f, lambda, &w);
            let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
            let mut j_lambda = vec![0.0; w.len()];
            for i in free.clone() {
                j_lambda[i] = self.f[i] * forcing(w[i]);
            }
            let a = j.solve(&neg_g).ok()?;
            let b = j.solve(&j_lambda).ok()?;
            let denom = self.dot(tw, &b) + tl;
            if denom == 0.0 || !denom.is_finite() {
                return None;
            }
            let dl = (-constraint - self.dot(tw, &a)) / denom;
            let step: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + dl * y).collect();
            let mut theta = 1.0;
            while w.iter().zip(&step).any(|(v, s)| v + theta * s >= 1.0 - 1e-12) {
                theta *= 0.5;
                if theta < 1e-6 {
                    return None;
                }
            }
            for (v, s) in w.iter_mut().zip(&step) {
                *v += theta * s;
            }
            lambda += theta * dl;
        }
        None
    }

    /// Traces from `start` along `tangent` until the branch has turned and
    /// `steps_past_fold` points lie beyond the fold.
    fn trace(&self, start: Point, mut tangent: (Vec<f64>, f64), mut ds: f64, ds_max: f64) -> Result<Vec<Point>> {
        let mut path = vec![start];
        let mut fold_at: Option<usize> = None;
        for _ in 0..self.opts.max_steps {
            let last = path.last().unwrap();
            let (next, iters) = loop {
                if let Some(found) = self.correct(last, &tangent, ds) {
                    break found;
                }
                ds *= 0.5;
                if ds < self.opts.ds_min {
                    return Err(Error::StepFailure {
                        last_lambda: last.lambda,
                        last_sup: sup_norm(&last.w),
                    });
                }
            };
            tangent = self.secant(last, &next);
            if iters <= 3 {
                ds = (ds * 1.5).min(ds_max);
            }
            let turned = next.lambda < last.lambda;
            path.push(next);
            if turned && fold_at.is_none() {
                fold_at = Some(path.len() - 2);
            }
            if let Some(k) = fold_at {
                if path.len() > k + self.opts.steps_past_fold {
                    return Ok(path);
                }
            }
            if sup_norm(&path.last().unwrap().w) > 0.98 {
                break;
            }
        }
        if fold_at.is_some() {
            Ok(path)
        } else {
            let last = path.last().unwrap();
            Err(Error::StepFailure {
                last_lambda: last.lambda,
                last_sup: sup_norm(&last.w),
            })
        }
    }
}

fn fold_index(path: &[Point]) -> usize {
    path.iter()
        .enumerate()
        .max_by(|a, b| a.1.lambda.total_cmp(&b.1.lambda))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Vertex of the least-squares parabola `λ = a + b s + c s²` through the
/// given `(s, λ)` samples; `None` if the fit does not open downward.
pub(crate) fn quadratic_vertex(samples: &[(f64, f64)]) -> Option<(f64, f64)> {
    if samples.len() < 3 {
        return None;
    }
    let s0 = samples.iter().map(|p| p.0).sum::<f64>() / samples.len() as f64;
    let scale = samples.iter().fold(0.0f64, |m, p| m.max((p.0 - s0).abs())).max(1e-300);
    // normal equations in centred, scaled abscissa
    let mut m = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for &(s, l) in samples {
        let x = (s - s0) / scale;
        let basis = [1.0, x, x * x];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
            r[i] += basis[i] * l;
        }
    }
    let coef = solve3(m, r)?;
    let (a, b, c) = (coef[0], coef[1], coef[2]);
    if !(c < 0.0) {
        return None;
    }
    let x_star = -b / (2.0 * c);
    Some((s0 + x_star * scale, a - b * b / (4.0 * c)))
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= factor * m[col][k];
            }
            r[row] -= factor * r[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let mut s = r[i];
        for k in i + 1..3 {
            s -= m[i][k] * x[k];
        }
        x[i] = s / m[i][i];
    }
    Some(x)
}

pub fn continue_branch(profile: &Profile, mesh: &Arc<Mesh>, opts: &ContinuationOptions) -> Result<SteadyBranch> {
    if !(opts.ds > 0.0) {
        return Err(Error::InvalidArgument(format!("continuation step must be positive, got {}", opts.ds)));
    }
    let f = profile.sample(mesh)?;
    let tracer = Tracer { mesh, f: &f, opts };

    let origin = Point {
        w: vec![0.0; mesh.len()],
        lambda: 0.0,
        residual: 0.0,
    };
    let mut path = tracer.trace(origin, tracer.initial_tangent()?, opts.ds, opts.ds_max)?;

    // re-trace the turning region with finer steps
    let mut ds = opts.ds;
    for _ in 0..opts.fold_refinements {
        let k = fold_index(&path);
        if k < 2 {
            break;
        }
        ds /= 8.0;
        let tangent = tracer.secant(&path[k - 2], &path[k - 1]);
        let fine = tracer.trace(path[k - 1].clone(), tangent, ds, ds)?;
        path.truncate(k - 1);
        path.extend(fine);
    }

    let k = fold_index(&path);
    let lo = k.saturating_sub(2);
    let hi = (k + 3).min(path.len());
    let window: Vec<(f64, f64)> = path[lo..hi].iter().map(|p| (sup_norm(&p.w), p.lambda)).collect();
    let (sup_w_star, lambda_star) = quadratic_vertex(&window)
        .filter(|(_, l)| *l >= path[k].lambda && *l <= path[k].lambda * (1.0 + 1e-3))
        .unwrap_or((sup_norm(&path[k].w), path[k].lambda));

    let nearest = path
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (sup_norm(&a.1.w) - sup_w_star)
                .abs()
                .total_cmp(&(sup_norm(&b.1.w) - sup_w_star).abs())
        })
        .map(|(i, _)| i)
        .unwrap_or(k);

    let mut states = Vec::with_capacity(k + 1);
    for p in &path[..=k] {
        let mu1 = first_eigenvalue(mesh, &f, p.lambda, &p.w)?;
        states.push(SteadyState {
            lambda: p.lambda,
            w: Field::new(mesh.clone(), p.w.clone())?,
            residual_norm: p.residual,
            mu1,
        });
    }
    let mut beyond_fold = Vec::new();
    for p in &path[k + 1..] {
        beyond_fold.push(BranchPoint {
            lambda: p.lambda,
            sup_w: sup_norm(&p.w),
            mu1: first_eigenvalue(mesh, &f, p.lambda, &p.w)?,
        });
    }

    let star = &path[nearest];
    let phi = eigenpair_at(mesh, &f, star.lambda, &star.w, Normalization::L2)?;
    let psi = eigenpair_at(mesh, &f, star.lambda, &star.w, Normalization::L1)?;
    Ok(SteadyBranch {
        states,
        beyond_fold,
        lambda_star,
        sup_w_star,
        w_star: Field::new(mesh.clone(), star.w.clone())?,
        lambda_at_w_star: star.lambda,
        mu1_at_w_star: phi.eigenvalue,
        phi_star: phi.eigenfunction,
        psi_star: psi.eigenfunction,
    })
}

//! Time integration of `u_t = Δu + λ f / (1 - u)²` from `u = 0`.
//!
//! Each step is a Crank–Nicolson step whose nonlinear stage equation is
//! solved by Newton's method on the tridiagonal Jacobian. The step size is
//! chosen so that `sup u` rises by at most `eta_step · (1 - sup u)` per step,
//! which resolves the final decades of the approach to `u = 1`.

mod analytic;
mod quench;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};
use crate::profiles::Profile;
use crate::steady::{self, SteadyOptions};

pub use analytic::{
    comparison_eta, eta_quench_time, liapunov, supersolution_cap, supersolution_transform,
};
pub use quench::{detect_quench, rate_fit, QuenchReport, RateFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepController {
    /// Step limited by the increment of `sup u`.
    Adaptive,
    /// Constant `dt_initial` (halved only if a Newton solve fails).
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub dt_initial: f64,
    pub dt_max: f64,
    /// Target relative increment `η` of `sup u` per step.
    pub eta_step: f64,
    /// Integration stops once `sup u >= 1 - quench_eps`.
    pub quench_eps: f64,
    pub t_max: f64,
    pub snapshot_stride: usize,
    pub controller: StepController,
    pub max_steps: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            dt_initial: 1e-8,
            dt_max: 0.05,
            eta_step: 1e-2,
            quench_eps: 1e-3,
            t_max: 100.0,
            snapshot_stride: 10,
            controller: StepController::Adaptive,
            max_steps: 2_000_000,
        }
    }
}

impl TimeConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt_initial", self.dt_initial),
            ("dt_max", self.dt_max),
            ("eta_step", self.eta_step),
            ("quench_eps", self.quench_eps),
            ("t_max", self.t_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.quench_eps > 0.1 {
            return Err(Error::InvalidArgument(format!(
                "quench_eps must lie in (0, 0.1], got {}",
                self.quench_eps
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidArgument("snapshot_stride must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxRecord {
    pub t: f64,
    pub sup_u: f64,
    pub argmax: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub lambda: f64,
    pub snapshots: Vec<(f64, Field)>,
    pub max_history: Vec<MaxRecord>,
    pub liapunov_history: Vec<(f64, f64)>,
}

impl Trajectory {
    pub fn mesh(&self) -> &Arc<Mesh> {
        self.snapshots[0].1.mesh()
    }

    pub fn final_state(&self) -> &(f64, Field) {
        self.snapshots.last().expect("trajectory always holds the initial state")
    }
}

/// Stepper for a single run; `integrate` drives it to completion.
pub struct Integrator {
    mesh: Arc<Mesh>,
    f: Vec<f64>,
    lambda: f64,
    cfg: TimeConfig,
    u: Vec<f64>,
    rhs: Vec<f64>,
    t: f64,
    dt_prev: f64,
    steps: usize,
}

impl Integrator {
    pub fn new(lambda: f64, profile: &Profile, mesh: &Arc<Mesh>, cfg: &TimeConfig) -> Result<Self> {
        cfg.validate()?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
        }
        let f = profile.sample(mesh)?;
        let u = vec![0.0; mesh.len()];
        let mut me = Self {
            mesh: mesh.clone(),
            f,
            lambda,
            cfg: *cfg,
            rhs: Vec::new(),
            u,
            t: 0.0,
            dt_prev: 0.5 * cfg.dt_initial,
            steps: 0,
        };
        me.rhs = me.right_side(&me.u);
        Ok(me)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64] {
        &self.u
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sup(&self) -> f64 {
        self.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn field(&self) -> Field {
        Field::new(self.mesh.clone(), self.u.clone()).expect("state stays finite")
    }

    pub fn quenched(&self) -> bool {
        self.sup() >= 1.0 - self.cfg.quench_eps
    }

    pub fn finished(&self) -> bool {
        self.quenched() || self.t >= self.cfg.t_max * (1.0 - 1e-14)
    }

    /// `Δu + λ f (1 - u)^-2` on free nodes.
    fn right_side(&self, u: &[f64]) -> Vec<f64> {
        let lap = self.mesh.laplacian().mul_vec(u);
        let mut r = vec![0.0; u.len()];
        for i in self.mesh.free_range() {
            r[i] = lap[i] + self.lambda * self.f[i] * steady::forcing(u[i]);
        }
        r
    }

    /// Solves the Crank–Nicolson stage equation for the next state.
    fn crank_nicolson(&self, dt: f64) -> Option<Vec<f64>> {
        let n = self.u.len();
        let half = 0.5 * dt;
        let free = self.mesh.free_range();
        let lap_norm = self.mesh.laplacian().norm_inf();

        let mut v: Vec<f64> = self.u.iter().zip(&self.rhs).map(|(u, r)| u + dt * r).collect();
        if v.iter().any(|x| *x >= 1.0) {
            v = self.u.clone();
        }
        for _ in 0..30 {
            let rv = self.right_side(&v);
            let mut res = vec![0.0; n];
            for i in free.clone() {
                res[i] = v[i] - self.u[i] - half * (rv[i] + self.rhs[i]);
            }
            let norm = steady::sup_norm(&res);
            if !norm.is_finite() {
                return None;
            }
            let force = rv.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let floor = 64.0 * f64::EPSILON * (1.0 + half * (lap_norm * steady::sup_norm(&v) + force));
            if norm <= 1e-11f64.max(floor) {
                return Some(v);
            }
            let mut j = self.mesh.laplacian().scaled_shift(-half, 1.0);
            for i in 0..n {
                if self.mesh.is_boundary(i) {
                    j.lower[i] = 0.0;
                    j.upper[i] = 0.0;
                    j.diag[i] = 1.0;
                } else {
                    let g = 1.0 - v[i];
                    j.diag[i] -= half * 2.0 * self.lambda * self.f[i] / (g * g * g);
                }
            }
            let neg: Vec<f64> = res.iter().map(|x| -x).collect();
            let delta = j.solve(&neg).ok()?;
            let mut theta = 1.0;
            while v.iter().zip(&delta).any(|(a, d)| a + theta * d >= 1.0) {
                theta *= 0.5;
                if theta < 1e-10 {
                    return None;
                }
            }
            for (a, d) in v.iter_mut().zip(&delta) {
                *a += theta * d;
            }
        }
        None
    }

    fn proposed_dt(&self) -> f64 {
        let remaining = self.cfg.t_max - self.t;
        match self.cfg.controller {
            StepController::Fixed => self.cfg.dt_initial.min(remaining),
            StepController::Adaptive => {
                let sup = self.sup();
                let gap = 1.0 - sup;
                let rate = self.rhs.iter().cloned().fold(0.0, f64::max);
                let mut dt = (2.0 * self.dt_prev).min(self.cfg.dt_max);
                if rate > 0.0 {
                    dt = dt.min(0.8 * self.cfg.eta_step * gap / rate);
                    if gap < 0.5 {
                        // local cubic law: T ≈ t + gap / (3 u_t)
                        let t_est = self.t + gap / (3.0 * rate);
                        dt = dt.min(t_est / 100.0);
                    }
                }
                dt.min(remaining)
            }
        }
    }

    /// Advances one accepted step.
    pub fn step(&mut self) -> Result<()> {
        let mut dt = self.proposed_dt();
        let sup = self.sup();
        let gap = 1.0 - sup;
        loop {
            if dt < 1e-16 * self.cfg.dt_initial || dt <= 0.0 {
                return Err(Error::StepUnderflow { t: self.t, dt });
            }
            match self.crank_nicolson(dt) {
                Some(v) => {
                    let rise = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - sup;
                    let too_big = matches!(self.cfg.controller, StepController::Adaptive)
                        && rise > self.cfg.eta_step * gap;
                    if too_big {
                        dt *= 0.5;
                        continue;
                    }
                    self.u = v;
                    self.t += dt;
                    self.dt_prev = dt;
                    self.steps += 1;
                    self.rhs = self.right_side(&self.u);
                    return Ok(());
                }
                None => {
                    dt *= 0.5;
                }
            }
        }
    }

    fn argmax(&self) -> Vec<f64> {
        let sup = self.sup();
        let tol = 1e-12 * sup.abs().max(1e-300);
        self.mesh
            .nodes()
            .iter()
            .zip(&self.u)
            .filter(|(_, v)| sup - **v <= tol)
            .map(|(x, _)| *x)
            .collect()
    }

    fn liapunov_value(&self) -> Option<f64> {
        analytic::liapunov_values(&self.mesh, &self.u, self.lambda, &self.f).ok()
    }
}

pub fn integrate(lambda: f64, profile: &Profile, mesh: &Arc<Mesh>, cfg: &TimeConfig) -> Result<(Trajectory, QuenchReport)> {
    let mut run = Integrator::new(lambda, profile, mesh, cfg)?;
    let mut traj = Trajectory {
        lambda,
        snapshots: vec![(0.0, run.field())],
        max_history: vec![MaxRecord {
            t: 0.0,
            sup_u: run.sup(),
            argmax: run.argmax(),
        }],
        liapunov_history: run.liapunov_value().map(|v| vec![(0.0, v)]).unwrap_or_default(),
    };
    while !run.finished() {
        if run.steps() >= cfg.max_steps {
            return Err(Error::StepUnderflow { t: run.time(), dt: 0.0 });
        }
        run.step().map_err(|e| match e {
            Error::StepUnderflow { .. } => e,
            _ => Error::NewtonFailure { t: run.time() },
        })?;
        traj.max_history.push(MaxRecord {
            t: run.time(),
            sup_u: run.sup(),
            argmax: run.argmax(),
        });
        if let Some(v) = run.liapunov_value() {
            traj.liapunov_history.push((run.time(), v));
        }
        if run.steps() % cfg.snapshot_stride == 0 || run.finished() {
            traj.snapshots.push((run.time(), run.field()));
        }
    }
    let report = detect_quench(&traj, cfg.quench_eps);
    Ok((traj, report))
}

#[derive(Debug, Clone)]
pub struct ConvergenceTrace {
    pub w_lambda: Field,
    pub times: Vec<f64>,
    /// `‖u(·, t) - w_λ‖∞` after each step.
    pub distances: Vec<f64>,
}

/// Integrates to `cfg.t_max` and records the distance to the minimal
/// steady state; for `λ <= λ*` the distance should decay to zero.
pub fn convergence_check(
    lambda: f64,
    profile: &Profile,
    mesh: &Arc<Mesh>,
    cfg: &TimeConfig,
    steady_opts: &SteadyOptions,
) -> Result<ConvergenceTrace> {
    let w = steady::solve_minimal(lambda, profile, mesh, steady_opts)?.w;
    let mut run = Integrator::new(lambda, profile, mesh, cfg)?;
    let distance = |u: &[f64]| {
        u.iter()
            .zip(w.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    };
    let mut times = vec![0.0];
    let mut distances = vec![distance(run.state())];
    while run.time() < cfg.t_max * (1.0 - 1e-14) {
        if run.quenched() {
            return Err(Error::DomainError(format!(
                "run quenched at t = {} although lambda = {lambda} has a steady state",
                run.time()
            )));
        }
        if run.steps() >= cfg.max_steps {
            return Err(Error::StepUnderflow { t: run.time(), dt: 0.0 });
        }
        run.step()?;
        times.push(run.time());
        distances.push(distance(run.state()));
    }
    Ok(ConvergenceTrace {
        w_lambda: w,
        times,
        distances,
    })
}

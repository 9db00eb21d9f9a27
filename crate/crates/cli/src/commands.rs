//! Subcommand drivers. Each returns the paths it wrote; the caller adds
//! the run record.

use std::fs;
use std::path::{Path, PathBuf};

use quench_core::bounds::{evaluate_all, BoundsReport};
use quench_core::dynamics::{integrate, QuenchReport};
use quench_core::selfsim::{energy_trace, rescale};
use quench_core::steady::{continue_branch, solve_minimal, BranchPoint, SteadyBranch};
use quench_core::sweep::run_sweep;
use quench_core::{io, Profile};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::failure::Failure;

pub const SUMMARY_FILE: &str = "summary.json";

/// Everything a command produced.
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub quench: Option<QuenchReport>,
    pub bounds: Option<BoundsReport>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { files: Vec::new(), quench: None, bounds: None, warnings: Vec::new() }
    }

    fn json(&mut self, out: &Path, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let path = out.join(name);
        fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
        self.files.push(path);
        Ok(())
    }
}

fn branch(cfg: &RunConfig, profile: &Profile) -> Result<SteadyBranch, Failure> {
    Ok(continue_branch(profile, &cfg.mesh()?, &cfg.continuation)?)
}

pub fn steady(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let profile = cfg.profile()?;
    let mesh = cfg.mesh()?;
    let br = branch(cfg, &profile)?;
    let points = if cfg.lambda_grid.is_empty() {
        br.points()
    } else {
        let mut grid = cfg.lambda_grid.clone();
        grid.sort_by(f64::total_cmp);
        let mut rows = Vec::with_capacity(grid.len());
        for l in grid {
            let s = solve_minimal(l, &profile, &mesh, &cfg.continuation.newton)?;
            rows.push(BranchPoint { lambda: l, sup_w: s.w.sup(), mu1: s.mu1 });
        }
        rows
    };
    let mut o = Outcome::new();
    let path = out.join("branch.csv");
    io::write_branch(&path, &points)?;
    o.files.push(path);
    o.json(
        out,
        SUMMARY_FILE,
        &json!({
            "config": cfg,
            "lambda_star": br.lambda_star,
            "sup_w_star": br.sup_w_star,
            "lambda_at_w_star": br.lambda_at_w_star,
            "mu1_at_w_star": br.mu1_at_w_star,
            "branch_rows": points.len(),
        }),
    )?;
    Ok(o)
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let lambda = cfg.require_lambda()?;
    let profile = cfg.profile()?;
    let (traj, quench) = integrate(lambda, &profile, &cfg.mesh()?, &cfg.time)?;
    let mut o = Outcome::new();
    o.files.extend(io::write_snapshots(&out.join("snapshots"), &traj)?);
    let path = out.join("max_history.csv");
    io::write_max_history(&path, &traj.max_history)?;
    o.files.push(path);
    o.json(out, "quench.json", &quench)?;
    o.json(out, SUMMARY_FILE, &json!({ "config": cfg, "quench": quench }))?;
    o.quench = Some(quench);
    Ok(o)
}

pub fn bounds(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let lambda = cfg.require_lambda()?;
    let profile = cfg.profile()?;
    let br = branch(cfg, &profile)?;
    let mut o = Outcome::new();
    // below λ* the solution converges and there is nothing to measure
    let quench = if lambda > br.lambda_star {
        let (_, q) = integrate(lambda, &profile, br.mesh(), &cfg.time)?;
        o.json(out, "quench.json", &q)?;
        Some(q)
    } else {
        None
    };
    let report = evaluate_all(lambda, &br, &profile, quench.as_ref(), &cfg.bounds)?;
    o.json(out, "bounds.json", &report)?;
    o.json(
        out,
        SUMMARY_FILE,
        &json!({ "config": cfg, "lambda_star": br.lambda_star, "quench": quench, "bounds": report }),
    )?;
    o.quench = quench;
    o.bounds = Some(report);
    Ok(o)
}

pub fn sweep(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    if cfg.lambda_grid.is_empty() && cfg.lambda_ratios.is_empty() {
        return Err(Failure::Config("sweep needs a nonempty lambda_grid or lambda_ratios".into()));
    }
    let profile = cfg.profile()?;
    let mesh = cfg.mesh()?;
    let br = branch(cfg, &profile)?;
    let grid: Vec<f64> = cfg
        .lambda_grid
        .iter()
        .copied()
        .chain(cfg.lambda_ratios.iter().map(|r| r * br.lambda_star))
        .collect();
    let rows = run_sweep(&grid, &profile, &mesh, &cfg.time, &br, &cfg.bounds);
    let mut o = Outcome::new();
    let failures: Vec<Value> = rows
        .iter()
        .filter_map(|r| r.failure.as_ref().map(|f| json!({ "lambda": r.lambda, "failure": f })))
        .collect();
    for r in rows.iter().filter(|r| r.failure.is_some()) {
        o.warnings.push(format!("lambda = {}: {}", r.lambda, r.failure.as_deref().unwrap_or_default()));
    }
    if failures.len() == rows.len() {
        return Err(Failure::Solver(format!("all {} sweep runs failed", rows.len())));
    }
    let path = out.join("sweep.csv");
    io::write_sweep(&path, &rows)?;
    o.files.push(path);
    o.json(
        out,
        SUMMARY_FILE,
        &json!({ "config": cfg, "lambda_star": br.lambda_star, "grid": grid, "failures": failures }),
    )?;
    Ok(o)
}

/// Config and quench report of an earlier `simulate` run.
fn load_run(dir: &Path) -> Result<(RunConfig, Option<QuenchReport>), Failure> {
    let path = dir.join(SUMMARY_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| Failure::Missing(format!("run summary {}: {e}", path.display())))?;
    let mut v: Value =
        serde_json::from_str(&text).map_err(|e| Failure::Missing(format!("{}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_value(v["config"].take())
        .map_err(|e| Failure::Missing(format!("{}: config: {e}", path.display())))?;
    let quench = match v["quench"].take() {
        Value::Null => None,
        q => Some(
            serde_json::from_value(q).map_err(|e| Failure::Missing(format!("{}: quench: {e}", path.display())))?,
        ),
    };
    Ok((cfg, quench))
}

pub fn rescale_run(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let run_dir = cfg
        .rescale
        .run_dir
        .as_ref()
        .ok_or_else(|| Failure::Config("rescale needs rescale.run_dir".into()))?;
    if !run_dir.is_dir() {
        return Err(Failure::Missing(format!("run directory {} not found", run_dir.display())));
    }
    let (run_cfg, quench) = load_run(run_dir)?;
    let lambda = run_cfg
        .lambda
        .ok_or_else(|| Failure::Missing("referenced run has no lambda".into()))?;
    let mesh = run_cfg.mesh()?;
    let profile = run_cfg.profile()?;
    let traj = io::read_snapshots(&run_dir.join("snapshots"), &mesh, lambda)?;

    let mut warnings = Vec::new();
    let quench_time = match (cfg.rescale.quench_time, quench.as_ref().and_then(|q| q.quench_time)) {
        (Some(t), _) | (None, Some(t)) => t,
        (None, None) => return Err(Failure::Missing("referenced run has no quenching time".into())),
    };
    let quench_set = quench.as_ref().map(|q| q.quench_set.clone()).unwrap_or_default();
    let center = match (cfg.rescale.center, quench_set.first()) {
        (Some(c), _) => c,
        (None, Some(&a)) => a,
        (None, None) => return Err(Failure::Missing("no center given and the run has no quench set".into())),
    };
    if !quench_set.is_empty() {
        let reach = 3.0 * mesh.spacing();
        if quench_set.iter().all(|a| (a - center).abs() > reach) {
            warnings.push(format!("warning: center {center} lies outside the quench set {quench_set:?}"));
        }
    }
    // drop snapshots recorded after the requested quenching time
    let mut traj = traj;
    traj.snapshots.retain(|(t, _)| *t < quench_time);
    let frame = rescale(&traj, center, quench_time)?;
    if !frame.hypothesis_met {
        warnings.push("warning: uniform convergence is not guaranteed for this geometry and center".into());
    }
    if frame.s0.is_none() {
        warnings.push("warning: the y-ball never fits inside the rescaled domain".into());
    }

    let mut o = Outcome::new();
    let energy_path = out.join("energy.csv");
    let f_a = profile.eval(center)?;
    let k_a = match energy_trace(&frame, lambda, f_a) {
        Ok(trace) => {
            io::write_energy(&energy_path, &trace)?;
            Some(trace.k_a)
        }
        Err(e) => {
            warnings.push(format!("warning: energy unavailable: {e}"));
            fs::write(&energy_path, "s,E,k_a,E_of_k,w_center\n")?;
            None
        }
    };
    let frame_path = out.join("frame.csv");
    io::write_frame(&frame_path, &frame, &warnings)?;
    o.files.push(frame_path);
    o.files.push(energy_path);
    o.json(
        out,
        SUMMARY_FILE,
        &json!({
            "config": cfg,
            "lambda": lambda,
            "center": center,
            "quench_time": quench_time,
            "s0": frame.s0,
            "hypothesis_met": frame.hypothesis_met,
            "k_a": k_a,
            "warnings": warnings,
        }),
    )?;
    o.warnings = warnings;
    o.quench = quench;
    Ok(o)
}

//! Parallel λ sweeps comparing measured quenching times with every
//! applicable bound.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{evaluate_all, BoundsOptions};
use crate::dynamics::{integrate, TimeConfig};
use crate::error::Result;
use crate::mesh::Mesh;
use crate::profiles::Profile;
use crate::steady::SteadyBranch;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub quenched: bool,
    pub t_measured: Option<f64>,
    pub t_lower: Option<f64>,
    pub t1_arctan: Option<f64>,
    pub t1_simplified: Option<f64>,
    pub bound_gg2: Option<f64>,
    pub lower_1_7: Option<f64>,
    pub upper_1_7: Option<f64>,
    /// Largest `(sup f)^{1/3} - f(a)^{1/3}` over the quench set.
    pub location_lhs: Option<f64>,
    pub quench_set: Vec<f64>,
    pub lower_ordering_ok: Option<bool>,
    pub upper_ordering_ok: Option<bool>,
    /// Set when the run or its bounds failed; the row is kept.
    pub failure: Option<String>,
}

impl SweepRow {
    fn failed(lambda: f64, reason: String) -> Self {
        Self {
            lambda,
            quenched: false,
            t_measured: None,
            t_lower: None,
            t1_arctan: None,
            t1_simplified: None,
            bound_gg2: None,
            lower_1_7: None,
            upper_1_7: None,
            location_lhs: None,
            quench_set: Vec::new(),
            lower_ordering_ok: None,
            upper_ordering_ok: None,
            failure: Some(reason),
        }
    }
}

fn run_one(
    lambda: f64,
    profile: &Profile,
    mesh: &Arc<Mesh>,
    cfg: &TimeConfig,
    branch: &SteadyBranch,
    bounds: &BoundsOptions,
) -> Result<SweepRow> {
    let (_, quench) = integrate(lambda, profile, mesh, cfg)?;
    let report = evaluate_all(lambda, branch, profile, Some(&quench), bounds)?;
    Ok(SweepRow {
        lambda,
        quenched: quench.quenched,
        t_measured: quench.quench_time,
        t_lower: report.t_lower.value,
        t1_arctan: report.t1_arctan.value,
        t1_simplified: report.t1_simplified.value,
        bound_gg2: report.bound_gg2.value,
        lower_1_7: report.large_lambda_lower.value,
        upper_1_7: report.large_lambda_upper.value,
        location_lhs: report
            .location
            .as_ref()
            .map(|l| l.points.iter().map(|p| p.lhs).fold(f64::NEG_INFINITY, f64::max)),
        quench_set: quench.quench_set,
        lower_ordering_ok: report.lower_ordering_ok,
        upper_ordering_ok: report.upper_ordering_ok,
        failure: None,
    })
}

/// Runs every `λ` independently on the rayon pool; rows keep input order.
pub fn run_sweep(
    lambdas: &[f64],
    profile: &Profile,
    mesh: &Arc<Mesh>,
    cfg: &TimeConfig,
    branch: &SteadyBranch,
    bounds: &BoundsOptions,
) -> Vec<SweepRow> {
    lambdas
        .par_iter()
        .map(|&l| {
            run_one(l, profile, mesh, cfg, branch, bounds).unwrap_or_else(|e| SweepRow::failed(l, e.to_string()))
        })
        .collect()
}

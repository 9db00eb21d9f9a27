//! Quench-time extrapolation, quenching-set location and rate fits.
//!
//! Near the quenching time `u_t ≈ λ f / (1 - u)²` at the quenching point, so
//! `(1 - sup u)³` is asymptotically affine in `t` and its zero crossing is
//! the extrapolated quenching time.

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub point: f64,
    /// Prefactor `M` and exponent `p` of `1 - u(a, t) ≈ M (T - t)^p`.
    pub prefactor: f64,
    pub exponent: f64,
    /// RMS residual of the log-log regression.
    pub residual: f64,
    /// Decades of `T - t` covered by the fit window.
    pub decades: f64,
    pub low_confidence: bool,
    /// `min (1 - u(a, t)) / (T - t)^{1/3}` over the window.
    pub min_ratio: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchReport {
    pub lambda: f64,
    pub quenched: bool,
    pub quench_time: Option<f64>,
    pub final_time: f64,
    /// Centroids of the clusters of near-minimal gap on the final state.
    pub quench_set: Vec<f64>,
    pub quench_nodes: Vec<usize>,
    pub rate: Vec<RateFit>,
    /// `1 - sup u` at the last resolved step.
    pub last_resolved_gap: f64,
    pub fit_points: usize,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (intercept, slope, rms)
}

pub fn detect_quench(trajectory: &Trajectory, quench_eps: f64) -> QuenchReport {
    let hist = &trajectory.max_history;
    let last = hist.last().expect("history holds the initial state");
    let last_gap = 1.0 - last.sup_u;
    let mut report = QuenchReport {
        lambda: trajectory.lambda,
        quenched: false,
        quench_time: None,
        final_time: last.t,
        quench_set: Vec::new(),
        quench_nodes: Vec::new(),
        rate: Vec::new(),
        last_resolved_gap: last_gap,
        fit_points: 0,
    };
    if last_gap > quench_eps * (1.0 + 1e-12) {
        return report;
    }

    // last decade of resolved gap, times shifted for conditioning
    let mut window: Vec<(f64, f64)> = hist
        .iter()
        .filter(|r| 1.0 - r.sup_u <= 10.0 * last_gap && r.t > 0.0)
        .map(|r| (r.t, (1.0 - r.sup_u).powi(3)))
        .collect();
    if window.len() < 3 {
        window = hist.iter().rev().take(4).map(|r| (r.t, (1.0 - r.sup_u).powi(3))).collect();
        window.reverse();
    }
    let t0 = last.t;
    let xs: Vec<f64> = window.iter().map(|p| p.0 - t0).collect();
    let ys: Vec<f64> = window.iter().map(|p| p.1).collect();
    let (a, b, _) = linear_fit(&xs, &ys);
    let t_quench = if b < 0.0 { (t0 - a / b).max(t0) } else { t0 };

    report.quenched = true;
    report.quench_time = Some(t_quench);
    report.fit_points = window.len();

    let (_, state) = trajectory.final_state();
    let mesh = state.mesh();
    let gaps: Vec<f64> = state.values().iter().map(|u| 1.0 - u).collect();
    let min_gap = gaps
        .iter()
        .enumerate()
        .filter(|(i, _)| !mesh.is_boundary(*i))
        .map(|(_, g)| *g)
        .fold(f64::INFINITY, f64::min);
    let members: Vec<usize> = (0..gaps.len())
        .filter(|&i| !mesh.is_boundary(i) && gaps[i] <= 2.0 * min_gap)
        .collect();
    // merge members closer than three cells
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in members {
        match clusters.last_mut() {
            Some(c) if i - *c.last().unwrap() <= 3 => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    for c in &clusters {
        let centroid = c.iter().map(|&i| mesh.nodes()[i]).sum::<f64>() / c.len() as f64;
        let node = *c
            .iter()
            .min_by(|&&i, &&j| gaps[i].total_cmp(&gaps[j]))
            .unwrap();
        report.quench_set.push(centroid);
        report.quench_nodes.push(node);
        if let Ok(fit) = rate_fit(trajectory, centroid, t_quench) {
            report.rate.push(fit);
        }
    }
    report
}

/// Log-log regression of `1 - u(a, t)` against `T - t` over the stored
/// snapshots where the gap at `a` has dropped below one half.
pub fn rate_fit(trajectory: &Trajectory, point: f64, quench_time: f64) -> Result<RateFit> {
    let mesh = trajectory.mesh();
    let node = mesh.nearest_node(point);
    let data: Vec<(f64, f64)> = trajectory
        .snapshots
        .iter()
        .filter(|(t, _)| *t > 0.0 && *t < quench_time)
        .map(|(t, u)| (quench_time - t, 1.0 - u.values()[node]))
        .filter(|(_, g)| *g > 0.0 && *g <= 0.5)
        .collect();
    if data.len() < 3 {
        return Err(Error::MissingData(format!(
            "only {} resolved samples at x = {point}",
            data.len()
        )));
    }
    let xs: Vec<f64> = data.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = data.iter().map(|p| p.1.ln()).collect();
    let (intercept, slope, rms) = linear_fit(&xs, &ys);
    let (lo, hi) = data
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let decades = (hi / lo).log10();
    let min_ratio = data
        .iter()
        .map(|(dt, g)| g / dt.cbrt())
        .fold(f64::INFINITY, f64::min);
    Ok(RateFit {
        point,
        prefactor: intercept.exp(),
        exponent: slope,
        residual: rms,
        decades,
        low_confidence: decades < 1.5,
        min_ratio,
        samples: data.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MaxRecord;
    use crate::mesh::{build_mesh, Field, Geometry};

    /// `1 - u = (3λM (T₀ - t))^{1/3}` with `λM = 1/3`, `T₀ = 1`, on every node.
    fn exact_cubic_trajectory() -> Trajectory {
        let mesh = build_mesh(Geometry::Slab { x_left: -0.5, x_right: 0.5 }, 21).unwrap();
        let mut snapshots = Vec::new();
        let mut max_history = Vec::new();
        let mut t: f64 = 0.0;
        let mut k = 0;
        while (1.0 - t).cbrt() > 1e-3 {
            let gap = (1.0 - t).cbrt();
            // bump at the centre, zero at the ends
            let values: Vec<f64> = mesh
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, x)| if i == 0 || i == 20 { 0.0 } else { (1.0 - gap) * (1.0 - 4.0 * x * x).max(0.0) })
                .collect();
            snapshots.push((t, Field::new(mesh.clone(), values).unwrap()));
            max_history.push(MaxRecord { t, sup_u: 1.0 - gap, argmax: vec![0.0] });
            k += 1;
            t = 1.0 - (0.97f64).powi(k);
        }
        Trajectory { lambda: 1.0 / 3.0, snapshots, max_history, liapunov_history: Vec::new() }
    }

    #[test]
    fn recovers_exact_cubic_law() {
        let traj = exact_cubic_trajectory();
        let report = detect_quench(&traj, 2e-3);
        assert!(report.quenched);
        assert!((report.quench_time.unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(report.quench_set, vec![0.0]);
        let fit = &report.rate[0];
        assert!((fit.exponent - 1.0 / 3.0).abs() < 1e-3, "{fit:?}");
        assert!((fit.prefactor - 1.0).abs() < 1e-3);
        assert!(fit.min_ratio > 0.0);
        assert!(!fit.low_confidence);
    }

    #[test]
    fn unresolved_history_is_not_quenched() {
        let mut traj = exact_cubic_trajectory();
        traj.max_history.truncate(10);
        let report = detect_quench(&traj, 1e-3);
        assert!(!report.quenched);
        assert!(report.quench_time.is_none());
    }

    #[test]
    fn rate_fit_needs_samples() {
        let mut traj = exact_cubic_trajectory();
        traj.snapshots.truncate(3);
        assert!(rate_fit(&traj, 0.0, 1.0).is_err());
    }
}

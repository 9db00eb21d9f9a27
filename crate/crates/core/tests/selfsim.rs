mod common;

use common::unit_slab;
use quench_core::dynamics::{MaxRecord, Trajectory};
use quench_core::selfsim::{asymptotic_limit, energy_trace, f_profile, frozen_energy, rescale};
use quench_core::Field;

/// `1 - u = k (T - t)^{1/3}` on the whole slab interior.
fn ansatz(k: f64, t_quench: f64) -> Trajectory {
    let mesh = unit_slab(201);
    let mut snapshots = Vec::new();
    for j in 0..30 {
        let t = t_quench * (1.0 - 0.5f64.powi(j));
        let u = (k * (t_quench - t).cbrt()).min(1.0);
        let values = (0..mesh.len()).map(|i| if mesh.is_boundary(i) { 0.0 } else { 1.0 - u }).collect();
        snapshots.push((t, Field::new(mesh.clone(), values).unwrap()));
    }
    Trajectory {
        lambda: 1.0,
        max_history: vec![MaxRecord { t: 0.0, sup_u: 0.0, argmax: vec![] }],
        snapshots,
        liapunov_history: vec![],
    }
}

#[test]
fn similarity_time_at_half_the_quenching_time() {
    let frame = rescale(&ansatz(0.9, 2.0), 0.0, 2.0).unwrap();
    let half = frame.samples.iter().find(|smp| smp.t == 1.0).unwrap();
    assert!((half.s - std::f64::consts::LN_2).abs() < 1e-15);
    assert!(frame.samples.windows(2).all(|p| p[1].s > p[0].s));
}

#[test]
fn exact_ansatz_rescales_to_a_constant() {
    let k = 0.9;
    let frame = rescale(&ansatz(k, 0.5), 0.1, 0.5).unwrap();
    assert!(frame.hypothesis_met);
    for smp in &frame.samples {
        let tau = 0.5 - smp.t;
        for (y, w) in smp.y.iter().zip(&smp.w) {
            let x = 0.1 + y * tau.sqrt();
            if x.abs() < 0.5 - 1e-2 {
                assert!((w - k).abs() < 1e-9, "w = {w} at y = {y}");
            }
        }
    }
}

#[test]
fn rescaling_round_trips() {
    let traj = ansatz(0.8, 1.0);
    let frame = rescale(&traj, 0.0, 1.0).unwrap();
    let mesh = traj.mesh();
    for (smp, (_, u)) in frame.samples.iter().zip(&traj.snapshots) {
        for (x, gap) in smp.to_physical(0.0, 1.0) {
            let direct = 1.0 - mesh.interpolate(u.values(), x).unwrap();
            assert!((gap - direct).abs() < 1e-12);
        }
    }
}

#[test]
fn rejects_snapshots_at_or_after_quenching() {
    assert!(rescale(&ansatz(0.8, 1.0), 0.0, 0.5).is_err());
}

#[test]
fn energy_trace_of_constant_limit() {
    let (l, fa) = (0.8f64.powi(3) / 3.0, 1.0);
    let k = asymptotic_limit(l, fa).unwrap();
    assert!((k - 0.8).abs() < 1e-14);
    let frame = rescale(&ansatz(k, 1.0), 0.0, 1.0).unwrap();
    let trace = energy_trace(&frame, l, fa).unwrap();
    assert!(!trace.rows.is_empty());
    let (fk, f2) = f_profile(k, l, fa).unwrap();
    assert!((f2 + 1.0).abs() < 1e-15);
    // constant interior data: E = F(k) Γ(s) up to the boundary layer
    for r in &trace.rows {
        assert!((r.energy - r.energy_of_k).abs() <= 1e-9 * r.energy_of_k.abs());
        assert!((r.w_center - k).abs() < 1e-9);
    }
    assert!((trace.e_limit - fk * 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    let s = trace.rows.last().unwrap().s;
    assert!(frozen_energy(&frame, l, fa, s).is_ok());
}

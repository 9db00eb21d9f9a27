mod common;

use common::unit_slab;
use quench_core::dynamics::{
    convergence_check, detect_quench, eta_quench_time, integrate, StepController, TimeConfig, Trajectory,
};
use quench_core::steady::{continue_branch, ContinuationOptions, SteadyOptions};
use quench_core::Profile;

fn run(lambda: f64, profile: &Profile, n: usize, cfg: TimeConfig) -> (Trajectory, quench_core::dynamics::QuenchReport) {
    integrate(lambda, profile, &unit_slab(n), &cfg).unwrap()
}

fn assert_monotone_in_time(traj: &Trajectory) {
    let mesh = traj.mesh();
    for pair in traj.snapshots.windows(2) {
        assert!(pair[1].0 > pair[0].0);
        for (i, (a, b)) in pair[0].1.values().iter().zip(pair[1].1.values()).enumerate() {
            assert!(*a >= 0.0 && *a < 1.0);
            assert!(b - a >= -1e-12, "u decreased by {} at node {i}", a - b);
            if mesh.is_boundary(i) {
                assert_eq!(*b, 0.0);
            }
        }
    }
}

#[test]
fn maximum_principle_on_quenching_runs() {
    let (traj, q) = run(10.0, &Profile::slab_sin_piecewise(), 1001, TimeConfig::default());
    assert!(q.quenched);
    assert_monotone_in_time(&traj);
    let (traj, q) = run(2.0, &Profile::constant(1.0).unwrap(), 1001, TimeConfig::default());
    assert!(q.quenched);
    assert_monotone_in_time(&traj);
}

#[test]
fn maximum_principle_below_the_fold_at_fixed_step() {
    let cfg = TimeConfig {
        dt_initial: 1e-4,
        controller: StepController::Fixed,
        t_max: 1.0,
        ..TimeConfig::default()
    };
    let (traj, q) = run(1.0, &Profile::constant(1.0).unwrap(), 401, cfg);
    assert!(!q.quenched);
    assert_monotone_in_time(&traj);
}

#[test]
fn even_profiles_give_even_solutions() {
    let (traj, q) = run(10.0, &Profile::slab_sin_piecewise(), 1000, TimeConfig::default());
    for (_, u) in &traj.snapshots {
        if 1.0 - u.sup() < 1e-2 {
            continue;
        }
        let v = u.values();
        for i in 0..v.len() {
            assert!((v[i] - v[v.len() - 1 - i]).abs() < 1e-10);
        }
    }
    assert_eq!(q.quench_set.len(), 2);
    assert!((q.quench_set[0] + q.quench_set[1]).abs() < 1e-12);
}

#[test]
fn liapunov_decreases_at_fixed_step() {
    let cfg = TimeConfig {
        dt_initial: 2e-5,
        controller: StepController::Fixed,
        quench_eps: 0.05,
        ..TimeConfig::default()
    };
    for (lambda, profile) in [(2.0, Profile::constant(1.0).unwrap()), (10.0, Profile::slab_sin_piecewise())] {
        let (traj, q) = run(lambda, &profile, 401, cfg);
        assert!(q.quenched);
        assert!(traj.liapunov_history.len() > 100);
        for p in traj.liapunov_history.windows(2) {
            assert!(p[1].1 <= p[0].1 + 1e-8, "V rose from {} to {}", p[0].1, p[1].1);
        }
    }
}

#[test]
fn quenching_time_decreases_with_lambda() {
    let p = Profile::slab_sin_piecewise();
    let times: Vec<f64> = [3.0, 5.0, 10.0, 30.0, 100.0]
        .iter()
        .map(|&l| run(l, &p, 801, TimeConfig::default()).1.quench_time.unwrap())
        .collect();
    for t in times.windows(2) {
        assert!(t[1] < t[0], "{times:?}");
    }
}

#[test]
fn quench_points_avoid_zeros_of_the_profile() {
    let p = Profile::slab_sin_piecewise();
    for l in [2.5, 10.0, 1e3] {
        let (_, q) = run(l, &p, 801, TimeConfig::default());
        assert!(q.quenched && !q.quench_set.is_empty());
        for a in &q.quench_set {
            assert!(p.eval(*a).unwrap() > 0.0, "quench point {a} at λ = {l}");
        }
    }
}

#[test]
fn quenching_time_exceeds_the_homogeneous_comparison() {
    for (l, p) in [
        (10.0, Profile::slab_sin_piecewise()),
        (1e4, Profile::slab_sin_piecewise()),
        (2.0, Profile::constant(1.0).unwrap()),
        (50.0, Profile::constant(0.5).unwrap()),
    ] {
        let mesh = unit_slab(1001);
        let sup_f = p.sample(&mesh).unwrap().into_iter().fold(0.0, f64::max);
        let (_, q) = integrate(l, &p, &mesh, &TimeConfig::default()).unwrap();
        let t_star = eta_quench_time(l, sup_f).unwrap();
        assert!(q.quench_time.unwrap() >= t_star * (1.0 - 2e-3), "λ = {l}");
    }
}

#[test]
fn crank_nicolson_is_second_order_in_time() {
    let p = Profile::slab_sin_piecewise();
    let t: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&eta| run(10.0, &p, 401, TimeConfig { eta_step: eta, ..TimeConfig::default() }).1.quench_time.unwrap())
        .collect();
    let order = ((t[0] - t[1]) / (t[1] - t[2])).abs().log2();
    assert!(order >= 1.8, "observed order {order} from {t:?}");
}

#[test]
fn zero_voltage_stays_at_rest() {
    let cfg = TimeConfig { t_max: 1.0, ..TimeConfig::default() };
    let (traj, q) = run(0.0, &Profile::constant(1.0).unwrap(), 101, cfg);
    assert!(!q.quenched);
    assert!(q.quench_time.is_none());
    assert!(traj.snapshots.iter().all(|(_, u)| u.values().iter().all(|v| *v == 0.0)));
    let trace = convergence_check(0.0, &Profile::constant(1.0).unwrap(), &unit_slab(101), &cfg, &SteadyOptions::default()).unwrap();
    assert!(trace.distances.iter().all(|d| *d == 0.0));
}

#[test]
fn quench_detection_is_idempotent() {
    let (traj, q) = run(10.0, &Profile::slab_sin_piecewise(), 801, TimeConfig::default());
    assert_eq!(detect_quench(&traj, TimeConfig::default().quench_eps), q);
    assert!(q.quench_time.unwrap() >= q.final_time);
    for fit in &q.rate {
        assert!(fit.min_ratio > 0.0);
    }
}

#[test]
fn subcritical_runs_converge_to_the_minimal_state() {
    let one = Profile::constant(1.0).unwrap();
    let mesh = unit_slab(2001);
    let ls = continue_branch(&one, &mesh, &ContinuationOptions::default()).unwrap().lambda_star;
    for (ratio, t_max) in [(0.5, 20.0), (0.99, 60.0)] {
        let cfg = TimeConfig { t_max, ..TimeConfig::default() };
        let trace = convergence_check(ratio * ls, &one, &mesh, &cfg, &SteadyOptions::default()).unwrap();
        let d = &trace.distances;
        assert!(*d.last().unwrap() < 1e-4, "λ/λ* = {ratio}: {}", d.last().unwrap());
        // Crank–Nicolson leaves undamped stiff modes at the 1e-8 level
        for p in d.windows(2) {
            assert!(p[1] <= p[0] + 1e-8);
        }
    }
}

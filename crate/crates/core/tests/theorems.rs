//! End-to-end consequences of the construction, checked on integrated
//! trajectories.

mod common;

use common::{cotangent_start, first_interval, pv, random_cases};
use jetflow_core::analysis::{periodicity_residual, periodicity_residual_at};
use jetflow_core::dynamics::integrate_full_with;
use jetflow_core::jetspace::{horizontality_residual, momentum_functions, u_from_theta, JetPointU};
use jetflow_core::numeric::{central_derivative, factorial};
use jetflow_core::sweep::{case_rng, sample_pair};
use jetflow_core::{geodesic, period_l, FlowOptions, GeodesicSpec, HillInterval, JetMatrix, JetPoint, Trajectory};
use std::f64::consts::PI;

const TOL: f64 = 1e-10;

fn harmonic_spec() -> GeodesicSpec {
    let f = pv(&[&[0.0, 1.0]]);
    let interval = first_interval(&f);
    GeodesicSpec {
        f,
        interval,
        x0: 0.0,
        px_sign: 1.0,
        theta0: JetMatrix::zeros(1, 1),
    }
}

/// `(t, x, theta)` on the uniform grid `0, dt, ...` up to `duration`.
fn uniform(traj: &Trajectory, dt: f64, duration: f64) -> Vec<(f64, f64, JetMatrix)> {
    let m = (duration / dt).floor() as usize;
    (0..=m)
        .map(|i| {
            let t = i as f64 * dt;
            let (x, _, theta) = traj.state_at(t).unwrap();
            (t, x, theta)
        })
        .collect()
}

fn residual_at_step(spec: &GeodesicSpec, dt: f64, duration: f64) -> f64 {
    let opts = FlowOptions {
        sample_dt: Some(dt),
        ..FlowOptions::with_tol(1e-12)
    };
    let traj = geodesic(spec, duration, &[], &opts).unwrap();
    let samples: Vec<(f64, JetPointU)> = uniform(&traj, dt, duration)
        .into_iter()
        .map(|(t, x, theta)| (t, u_from_theta(&JetPoint { x, theta })))
        .collect();
    horizontality_residual(&samples).unwrap()
}

#[test]
fn lifted_geodesic_is_horizontal_to_second_order() {
    let spec = harmonic_spec();
    let steps = [0.02, 0.01, 0.005];
    let r: Vec<f64> = steps.iter().map(|&h| residual_at_step(&spec, h, 2.0 * PI)).collect();
    for w in r.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "residuals {r:?}, observed order {order}");
    }
    assert!(r[2] < 1e-4);
}

#[test]
fn non_horizontal_line_has_unit_residual() {
    // x = t, u_0 = 0, u_1 = 1: du_0/dt = 0 while u_1 dx/dt = 1.
    let samples: Vec<(f64, JetPointU)> = (0..20)
        .map(|i| {
            let t = 0.1 * i as f64;
            let u = JetMatrix::from_rows(vec![vec![0.0, 1.0]]).unwrap();
            (t, JetPointU { x: t, u })
        })
        .collect();
    assert!((horizontality_residual(&samples).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn theta_velocities_follow_the_frame() {
    for case in random_cases(4) {
        let spec = &case.spec;
        let dt = 1e-3;
        let duration = case.period;
        let opts = FlowOptions {
            sample_dt: Some(dt),
            ..FlowOptions::with_tol(TOL)
        };
        let traj = geodesic(spec, duration, &[], &opts).unwrap();
        let grid = uniform(&traj, dt, duration);
        let t: Vec<f64> = grid.iter().map(|g| g.0).collect();
        let mut worst = 0.0_f64;
        for j in 0..spec.f.n() {
            let th0: Vec<f64> = grid.iter().map(|g| g.2.get(0, j)).collect();
            for i in 1..=spec.f.k() {
                let thi: Vec<f64> = grid.iter().map(|g| g.2.get(i, j)).collect();
                for m in 1..grid.len() - 1 {
                    let w = grid[m].1.powi(i as i32) / factorial(i);
                    let d = central_derivative(&t, &thi, m) - w * central_derivative(&t, &th0, m);
                    worst = worst.max(d.abs());
                }
            }
        }
        assert!(worst < 1e-5, "frame residual {worst:e}");
    }
}

#[test]
fn momentum_functions_obey_the_bracket_relations() {
    for case in random_cases(4) {
        let dt = 1e-3;
        let s0 = cotangent_start(&case.spec);
        let opts = FlowOptions {
            sample_dt: Some(dt),
            ..FlowOptions::with_tol(TOL)
        };
        let flow = integrate_full_with(&s0, case.period, &[], &opts).unwrap();
        let on_grid: Vec<usize> = (0..flow.t.len())
            .filter(|&m| (flow.t[m] / dt).round() * dt == flow.t[m])
            .collect();
        let t: Vec<f64> = on_grid.iter().map(|&m| flow.t[m]).collect();
        let mom: Vec<_> = on_grid.iter().map(|&m| momentum_functions(&flow.states[m])).collect();
        let (n, k) = (s0.p_theta.n(), s0.p_theta.k());
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..=k {
                let series: Vec<f64> = mom.iter().map(|p| p.layers.get(i, j)).collect();
                for m in 1..t.len() - 1 {
                    let rate = central_derivative(&t, &series, m);
                    let want = if i < k {
                        mom[m].p0 * mom[m].layers.get(i + 1, j)
                    } else {
                        0.0
                    };
                    worst = worst.max((rate - want).abs());
                }
            }
        }
        assert!(worst < 1e-5, "bracket residual {worst:e}");
    }
}

#[test]
fn harmonic_geodesic_returns_in_x_but_not_in_theta() {
    let spec = harmonic_spec();
    let l = period_l(&spec.f, &spec.interval, 64).unwrap();
    let traj = geodesic(&spec, 1.1 * l, &[l], &FlowOptions::with_tol(TOL)).unwrap();
    let r = periodicity_residual(&traj, l).unwrap();
    assert!(r.x_part <= 1e-6);
    assert!((r.theta_part - PI).abs() < 1e-8, "theta part {}", r.theta_part);
}

#[test]
fn line_geodesic_moves_a_distance_equal_to_elapsed_time() {
    let f = pv(&[&[0.6]]);
    let spec = GeodesicSpec {
        f,
        interval: HillInterval::Unbounded,
        x0: 0.25,
        px_sign: 1.0,
        theta0: JetMatrix::zeros(1, 0),
    };
    let l = 2.5;
    let traj = geodesic(&spec, l, &[], &FlowOptions::with_tol(TOL)).unwrap();
    let r = periodicity_residual(&traj, l).unwrap();
    assert!((r.x_part - 0.8 * l).abs() < 1e-12);
    assert!((r.theta_part - 0.6 * l).abs() < 1e-12);
    assert!((r.x_part.hypot(r.theta_part) - l).abs() < 1e-12);
}

#[test]
fn sampled_x_periodic_geodesics_never_close() {
    for index in 0..25 {
        let (f, interval) = sample_pair(&mut case_rng(7, index), 4, 3).unwrap();
        let (a, b) = interval.bounds().unwrap();
        let l = period_l(&f, &interval, 64).unwrap();
        let spec = GeodesicSpec {
            theta0: JetMatrix::zeros(f.n(), f.k()),
            f,
            interval,
            x0: 0.5 * (a + b),
            px_sign: 1.0,
        };
        let t0 = 0.1 * l;
        let traj = geodesic(&spec, t0 + 1.05 * l, &[t0, t0 + l], &FlowOptions::with_tol(TOL)).unwrap();
        let r = periodicity_residual_at(&traj, t0, l).unwrap();
        assert!(r.x_part <= 1e-6, "case {index}: x part {:e}", r.x_part);
        assert!(r.x_part.max(r.theta_part) >= 1e-8, "case {index}: closed up");
    }
}

//! Shared fixtures for the integration targets.
#![allow(dead_code)]

use jetflow_core::jetspace::p_theta_for_coeffs;
use jetflow_core::periods::{period_l, HillInterval};
use jetflow_core::sweep::{case_rng, sample_pair};
use jetflow_core::{CotangentState, GeodesicSpec, JetMatrix, JetPoint, PolyVec};
use rand::Rng;

/// Fixed seed for the ten random geodesic specs.
pub const SPEC_SEED: u64 = 20_240_611;

pub struct Case {
    pub spec: GeodesicSpec,
    pub period: f64,
}

/// Ten random x-periodic specs with `k <= 4`, `n <= 3`, random start inside
/// the interval, random direction and random initial theta.
pub fn random_cases(count: usize) -> Vec<Case> {
    (0..count)
        .map(|m| {
            let mut rng = case_rng(SPEC_SEED, m);
            let (f, interval) = sample_pair(&mut rng, 4, 3).unwrap();
            let (a, b) = interval.bounds().unwrap();
            let x0 = 0.5 * (a + b) + 0.4 * (b - a) * rng.gen_range(-1.0..=1.0);
            let px_sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let rows = (0..f.n())
                .map(|_| (0..=f.k()).map(|_| rng.gen_range(-1.0..=1.0)).collect())
                .collect();
            let theta0 = JetMatrix::from_rows(rows).unwrap();
            let period = period_l(&f, &interval, 64).unwrap();
            Case {
                spec: GeodesicSpec {
                    f,
                    interval,
                    x0,
                    px_sign,
                    theta0,
                },
                period,
            }
        })
        .collect()
}

/// The cotangent state whose full flow projects to the geodesic of `spec`.
pub fn cotangent_start(spec: &GeodesicSpec) -> CotangentState {
    let px0 = jetflow_core::dynamics::initial_momentum(&spec.f, spec.x0, spec.px_sign);
    CotangentState::new(
        JetPoint {
            x: spec.x0,
            theta: spec.theta0.clone(),
        },
        px0,
        p_theta_for_coeffs(spec.f.coeffs()).unwrap(),
    )
    .unwrap()
}

pub fn pv(rows: &[&[f64]]) -> PolyVec {
    PolyVec::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

pub fn first_interval(f: &PolyVec) -> HillInterval {
    jetflow_core::hill_intervals(f).unwrap()[0]
}

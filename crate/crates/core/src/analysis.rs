//! Geodesic classification and the non-periodicity certificate.
//!
//! A geodesic of an x-periodic pair returns to its starting point exactly
//! when every holonomy increment vanishes. Since
//! `(i!/2) Delta theta_i^j = sum_m G[i][m] a_m^j` with `G` the Gram matrix
//! of the weighted inner product, a vanishing `Delta theta` would force
//! `G a^j = 0` and hence `F = 0`. The certificate checks both halves
//! numerically: `Delta theta` is far from zero, and solving `G c = v`
//! recovers the coefficients of `F`.

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::jetspace::JetMatrix;
use crate::numeric::factorial;
use crate::periods::{
    converged_nodes, gram_in_basis, validate_interval, Endpoint, HillInterval, WeightedNodes, DEFAULT_QUADRATURE_N,
};
use crate::poly::Poly;
use crate::polyvec::PolyVec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum GeodesicClass {
    Line,
    XPeriodic {
        period: f64,
    },
    /// Flags are `true` for critical endpoints.
    Critical {
        end0: bool,
        end1: bool,
    },
    /// Starts at rest on a critical point and stays there.
    Equilibrium,
}

pub fn classify(f: &PolyVec, interval: &HillInterval) -> Result<GeodesicClass> {
    classify_with(f, interval, DEFAULT_QUADRATURE_N)
}

pub fn classify_with(f: &PolyVec, interval: &HillInterval, n: usize) -> Result<GeodesicClass> {
    let interval = validate_interval(f, interval)?;
    if f.is_constant() {
        return Ok(GeodesicClass::Line);
    }
    match interval {
        HillInterval::Unbounded => Err(Error::UnboundedInterval),
        HillInterval::Bounded { end0, end1, .. } if end0 == Endpoint::Regular && end1 == Endpoint::Regular => {
            Ok(GeodesicClass::XPeriodic {
                period: crate::periods::period_l(f, &interval, n)?,
            })
        }
        HillInterval::Bounded { end0, end1, .. } => Ok(GeodesicClass::Critical {
            end0: end0 == Endpoint::Critical,
            end1: end1 == Endpoint::Critical,
        }),
    }
}

/// As [`classify`], but a start exactly on a critical endpoint (within
/// `1e-12`) is an equilibrium.
pub fn classify_start(f: &PolyVec, interval: &HillInterval, x_init: f64) -> Result<GeodesicClass> {
    let class = classify(f, interval)?;
    if let (GeodesicClass::Critical { end0, end1 }, Some((x0, x1))) = (class, interval.bounds()) {
        if (end0 && (x_init - x0).abs() <= 1e-12) || (end1 && (x_init - x1).abs() <= 1e-12) {
            return Ok(GeodesicClass::Equilibrium);
        }
    }
    Ok(class)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    NotPeriodic,
    NumericallyInconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Starting node count; doubled until the period settles.
    pub quadrature_n: usize,
    pub max_quadrature_n: usize,
    /// Relative agreement of the period at `N` and `2N`.
    pub period_tol: f64,
    /// `max |Delta theta|` must exceed this.
    pub delta_threshold: f64,
    pub reconstruction_tol: f64,
    /// Coefficients below this magnitude are compared in absolute terms.
    pub coeff_floor: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            quadrature_n: DEFAULT_QUADRATURE_N,
            max_quadrature_n: 1024,
            period_tol: 1e-12,
            delta_threshold: 1e-10,
            reconstruction_tol: 1e-6,
            coeff_floor: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "F")]
    pub f: PolyVec,
    pub interval: HillInterval,
    pub quadrature_n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub delta_theta: JetMatrix,
    /// Gram matrix in the basis `y^i`, `y = (x - gram_center) / gram_half_width`.
    pub gram: Vec<Vec<f64>>,
    pub gram_center: f64,
    pub gram_half_width: f64,
    pub gram_lambda_min: f64,
    pub delta_inf_norm: f64,
    pub reconstructed: PolyVec,
    pub reconstruction_error: f64,
    pub verdict: Verdict,
}

/// Largest coefficient error of `c` against `a`: relative for coefficients
/// above `floor`, absolute otherwise.
pub fn reconstruction_error(a: &PolyVec, c: &PolyVec, floor: f64) -> f64 {
    a.coeffs()
        .iter()
        .flatten()
        .zip(c.coeffs().iter().flatten())
        .map(|(&x, &y)| {
            let d = (x - y).abs();
            if x.abs() > floor {
                d / x.abs()
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}

pub fn certify_not_periodic(f: &PolyVec, interval: &HillInterval) -> Result<Certificate> {
    certify_with(f, interval, &CertifyOptions::default())
}

pub fn certify_with(f: &PolyVec, interval: &HillInterval, opts: &CertifyOptions) -> Result<Certificate> {
    if f.is_constant() {
        return Err(Error::Invalid("certificate needs a non-constant F".into()));
    }
    let conv = converged_nodes(f, interval, opts.quadrature_n, opts.period_tol, opts.max_quadrature_n)?;
    let nodes = WeightedNodes::new(f, interval, conv.n)?;
    let (n, k) = (f.n(), f.k());
    // The monomials x^i are nearly dependent on a short interval away from
    // the origin. Solving in y = (x - center) / half and converting back is
    // the same linear system in a well-conditioned basis.
    let (lo, hi) = interval.bounds().ok_or(Error::UnboundedInterval)?;
    let (center, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let gram = gram_in_basis(&nodes, k, center, half)?;

    let mut delta = JetMatrix::zeros(n, k);
    let mut rows = Vec::with_capacity(n);
    for j in 0..n {
        let fj = f.component(j);
        let vals: Vec<f64> = nodes.x.iter().map(|&x| fj.eval(x)).collect();
        for i in 0..=k {
            let v: f64 = nodes
                .x
                .iter()
                .zip(&nodes.w)
                .zip(&vals)
                .map(|((x, w), fx)| w * x.powi(i as i32) * fx)
                .sum();
            delta.set(i, j, 2.0 / factorial(i) * v);
        }
        let vy: Vec<f64> = (0..=k)
            .map(|i| {
                nodes
                    .x
                    .iter()
                    .zip(&nodes.w)
                    .zip(&vals)
                    .map(|((x, w), fx)| w * ((x - center) / half).powi(i as i32) * fx)
                    .sum()
            })
            .collect();
        let b = Poly::new(gram.solve(&vy)?);
        let mut c = b.dilate(1.0 / half).translate(center).coeffs().to_vec();
        c.resize(k + 1, 0.0);
        rows.push(c);
    }
    let reconstructed = PolyVec::new(rows)?;
    let err = reconstruction_error(f, &reconstructed, opts.coeff_floor);
    let delta_inf_norm = delta.rows().iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let verdict = if delta_inf_norm > opts.delta_threshold && err <= opts.reconstruction_tol && gram.lambda_min > 0.0 {
        Verdict::NotPeriodic
    } else {
        Verdict::NumericallyInconclusive
    };
    Ok(Certificate {
        f: f.clone(),
        interval: *interval,
        quadrature_n: conv.n,
        l: 2.0 * nodes.integrate(|_| 1.0),
        delta_theta: delta,
        gram_center: center,
        gram_half_width: half,
        gram_lambda_min: gram.lambda_min,
        gram: gram.matrix,
        delta_inf_norm,
        reconstructed,
        reconstruction_error: err,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityResidual {
    /// `|x(t0 + L) - x(t0)|`
    pub x_part: f64,
    /// `max_{i,j} |theta_i^j(t0 + L) - theta_i^j(t0)|`
    pub theta_part: f64,
}

/// Residual over one period starting at the first sample.
pub fn periodicity_residual(traj: &Trajectory, l: f64) -> Result<PeriodicityResidual> {
    let t0 = traj
        .samples
        .first()
        .map(|s| s.t)
        .ok_or(Error::TooFewSamples { needed: 1, got: 0 })?;
    periodicity_residual_at(traj, t0, l)
}

pub fn periodicity_residual_at(traj: &Trajectory, t0: f64, l: f64) -> Result<PeriodicityResidual> {
    let last = traj.samples.last().ok_or(Error::TooFewSamples { needed: 1, got: 0 })?;
    if last.t < t0 + l {
        return Err(Error::SpanTooShort {
            t_last: last.t,
            t_needed: t0 + l,
        });
    }
    let (xa, _, ta) = traj.state_at(t0)?;
    let (xb, _, tb) = traj.state_at(t0 + l)?;
    Ok(PeriodicityResidual {
        x_part: (xb - xa).abs(),
        theta_part: tb.max_abs_diff(&ta),
    })
}

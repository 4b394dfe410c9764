//! Geodesic synthesis.
//!
//! The reduced system is the one-degree-of-freedom Hamiltonian
//! `H_F = p^2/2 + ||F(x)||^2/2` at level `1/2`:
//!
//! ```text
//! x' = p,   p' = -(F'(x), F(x))
//! ```
//!
//! The horizontal lift integrates `theta_i^j' = x^i/i! F^j(x(t))`. The full
//! cotangent flow integrates the canonical equations of the sub-Riemannian
//! Hamiltonian directly and serves as an independent check on the pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jetspace::{CotangentState, JetMatrix, JetPoint};
use crate::numeric::{central_derivative5, scaled_powers};
use crate::ode::{integrate, integrate_until, OdeOptions, System};
use crate::periods::HillInterval;
use crate::poly::Poly;
use crate::polyvec::PolyVec;

/// Allowed offset of the initial condition from the `H = 1/2` level set.
pub const ENERGY_LEVEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub t: f64,
    pub x: f64,
    pub p_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub tol: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
    /// Pull each accepted reduced step back onto `p^2 = 1 - ||F(x)||^2`.
    pub project_energy: bool,
    /// Adds a uniform grid of output times with this spacing.
    pub sample_dt: Option<f64>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        let ode = OdeOptions::default();
        FlowOptions {
            tol: ode.tol,
            h_max: ode.h_max,
            h_min: ode.h_min,
            max_steps: ode.max_steps,
            project_energy: true,
            sample_dt: None,
        }
    }
}

impl FlowOptions {
    pub fn with_tol(tol: f64) -> Self {
        FlowOptions {
            tol,
            ..Default::default()
        }
    }

    fn ode(&self) -> OdeOptions {
        OdeOptions {
            tol: self.tol,
            h_init: None,
            h_max: self.h_max,
            h_min: self.h_min,
            max_steps: self.max_steps,
        }
    }

    fn output_times(&self, t_end: f64, extra: &[f64]) -> Result<Vec<f64>> {
        let mut out: Vec<f64> = extra.to_vec();
        if let Some(dt) = self.sample_dt {
            if !(dt > 0.0) {
                return Err(Error::Invalid(format!("sample spacing must be positive, got {dt}")));
            }
            let m = (t_end / dt).floor() as usize;
            out.extend((1..=m).map(|i| i as f64 * dt));
        }
        Ok(out)
    }
}

/// `1 - ||F||^2` and its first derivative, the only data the reduced flow needs.
struct ReducedSystem {
    hill: Poly,
    dhill: Poly,
    project: bool,
}

impl ReducedSystem {
    fn new(f: &PolyVec, project: bool) -> Self {
        let hill = f.hill_poly();
        let dhill = hill.derivative();
        ReducedSystem { hill, dhill, project }
    }
}

impl System for ReducedSystem {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        // -(F', F) = (1/2) d/dx (1 - ||F||^2)
        dy[1] = 0.5 * self.dhill.eval(y[0]);
    }

    // One Newton step along the gradient of D = p^2 - (1 - ||F(x)||^2).
    // Evaluating the Hill polynomial from its own coefficients keeps D
    // relatively accurate near critical points, where the level set is the
    // pair of separatrices.
    fn project(&self, y: &mut [f64]) -> f64 {
        if !self.project {
            return 0.0;
        }
        let d = y[1] * y[1] - self.hill.eval(y[0]);
        let (gx, gp) = (-self.dhill.eval(y[0]), 2.0 * y[1]);
        let g2 = gx * gx + gp * gp;
        if g2 > 0.0 && g2.is_finite() {
            let s = d / g2;
            if (s * s * g2).sqrt() <= 1e-6 {
                y[0] -= s * gx;
                y[1] -= s * gp;
            }
        }
        0.5 * d.abs()
    }
}

/// `H_F(x, p) = p^2/2 + ||F(x)||^2/2`
pub fn reduced_energy(f: &PolyVec, x: f64, p_x: f64) -> f64 {
    0.5 * p_x * p_x + 0.5 * f.sq_norm_at(x)
}

/// `p_x(0) = sign * sqrt(1 - ||F(x0)||^2)`, clamped at zero on the boundary.
pub fn initial_momentum(f: &PolyVec, x0: f64, sign: f64) -> f64 {
    let s = if sign < 0.0 { -1.0 } else { 1.0 };
    s * f.hill_poly().eval(x0).max(0.0).sqrt()
}

pub fn integrate_reduced(f: &PolyVec, x0: f64, px0: f64, t_end: f64, tol: f64) -> Result<Vec<ReducedState>> {
    integrate_reduced_with(f, x0, px0, t_end, &[], &FlowOptions::with_tol(tol))
}

/// Reduced flow on `[0, t_end]`; every accepted step is returned and each
/// time in `stops` (and on the `sample_dt` grid) is hit exactly.
pub fn integrate_reduced_with(
    f: &PolyVec,
    x0: f64,
    px0: f64,
    t_end: f64,
    stops: &[f64],
    opts: &FlowOptions,
) -> Result<Vec<ReducedState>> {
    check_level(f, x0, px0)?;
    if !(t_end > 0.0) {
        return Err(Error::Invalid(format!("duration must be positive, got {t_end}")));
    }
    let sys = ReducedSystem::new(f, opts.project_energy);
    let times = opts.output_times(t_end, stops)?;
    let sol = integrate(&sys, 0.0, &[x0, px0], t_end, &times, &opts.ode())?;
    Ok(sol
        .t
        .iter()
        .zip(&sol.y)
        .map(|(&t, y)| ReducedState { t, x: y[0], p_x: y[1] })
        .collect())
}

fn check_level(f: &PolyVec, x0: f64, px0: f64) -> Result<()> {
    if !x0.is_finite() || !px0.is_finite() {
        return Err(Error::Invalid("non-finite initial condition".into()));
    }
    let offset = reduced_energy(f, x0, px0) - 0.5;
    if offset.abs() > ENERGY_LEVEL_TOL {
        return Err(Error::BadEnergyLevel { offset });
    }
    Ok(())
}

/// Time to cross a regular Hill interval from `x0` to `x1`, released at rest
/// from the left endpoint; half the x-period.
pub fn crossing_time(f: &PolyVec, interval: &HillInterval, tol: f64) -> Result<f64> {
    let (x0, _) = match *interval {
        HillInterval::Unbounded => return Err(Error::UnboundedInterval),
        HillInterval::Bounded { .. } if !interval.is_regular() => return Err(Error::CriticalEndpoint),
        HillInterval::Bounded { x0, x1, .. } => (x0, x1),
    };
    let sys = ReducedSystem::new(f, true);
    let opts = FlowOptions::with_tol(tol).ode();
    let (_, event) = integrate_until(&sys, 0.0, &[x0, 0.0], 1e6, |_, y| y[1], &opts)?;
    event
        .map(|e| e.t)
        .ok_or_else(|| Error::Invalid("no turning point reached".into()))
}

/// One output sample of a lifted geodesic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub p_x: f64,
    pub theta: JetMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `max |H_F - 1/2|` over the samples.
    pub max_energy_drift: f64,
    /// `None` when there are fewer than three samples.
    pub max_arclength_defect: Option<f64>,
}

/// Initial data of a geodesic of the pair `(F, I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSpec {
    #[serde(rename = "F")]
    pub f: PolyVec,
    pub interval: HillInterval,
    pub x0: f64,
    pub px_sign: f64,
    pub theta0: JetMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    #[serde(rename = "F")]
    pub f: PolyVec,
    pub interval: Option<HillInterval>,
    pub x0: f64,
    pub px0: f64,
    pub theta0: JetMatrix,
    pub samples: Vec<Sample>,
    pub diagnostics: Diagnostics,
}

// Five-point Gauss–Legendre rule on [0, 1].
const GL_NODES: [f64; 5] = [
    0.5 * (1.0 - 0.906_179_845_938_664),
    0.5 * (1.0 - 0.538_469_310_105_683_1),
    0.5,
    0.5 * (1.0 + 0.538_469_310_105_683_1),
    0.5 * (1.0 + 0.906_179_845_938_664),
];
const GL_WEIGHTS: [f64; 5] = [
    0.5 * 0.236_926_885_056_189_1,
    0.5 * 0.478_628_670_499_366_5,
    0.5 * 0.568_888_888_888_888_9,
    0.5 * 0.478_628_670_499_366_5,
    0.5 * 0.236_926_885_056_189_1,
];

/// Quintic Hermite interpolant of `x` on one step, matching value, velocity
/// and acceleration at both ends.
fn hermite5(s: f64, h: f64, y0: f64, v0: f64, a0: f64, y1: f64, v1: f64, a1: f64) -> f64 {
    let (s2, s3) = (s * s, s * s * s);
    let (s4, s5) = (s3 * s, s3 * s2);
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    let h3 = 0.5 * s3 - s4 + 0.5 * s5;
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    y0 * h0 + h * v0 * h1 + h * h * (a0 * h2 + a1 * h3) + h * v1 * h4 + y1 * h5
}

/// Adds `dt * x^i/i! F^j(x)` into `acc`.
fn add_lift_rate(f: &PolyVec, x: f64, dt: f64, acc: &mut JetMatrix) {
    let pw = scaled_powers(x, f.k());
    for (j, fj) in f.eval(x).into_iter().enumerate() {
        for (i, w) in pw.iter().enumerate() {
            acc.set(i, j, acc.get(i, j) + dt * w * fj);
        }
    }
}

/// Horizontal lift of a reduced solution. Each step is integrated by
/// five-point Gauss–Legendre on the quintic Hermite interpolant of `x(t)`.
pub fn lift(f: &PolyVec, reduced: &[ReducedState], theta0: &JetMatrix) -> Result<Trajectory> {
    let first = reduced.first().ok_or(Error::TooFewSamples { needed: 1, got: 0 })?;
    if theta0.n() != f.n() || theta0.k() != f.k() {
        return Err(Error::Dimension(format!(
            "theta0 is {}x{}, F needs {}x{}",
            theta0.k() + 1,
            theta0.n(),
            f.k() + 1,
            f.n()
        )));
    }
    let dhill = f.hill_poly().derivative();
    let accel = |x: f64| 0.5 * dhill.eval(x);
    let mut theta = theta0.clone();
    let mut samples = Vec::with_capacity(reduced.len());
    samples.push(Sample {
        t: first.t,
        x: first.x,
        p_x: first.p_x,
        theta: theta.clone(),
    });
    for w in reduced.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = b.t - a.t;
        let (a0, a1) = (accel(a.x), accel(b.x));
        for (s, wq) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let x = hermite5(*s, h, a.x, a.p_x, a0, b.x, b.p_x, a1);
            add_lift_rate(f, x, h * wq, &mut theta);
        }
        samples.push(Sample {
            t: b.t,
            x: b.x,
            p_x: b.p_x,
            theta: theta.clone(),
        });
    }
    let mut traj = Trajectory {
        f: f.clone(),
        interval: None,
        x0: first.x,
        px0: first.p_x,
        theta0: theta0.clone(),
        samples,
        diagnostics: Diagnostics {
            max_energy_drift: 0.0,
            max_arclength_defect: None,
        },
    };
    traj.refresh_diagnostics();
    Ok(traj)
}

/// Validates the spec, integrates the reduced flow for `duration` and lifts it.
pub fn geodesic(spec: &GeodesicSpec, duration: f64, stops: &[f64], opts: &FlowOptions) -> Result<Trajectory> {
    if !spec.interval.contains(spec.x0, 1e-12) {
        let (lo, hi) = spec.interval.bounds().unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
        return Err(Error::OutsideHillInterval { x: spec.x0, lo, hi });
    }
    let px0 = initial_momentum(&spec.f, spec.x0, spec.px_sign);
    let reduced = integrate_reduced_with(&spec.f, spec.x0, px0, duration, stops, opts)?;
    let mut traj = lift(&spec.f, &reduced, &spec.theta0)?;
    traj.interval = Some(spec.interval);
    Ok(traj)
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn refresh_diagnostics(&mut self) {
        let f = &self.f;
        self.diagnostics = Diagnostics {
            max_energy_drift: self
                .samples
                .iter()
                .map(|s| (reduced_energy(f, s.x, s.p_x) - 0.5).abs())
                .fold(0.0, f64::max),
            max_arclength_defect: arclength_defect(self).ok(),
        };
    }

    /// Largest excursion outside the Hill interval (zero when unbounded).
    pub fn max_confinement_violation(&self) -> f64 {
        match self.interval.and_then(|i| i.bounds()) {
            None => 0.0,
            Some((lo, hi)) => self
                .samples
                .iter()
                .map(|s| (lo - s.x).max(s.x - hi).max(0.0))
                .fold(0.0, f64::max),
        }
    }

    /// The state at time `t`: the recorded sample if one lands exactly on
    /// `t`, otherwise cubic Hermite interpolation between neighbours using
    /// the known velocities.
    pub fn state_at(&self, t: f64) -> Result<(f64, f64, JetMatrix)> {
        let (first, last) = match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::TooFewSamples { needed: 1, got: 0 }),
        };
        if t < first.t || t > last.t {
            return Err(Error::SpanTooShort {
                t_last: last.t,
                t_needed: t,
            });
        }
        let idx = self.samples.partition_point(|s| s.t < t);
        let b = &self.samples[idx];
        if b.t == t {
            return Ok((b.x, b.p_x, b.theta.clone()));
        }
        let a = &self.samples[idx - 1];
        let h = b.t - a.t;
        let s = (t - a.t) / h;
        let (h00, h10) = (2.0 * s.powi(3) - 3.0 * s * s + 1.0, s.powi(3) - 2.0 * s * s + s);
        let (h01, h11) = (-2.0 * s.powi(3) + 3.0 * s * s, s.powi(3) - s * s);
        let cubic = |y0: f64, d0: f64, y1: f64, d1: f64| h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        let dhill = self.f.hill_poly().derivative();
        let x = cubic(a.x, a.p_x, b.x, b.p_x);
        let p = cubic(a.p_x, 0.5 * dhill.eval(a.x), b.p_x, 0.5 * dhill.eval(b.x));
        let (mut da, mut db) = (
            JetMatrix::zeros(self.f.n(), self.f.k()),
            JetMatrix::zeros(self.f.n(), self.f.k()),
        );
        add_lift_rate(&self.f, a.x, 1.0, &mut da);
        add_lift_rate(&self.f, b.x, 1.0, &mut db);
        let mut theta = JetMatrix::zeros(self.f.n(), self.f.k());
        for j in 0..self.f.n() {
            for i in 0..=self.f.k() {
                theta.set(
                    i,
                    j,
                    cubic(a.theta.get(i, j), da.get(i, j), b.theta.get(i, j), db.get(i, j)),
                );
            }
        }
        Ok((x, p, theta))
    }
}

/// `max |x'^2 + sum_j (theta_0^j)'^2 - 1|` with central-difference
/// velocities. With five or more samples the estimate uses the five-point
/// stencil and skips the two samples at each end; otherwise three points.
pub fn arclength_defect(traj: &Trajectory) -> Result<f64> {
    let m = traj.samples.len();
    if m < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: m });
    }
    let t = traj.times();
    if !crate::numeric::strictly_increasing(&t) {
        return Err(Error::Invalid("timestamps must be strictly increasing".into()));
    }
    let x: Vec<f64> = traj.samples.iter().map(|s| s.x).collect();
    let n = traj.samples[0].theta.n();
    let th: Vec<Vec<f64>> = (0..n)
        .map(|j| traj.samples.iter().map(|s| s.theta.get(0, j)).collect())
        .collect();
    let edge = if m >= 5 { 2 } else { 1 };
    Ok((edge..m - edge)
        .map(|i| {
            let vx = central_derivative5(&t, &x, i);
            let v2: f64 = th.iter().map(|c| central_derivative5(&t, c, i).powi(2)).sum();
            (vx * vx + v2 - 1.0).abs()
        })
        .fold(0.0, f64::max))
}

/// `t,x,p_x,theta_0_1,...,theta_k_n`, layer index outer, component 1-based.
pub fn csv_header(n: usize, k: usize) -> Vec<String> {
    let mut h = vec!["t".to_string(), "x".to_string(), "p_x".to_string()];
    for i in 0..=k {
        for j in 1..=n {
            h.push(format!("theta_{i}_{j}"));
        }
    }
    h
}

impl Sample {
    pub fn csv_row(&self) -> Vec<f64> {
        let mut r = vec![self.t, self.x, self.p_x];
        r.extend(self.theta.flatten_layer_major());
        r
    }

    pub fn from_csv_row(row: &[f64], n: usize, k: usize) -> Result<Sample> {
        if row.len() != 3 + (k + 1) * n {
            return Err(Error::Dimension(format!("row has {} fields", row.len())));
        }
        Ok(Sample {
            t: row[0],
            x: row[1],
            p_x: row[2],
            theta: JetMatrix::from_layer_major(n, k, &row[3..])?,
        })
    }
}

/// Canonical flow of the sub-Riemannian Hamiltonian in `(x, theta, p_x, p_theta)`.
/// State layout: `[x, p_x, theta (layer-major), p_theta (layer-major)]`.
struct FullSystem {
    n: usize,
    k: usize,
}

impl FullSystem {
    fn block(&self) -> usize {
        (self.k + 1) * self.n
    }

    /// First- and second-layer momenta `P_{X_0^j}`, `P_{X_1^j}`.
    fn layer_momenta(&self, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (n, k) = (self.n, self.k);
        let pw = scaled_powers(y[0], k);
        let pt = &y[2 + self.block()..];
        let p0 = (0..n).map(|j| (0..=k).map(|m| pw[m] * pt[m * n + j]).sum()).collect();
        let p1 = (0..n)
            .map(|j| (1..=k).map(|m| pw[m - 1] * pt[m * n + j]).sum())
            .collect();
        (p0, p1)
    }

    fn pack(&self, s: &CotangentState) -> Vec<f64> {
        let mut y = vec![s.point.x, s.p_x];
        y.extend(s.point.theta.flatten_layer_major());
        y.extend(s.p_theta.flatten_layer_major());
        y
    }

    fn unpack(&self, y: &[f64]) -> Result<CotangentState> {
        let b = self.block();
        CotangentState::new(
            JetPoint {
                x: y[0],
                theta: JetMatrix::from_layer_major(self.n, self.k, &y[2..2 + b])?,
            },
            y[1],
            JetMatrix::from_layer_major(self.n, self.k, &y[2 + b..])?,
        )
    }

    fn energy(&self, y: &[f64]) -> f64 {
        let (p0, _) = self.layer_momenta(y);
        0.5 * y[1] * y[1] + 0.5 * p0.iter().map(|v| v * v).sum::<f64>()
    }
}

impl System for FullSystem {
    fn dim(&self) -> usize {
        2 + 2 * self.block()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let (n, k) = (self.n, self.k);
        let pw = scaled_powers(y[0], k);
        let (p0, p1) = self.layer_momenta(y);
        dy[0] = y[1];
        // -dH/dx, since dP_{X_0^j}/dx = P_{X_1^j}
        dy[1] = -p0.iter().zip(&p1).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..=k {
            for j in 0..n {
                dy[2 + i * n + j] = pw[i] * p0[j];
            }
        }
        for v in &mut dy[2 + self.block()..] {
            *v = 0.0;
        }
    }
}

/// Output of [`integrate_full`].
#[derive(Debug, Clone)]
pub struct FullFlow {
    pub t: Vec<f64>,
    pub states: Vec<CotangentState>,
    /// `max |H - H(0)|`
    pub max_energy_drift: f64,
    /// `max |p_theta(t) - p_theta(0)|` over all entries.
    pub max_p_theta_drift: f64,
}

pub fn integrate_full(s0: &CotangentState, t_end: f64, tol: f64) -> Result<FullFlow> {
    integrate_full_with(s0, t_end, &[], &FlowOptions::with_tol(tol))
}

pub fn integrate_full_with(s0: &CotangentState, t_end: f64, stops: &[f64], opts: &FlowOptions) -> Result<FullFlow> {
    if !(t_end > 0.0) {
        return Err(Error::Invalid(format!("duration must be positive, got {t_end}")));
    }
    let sys = FullSystem {
        n: s0.p_theta.n(),
        k: s0.p_theta.k(),
    };
    let y0 = sys.pack(s0);
    let times = opts.output_times(t_end, stops)?;
    let sol = integrate(&sys, 0.0, &y0, t_end, &times, &opts.ode())?;
    let h0 = sys.energy(&y0);
    let b = sys.block();
    let mut max_energy_drift = 0.0_f64;
    let mut max_p_theta_drift = 0.0_f64;
    let mut states = Vec::with_capacity(sol.y.len());
    for y in &sol.y {
        max_energy_drift = max_energy_drift.max((sys.energy(y) - h0).abs());
        let pd = y[2 + b..]
            .iter()
            .zip(&y0[2 + b..])
            .map(|(a, c)| (a - c).abs())
            .fold(0.0, f64::max);
        max_p_theta_drift = max_p_theta_drift.max(pd);
        states.push(sys.unpack(y)?);
    }
    Ok(FullFlow {
        t: sol.t,
        states,
        max_energy_drift,
        max_p_theta_drift,
    })
}

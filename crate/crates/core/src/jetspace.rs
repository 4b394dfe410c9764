//! Chart layer for the jet space: the `u` and `theta` coordinate systems,
//! the horizontal frame, momentum functions and horizontality diagnostics.
//!
//! Matrices indexed by layer `i = 0..=k` and component `j = 0..n` are stored
//! component-major, matching the JSON layout `[[m_0^1..m_k^1], ...]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{central_derivative, factorial, scaled_powers, strictly_increasing};

/// An `n x (k + 1)` block of per-layer, per-component values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct JetMatrix {
    n: usize,
    k: usize,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for JetMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        JetMatrix::from_rows(rows)
    }
}

impl From<JetMatrix> for Vec<Vec<f64>> {
    fn from(m: JetMatrix) -> Self {
        m.rows
    }
}

impl JetMatrix {
    pub fn zeros(n: usize, k: usize) -> Self {
        JetMatrix {
            n,
            k,
            rows: vec![vec![0.0; k + 1]; n],
        }
    }

    /// One row per component `j`, each of length `k + 1`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let len = rows.first().map_or(0, Vec::len);
        if n == 0 || len == 0 || rows.iter().any(|r| r.len() != len) {
            return Err(Error::Dimension(
                "jet matrix rows must be non-empty and equal length".into(),
            ));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite jet coordinate".into()));
        }
        Ok(JetMatrix { n, k: len - 1, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Entry for layer `i`, component `j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[j][i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.rows[j][i] = v;
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Values flattened layer-major: `(i = 0, j = 0..n), (i = 1, j = 0..n), ...`
    pub fn flatten_layer_major(&self) -> Vec<f64> {
        (0..=self.k)
            .flat_map(|i| (0..self.n).map(move |j| self.rows[j][i]))
            .collect()
    }

    pub fn from_layer_major(n: usize, k: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != n * (k + 1) {
            return Err(Error::Dimension(format!(
                "expected {} values, got {}",
                n * (k + 1),
                flat.len()
            )));
        }
        let mut m = JetMatrix::zeros(n, k);
        for i in 0..=k {
            for j in 0..n {
                m.rows[j][i] = flat[i * n + j];
            }
        }
        Ok(m)
    }

    pub fn max_abs_diff(&self, other: &JetMatrix) -> f64 {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    fn same_shape(&self, other: &JetMatrix) -> bool {
        self.n == other.n && self.k == other.k
    }
}

/// A point in exponential coordinates `(x, theta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetPoint {
    pub x: f64,
    pub theta: JetMatrix,
}

/// A point in derivative coordinates `(x, u)`, `u_i` the i-th derivative slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetPointU {
    pub x: f64,
    pub u: JetMatrix,
}

/// Canonical cotangent coordinates over a [`JetPoint`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotangentState {
    pub point: JetPoint,
    pub p_x: f64,
    pub p_theta: JetMatrix,
}

impl CotangentState {
    pub fn new(point: JetPoint, p_x: f64, p_theta: JetMatrix) -> Result<Self> {
        if !point.theta.same_shape(&p_theta) {
            return Err(Error::Dimension("p_theta must match theta".into()));
        }
        if !point.x.is_finite() || !p_x.is_finite() {
            return Err(Error::Invalid("non-finite cotangent coordinate".into()));
        }
        Ok(CotangentState { point, p_x, p_theta })
    }
}

/// `theta_i = sum_{m=0}^{i} (-1)^m x^{i-m}/(i-m)! u_{k-m}`
pub fn theta_from_u(q: &JetPointU) -> JetPoint {
    let (n, k) = (q.u.n(), q.u.k());
    let pw = scaled_powers(q.x, k);
    let mut theta = JetMatrix::zeros(n, k);
    for j in 0..n {
        for i in 0..=k {
            let mut acc = 0.0;
            for m in 0..=i {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * pw[i - m] * q.u.get(k - m, j);
            }
            theta.set(i, j, acc);
        }
    }
    JetPoint { x: q.x, theta }
}

/// Inverse of [`theta_from_u`] by forward substitution over the layers.
pub fn u_from_theta(q: &JetPoint) -> JetPointU {
    let (n, k) = (q.theta.n(), q.theta.k());
    let pw = scaled_powers(q.x, k);
    let mut u = JetMatrix::zeros(n, k);
    for j in 0..n {
        for i in 0..=k {
            // (-1)^i u_{k-i} = theta_i - sum_{m<i} (-1)^m x^{i-m}/(i-m)! u_{k-m}
            let mut rest = q.theta.get(i, j);
            for m in 0..i {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                rest -= sign * pw[i - m] * u.get(k - m, j);
            }
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            u.set(k - i, j, sign * rest);
        }
    }
    JetPointU { x: q.x, u }
}

/// A tangent vector in `(x, theta)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub x: f64,
    pub theta: JetMatrix,
}

/// The orthonormal horizontal frame at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// `X_0 = d/dx`
    pub base: TangentVector,
    /// `X_0^j = sum_i x^i/i! d/dtheta_i^j`, one per component.
    pub components: Vec<TangentVector>,
}

pub fn frame(q: &JetPoint) -> Frame {
    let (n, k) = (q.theta.n(), q.theta.k());
    let pw = scaled_powers(q.x, k);
    let components = (0..n)
        .map(|j| {
            let mut theta = JetMatrix::zeros(n, k);
            for (i, &w) in pw.iter().enumerate() {
                theta.set(i, j, w);
            }
            TangentVector { x: 0.0, theta }
        })
        .collect();
    Frame {
        base: TangentVector {
            x: 1.0,
            theta: JetMatrix::zeros(n, k),
        },
        components,
    }
}

/// The horizontal vector `vx X_0 + sum_j w_j X_0^j`.
pub fn horizontal_vector(q: &JetPoint, vx: f64, w: &[f64]) -> Result<TangentVector> {
    let (n, k) = (q.theta.n(), q.theta.k());
    if w.len() != n {
        return Err(Error::Dimension(format!("need {n} frame weights, got {}", w.len())));
    }
    let pw = scaled_powers(q.x, k);
    let mut theta = JetMatrix::zeros(n, k);
    for (j, &wj) in w.iter().enumerate() {
        for (i, &p) in pw.iter().enumerate() {
            theta.set(i, j, p * wj);
        }
    }
    Ok(TangentVector { x: vx, theta })
}

/// Sub-Riemannian length of a horizontal vector: only `dx` and `dtheta_0`
/// enter the metric.
pub fn sr_speed(v: &TangentVector) -> f64 {
    let theta0: f64 = (0..v.theta.n()).map(|j| v.theta.get(0, j).powi(2)).sum();
    (v.x * v.x + theta0).sqrt()
}

/// Left-invariant momenta: `p0 = P_{X_0}` and `layers(i, j) = P_{X_i^j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Momenta {
    pub p0: f64,
    pub layers: JetMatrix,
}

/// `P_{X_i^j} = sum_{m >= i} x^{m-i}/(m-i)! p_{theta_m^j}`.
pub fn momentum_functions(s: &CotangentState) -> Momenta {
    let (n, k) = (s.p_theta.n(), s.p_theta.k());
    let pw = scaled_powers(s.point.x, k);
    let mut layers = JetMatrix::zeros(n, k);
    for j in 0..n {
        for i in 0..=k {
            let v: f64 = (i..=k).map(|m| pw[m - i] * s.p_theta.get(m, j)).sum();
            layers.set(i, j, v);
        }
    }
    Momenta { p0: s.p_x, layers }
}

/// Canonical momenta whose first-layer momentum function reproduces the
/// polynomial with coefficients `a[j][i]`: `p_{theta_i^j} = i! a_i^j`.
pub fn p_theta_for_coeffs(coeffs: &[Vec<f64>]) -> Result<JetMatrix> {
    let rows = coeffs
        .iter()
        .map(|row| row.iter().enumerate().map(|(i, a)| a * factorial(i)).collect())
        .collect();
    JetMatrix::from_rows(rows)
}

/// Max over samples, layers and components of `|du_i/dt - u_{i+1} dx/dt|`
/// using central differences in time.
pub fn horizontality_residual(samples: &[(f64, JetPointU)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    let t: Vec<f64> = samples.iter().map(|s| s.0).collect();
    if !strictly_increasing(&t) {
        return Err(Error::Invalid("timestamps must be strictly increasing".into()));
    }
    let (n, k) = (samples[0].1.u.n(), samples[0].1.u.k());
    if samples.iter().any(|s| s.1.u.n() != n || s.1.u.k() != k) {
        return Err(Error::Dimension("samples disagree on (n, k)".into()));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.1.x).collect();
    let mut worst = 0.0_f64;
    let mut series = vec![0.0; samples.len()];
    for j in 0..n {
        for i in 0..k {
            for (dst, s) in series.iter_mut().zip(samples) {
                *dst = s.1.u.get(i, j);
            }
            for m in 1..samples.len() - 1 {
                let du = central_derivative(&t, &series, m);
                let dx = central_derivative(&t, &xs, m);
                let r = (du - samples[m].1.u.get(i + 1, j) * dx).abs();
                worst = worst.max(r);
            }
        }
    }
    Ok(worst)
}

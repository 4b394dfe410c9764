//! Hill intervals, the x-period, holonomy increments and the weighted
//! polynomial inner product on a Hill interval.
//!
//! For a regular interval `[x0, x1]` the weight `1/sqrt(1 - ||F||^2)` has
//! inverse-square-root singularities at both ends. Writing
//! `1 - ||F||^2 = (x - x0)(x1 - x) q(x)` with `q > 0` on the closed interval
//! and substituting `x = m + r cos(phi)` leaves the smooth integrand
//! `g(x(phi)) / sqrt(q(x(phi)))` over `[0, pi]`, which Gauss–Chebyshev nodes
//! integrate with geometric convergence.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jetspace::JetMatrix;
use crate::numeric::factorial;
use crate::poly::{isolate_roots, Poly, Window};
use crate::polyvec::PolyVec;

pub const DEFAULT_QUADRATURE_N: usize = 64;

/// Grid size for the positivity check of the deflated polynomial.
const DEFLATION_GRID: usize = 1024;
const DEFLATION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    Regular,
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum HillInterval {
    Bounded {
        x0: f64,
        x1: f64,
        end0: Endpoint,
        end1: Endpoint,
    },
    /// Constant `F` with `||F|| <= 1`: every `x` is admissible.
    Unbounded,
}

impl HillInterval {
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            HillInterval::Bounded { x0, x1, .. } => Some((x0, x1)),
            HillInterval::Unbounded => None,
        }
    }

    pub fn is_regular(&self) -> bool {
        matches!(
            self,
            HillInterval::Bounded {
                end0: Endpoint::Regular,
                end1: Endpoint::Regular,
                ..
            }
        )
    }

    /// Closed-interval membership with slack `tol`.
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        match self.bounds() {
            Some((a, b)) => x >= a - tol && x <= b + tol,
            None => x.is_finite(),
        }
    }

    /// The interval translated by `shift`.
    pub fn translate(&self, shift: f64) -> HillInterval {
        match *self {
            HillInterval::Bounded { x0, x1, end0, end1 } => HillInterval::Bounded {
                x0: x0 + shift,
                x1: x1 + shift,
                end0,
                end1,
            },
            HillInterval::Unbounded => HillInterval::Unbounded,
        }
    }

    fn regular_bounds(&self) -> Result<(f64, f64)> {
        match *self {
            HillInterval::Unbounded => Err(Error::UnboundedInterval),
            HillInterval::Bounded { x0, x1, end0, end1 } => {
                if end0 == Endpoint::Critical || end1 == Endpoint::Critical {
                    Err(Error::CriticalEndpoint)
                } else {
                    Ok((x0, x1))
                }
            }
        }
    }
}

/// All Hill intervals of `F`, sorted left to right.
pub fn hill_intervals(f: &PolyVec) -> Result<Vec<HillInterval>> {
    if f.is_constant() {
        let norm = f.sq_norm_at(0.0).sqrt();
        return if norm <= 1.0 {
            Ok(vec![HillInterval::Unbounded])
        } else {
            Err(Error::ConstantAboveOne { norm })
        };
    }
    let p = f.hill_poly();
    let roots = isolate_roots(&p, Window::WholeLine)?;
    let out: Vec<HillInterval> = roots
        .windows(2)
        .filter(|w| p.eval(0.5 * (w[0].location + w[1].location)) > 0.0)
        .map(|w| {
            let tag = |m: usize| if m == 1 { Endpoint::Regular } else { Endpoint::Critical };
            HillInterval::Bounded {
                x0: w[0].location,
                x1: w[1].location,
                end0: tag(w[0].multiplicity),
                end1: tag(w[1].multiplicity),
            }
        })
        .collect();
    if out.is_empty() {
        return Err(Error::NoHillInterval);
    }
    Ok(out)
}

/// The Hill interval containing `x`, if any.
pub fn hill_interval_containing(f: &PolyVec, x: f64) -> Result<HillInterval> {
    let all = hill_intervals(f)?;
    all.iter().copied().find(|i| i.contains(x, 1e-12)).ok_or_else(|| {
        let (lo, hi) = all[0].bounds().unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
        Error::OutsideHillInterval { x, lo, hi }
    })
}

/// The Hill interval of `F` whose endpoints agree with `[lo, hi]` to `tol`
/// (absolute, scaled by `max(1, |endpoint|)`).
pub fn match_interval(f: &PolyVec, lo: f64, hi: f64, tol: f64) -> Result<HillInterval> {
    let close = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(1.0);
    hill_intervals(f)?
        .into_iter()
        .find(|i| matches!(i.bounds(), Some((a, b)) if close(a, lo) && close(b, hi)))
        .ok_or(Error::NotHillInterval { lo, hi })
}

/// Checks that `interval` is one of the Hill intervals of `F` and returns
/// the freshly computed copy.
pub fn validate_interval(f: &PolyVec, interval: &HillInterval) -> Result<HillInterval> {
    match interval.bounds() {
        Some((lo, hi)) => match_interval(f, lo, hi, 1e-9),
        None => {
            let all = hill_intervals(f)?;
            if all == [HillInterval::Unbounded] {
                Ok(HillInterval::Unbounded)
            } else {
                Err(Error::NotHillInterval {
                    lo: f64::NEG_INFINITY,
                    hi: f64::INFINITY,
                })
            }
        }
    }
}

/// `q` with `1 - ||F||^2 = (x - x0)(x1 - x) q(x)`, checked positive on `I`.
pub fn deflate(f: &PolyVec, interval: &HillInterval) -> Result<Poly> {
    let (x0, x1) = interval.regular_bounds()?;
    let p = f.hill_poly();
    let (q, _) = p.div_rem(&Poly::new(vec![-x0, 1.0]));
    let (q, _) = q.div_rem(&Poly::new(vec![-x1, 1.0]));
    let q = -&q;
    let min_q = (0..=DEFLATION_GRID)
        .map(|i| q.eval(x0 + (x1 - x0) * i as f64 / DEFLATION_GRID as f64))
        .fold(f64::INFINITY, f64::min);
    if !(min_q >= DEFLATION_FLOOR) {
        return Err(Error::DegenerateDeflation { min_q });
    }
    Ok(q)
}

/// Gauss–Chebyshev nodes on a regular Hill interval, with the weight
/// `1/sqrt(1 - ||F||^2)` folded into the node weights:
/// `integral_I g(x) / sqrt(1 - ||F||^2) dx ~ sum_i w_i g(x_i)`.
#[derive(Debug, Clone)]
pub struct WeightedNodes {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl WeightedNodes {
    pub fn new(f: &PolyVec, interval: &HillInterval, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("quadrature needs at least one node".into()));
        }
        let q = deflate(f, interval)?;
        let (x0, x1) = interval.regular_bounds()?;
        let (mid, half) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
        let base = std::f64::consts::PI / n as f64;
        let (x, w) = (0..n)
            .map(|i| {
                let phi = (2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64;
                let x = mid + half * phi.cos();
                (x, base / q.eval(x).sqrt())
            })
            .unzip();
        Ok(WeightedNodes { x, w })
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.x.iter().zip(&self.w).map(|(&x, &w)| w * g(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// `L(F, I) = 2 integral_I dx / sqrt(1 - ||F||^2)` with `n` nodes.
pub fn period_l(f: &PolyVec, interval: &HillInterval, n: usize) -> Result<f64> {
    Ok(2.0 * WeightedNodes::new(f, interval, n)?.integrate(|_| 1.0))
}

/// A quadrature value together with its `2N` companion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub n: usize,
    pub value: f64,
    pub value_2n: f64,
}

impl Convergence {
    pub fn delta(&self) -> f64 {
        (self.value - self.value_2n).abs()
    }
}

pub fn period_convergence(f: &PolyVec, interval: &HillInterval, n: usize) -> Result<Convergence> {
    Ok(Convergence {
        n,
        value: period_l(f, interval, n)?,
        value_2n: period_l(f, interval, 2 * n)?,
    })
}

/// Smallest `N = n * 2^m` (capped at `max_n`) whose period agrees with the
/// `2N` value to `rel_tol`.
pub fn converged_nodes(
    f: &PolyVec,
    interval: &HillInterval,
    n: usize,
    rel_tol: f64,
    max_n: usize,
) -> Result<Convergence> {
    let mut n = n.max(1);
    loop {
        let c = period_convergence(f, interval, n)?;
        if c.delta() <= rel_tol * c.value.abs() || 2 * n > max_n {
            return Ok(c);
        }
        n *= 2;
    }
}

/// `<P1, P2>_F = integral_I P1 P2 / sqrt(1 - ||F||^2) dx`
pub fn inner_product(p1: &Poly, p2: &Poly, f: &PolyVec, interval: &HillInterval, n: usize) -> Result<f64> {
    let nodes = WeightedNodes::new(f, interval, n)?;
    Ok(nodes.integrate(|x| p1.eval(x) * p2.eval(x)))
}

/// The x-period and the holonomy increments over one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodData {
    #[serde(rename = "L")]
    pub l: f64,
    pub delta_theta: JetMatrix,
}

/// `Delta theta_i^j = (2/i!) <x^i, F^j>_F`
pub fn delta_theta(f: &PolyVec, interval: &HillInterval, n: usize) -> Result<PeriodData> {
    let nodes = WeightedNodes::new(f, interval, n)?;
    let l = 2.0 * nodes.integrate(|_| 1.0);
    let mut dt = JetMatrix::zeros(f.n(), f.k());
    for j in 0..f.n() {
        let fj = f.component(j);
        for i in 0..=f.k() {
            let v = nodes.integrate(|x| x.powi(i as i32) * fj.eval(x));
            dt.set(i, j, 2.0 / factorial(i) * v);
        }
    }
    Ok(PeriodData { l, delta_theta: dt })
}

/// Moments `G[i][m] = <x^i, x^m>_F` for `i, m = 0..=k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    pub matrix: Vec<Vec<f64>>,
    pub lambda_min: f64,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, m| self.matrix[i][m])
    }

    /// Solves `G c = v` by Cholesky on the diagonally equilibrated system.
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        if v.len() != d {
            return Err(Error::Dimension(format!("rhs has {} entries, need {d}", v.len())));
        }
        let s: Vec<f64> = (0..d).map(|i| 1.0 / self.matrix[i][i].sqrt()).collect();
        let scaled = DMatrix::from_fn(d, d, |i, m| self.matrix[i][m] * s[i] * s[m]);
        let chol = Cholesky::new(scaled).ok_or(Error::NotPositiveDefinite)?;
        let rhs = nalgebra::DVector::from_fn(d, |i, _| v[i] * s[i]);
        let y = chol.solve(&rhs);
        Ok((0..d).map(|i| y[i] * s[i]).collect())
    }
}

pub fn gram(f: &PolyVec, interval: &HillInterval, n: usize) -> Result<GramMatrix> {
    let nodes = WeightedNodes::new(f, interval, n)?;
    gram_from_nodes(&nodes, f.k())
}

pub(crate) fn gram_from_nodes(nodes: &WeightedNodes, k: usize) -> Result<GramMatrix> {
    gram_in_basis(nodes, k, 0.0, 1.0)
}

/// Moments `<y^i, y^m>_F` of the shifted, scaled monomials
/// `y = (x - center) / half`.
pub fn gram_in_basis(nodes: &WeightedNodes, k: usize, center: f64, half: f64) -> Result<GramMatrix> {
    let d = k + 1;
    let ys: Vec<f64> = nodes.x.iter().map(|x| (x - center) / half).collect();
    // Entries depend on i + m only; filled from one moment list so the
    // matrix is exactly symmetric.
    let moments: Vec<f64> = (0..2 * d - 1)
        .map(|e| ys.iter().zip(&nodes.w).map(|(y, w)| w * y.powi(e as i32)).sum())
        .collect();
    let matrix: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|m| moments[i + m]).collect()).collect();
    let dm = DMatrix::from_fn(d, d, |i, m| matrix[i][m]);
    if Cholesky::new(dm.clone()).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let lambda_min = SymmetricEigen::new(dm)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(lambda_min > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(GramMatrix { matrix, lambda_min })
}

/// The period by double-exponential quadrature of the raw singular integral.
/// Independent of the deflation route; accurate to roughly `1e-10`.
pub fn tanh_sinh_period(f: &PolyVec, interval: &HillInterval) -> Result<f64> {
    let (x0, x1) = interval.regular_bounds()?;
    let p = f.hill_poly();
    // Expansions about each endpoint with the (vanishing) constant term
    // dropped, so that small distances do not cancel.
    let local = |c: f64| {
        let mut coeffs = p.translate(-c).coeffs().to_vec();
        coeffs[0] = 0.0;
        Poly::new(coeffs)
    };
    let (left, right) = (local(x0), local(x1));
    let half = 0.5 * (x1 - x0);
    let half_pi = std::f64::consts::FRAC_PI_2;
    // Contribution of abscissa tau >= 0 on both sides of the midpoint.
    let pair = |tau: f64| -> f64 {
        let u = half_pi * tau.sinh();
        let cu = u.cosh();
        let weight = half_pi * tau.cosh() / (cu * cu);
        // distance from the nearer endpoint: half * (1 - tanh u)
        let gap = half * 2.0 / (1.0 + (2.0 * u).exp());
        let right_val = right.eval(-gap);
        let left_val = left.eval(gap);
        let mut s = 0.0;
        if right_val > 0.0 {
            s += weight / right_val.sqrt();
        }
        if tau > 0.0 && left_val > 0.0 {
            s += weight / left_val.sqrt();
        }
        s * half
    };
    let tau_max = 5.0;
    let mut h = 0.5;
    let mut sum = (1..)
        .map(|i| i as f64 * h)
        .take_while(|&t| t <= tau_max)
        .map(pair)
        .sum::<f64>()
        + pair(0.0);
    let mut prev = sum * h;
    for _ in 0..10 {
        h *= 0.5;
        sum += (0..)
            .map(|i| (2 * i + 1) as f64 * h)
            .take_while(|&t| t <= tau_max)
            .map(pair)
            .sum::<f64>();
        let cur = sum * h;
        if (cur - prev).abs() <= 1e-13 * cur.abs() {
            return Ok(2.0 * cur);
        }
        prev = cur;
    }
    Ok(2.0 * prev)
}

//! Scalar real polynomials in the monomial basis, plus certified real-root
//! isolation (square-free decomposition + Sturm sequences + bisection).

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients whose magnitude (relative to the largest one) falls at or
/// below this value are treated as zero.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-13;

/// Default absolute width to which root enclosures are refined.
pub const DEFAULT_MULTIPLICITY_TOL: f64 = 1e-9;
pub const DEFAULT_ROOT_WIDTH: f64 = 1e-12;

/// A real polynomial `c[0] + c[1] x + ... + c[d] x^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Builds a polynomial from ascending coefficients. An empty vector is the
    /// zero polynomial.
    pub fn new(coeffs: Vec<f64>) -> Self {
        if coeffs.is_empty() {
            return Self::zero();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Poly { coeffs: vec![c] }
    }

    /// `c * x^degree`
    pub fn monomial(degree: usize, c: f64) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = c;
        Poly { coeffs }
    }

    /// Builds `lead * prod (x - r)` from a list of roots.
    pub fn from_roots(lead: f64, roots: &[f64]) -> Self {
        roots
            .iter()
            .fold(Poly::constant(lead), |acc, &r| &acc * &Poly::new(vec![-r, 1.0]))
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Length of the coefficient vector minus one; no trimming applied.
    pub fn nominal_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Highest power with a nonzero coefficient (0 for constants and zero).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.degree()]
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, order: usize) -> Poly {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Returns `p(x - shift)`.
    pub fn translate(&self, shift: f64) -> Poly {
        let step = Poly::new(vec![-shift, 1.0]);
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, &c| &(&acc * &step) + &Poly::constant(c))
    }

    /// Drops leading coefficients whose magnitude is at most
    /// `threshold * max_abs()`. Interior coefficients are never touched.
    pub fn trimmed(&self, threshold: f64) -> Poly {
        let cut = threshold * self.max_abs();
        let keep = self.coeffs.iter().rposition(|c| c.abs() > cut).map_or(1, |i| i + 1);
        let mut coeffs = self.coeffs[..keep].to_vec();
        if coeffs.iter().all(|c| c.abs() <= cut) {
            coeffs = vec![0.0];
        }
        Poly { coeffs }
    }

    /// Degree after relative trimming.
    pub fn effective_degree(&self, threshold: f64) -> usize {
        self.trimmed(threshold).degree()
    }

    /// `p(s x)`
    pub fn dilate(&self, s: f64) -> Poly {
        let mut f = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let v = c * f;
                f *= s;
                v
            })
            .collect();
        Poly { coeffs }
    }

    /// Divides by the largest coefficient magnitude; zero stays zero.
    pub fn normalized(&self) -> Poly {
        let m = self.max_abs();
        if m == 0.0 {
            self.clone()
        } else {
            self.scale(1.0 / m)
        }
    }

    /// Long division. The divisor's leading coefficient (after exact trimming)
    /// must be nonzero.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree();
        let lead = divisor.coeffs[dd];
        assert!(lead != 0.0, "division by the zero polynomial");
        let nd = self.degree();
        if nd < dd {
            return (Poly::zero(), self.clone());
        }
        let mut rem: Vec<f64> = self.coeffs[..=nd].to_vec();
        let mut quot = vec![0.0; nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (i, &d) in divisor.coeffs[..=dd].iter().enumerate() {
                rem[k + i] -= q * d;
            }
            rem[k + dd] = 0.0;
        }
        rem.truncate(dd.max(1));
        (Poly::new(quot), Poly::new(rem))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).copied().unwrap_or(0.0) + rhs.coeffs.get(i).copied().unwrap_or(0.0))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

/// Greatest common divisor by normalized Euclidean remainders. A remainder is
/// declared zero once its magnitude drops to `threshold` times the size of
/// the quotient that produced it. The result is normalized to unit max-norm.
pub fn gcd(a: &Poly, b: &Poly, threshold: f64) -> Poly {
    let mut r0 = a.trimmed(threshold).normalized();
    let mut r1 = b.trimmed(threshold).normalized();
    if r0.is_zero() {
        return r1;
    }
    while !r1.is_zero() {
        if r1.degree() == 0 {
            return Poly::constant(1.0);
        }
        let (q, r) = r0.div_rem(&r1);
        let scale = q.max_abs().max(1.0);
        let r = if r.max_abs() <= threshold * scale {
            Poly::zero()
        } else {
            r.trimmed(threshold).normalized()
        };
        r0 = r1;
        r1 = r;
    }
    r0
}

/// Quotient of an exact division; the remainder is discarded.
fn exact_quotient(p: &Poly, d: &Poly, threshold: f64) -> Poly {
    p.div_rem(&d.trimmed(threshold)).0
}

/// Yun's square-free decomposition: returns `(factor, multiplicity)` pairs with
/// `p ~ prod factor^multiplicity`, each factor square-free and of positive
/// degree. Constant factors are dropped.
pub fn square_free_decomposition(p: &Poly, threshold: f64) -> Vec<(Poly, usize)> {
    let p = p.trimmed(threshold).normalized();
    if p.degree() == 0 {
        return Vec::new();
    }
    let dp = p.derivative();
    let a0 = gcd(&p, &dp, threshold);
    let mut b = exact_quotient(&p, &a0, threshold);
    let c = exact_quotient(&dp, &a0, threshold);
    let mut d = &c - &b.derivative();
    let mut out = Vec::new();
    let mut mult = 1;
    while b.trimmed(threshold).degree() > 0 {
        let d_is_zero = d.max_abs() <= threshold * b.max_abs().max(1.0);
        let a = if d_is_zero { b.clone() } else { gcd(&b, &d, threshold) };
        let a = a.trimmed(threshold);
        if a.degree() > 0 {
            out.push((a.normalized(), mult));
        }
        let nb = exact_quotient(&b, &a, threshold);
        let c = if d_is_zero {
            Poly::zero()
        } else {
            exact_quotient(&d, &a, threshold)
        };
        d = &c - &nb.derivative();
        b = nb;
        mult += 1;
        if mult > p.degree() + 1 {
            break;
        }
    }
    out
}

/// Sturm sequence of a square-free polynomial.
#[derive(Debug, Clone)]
pub struct SturmSequence {
    seq: Vec<Poly>,
}

impl SturmSequence {
    pub fn new(p: &Poly, threshold: f64) -> Self {
        let p0 = p.trimmed(threshold).normalized();
        let mut seq = vec![p0.clone()];
        let mut prev = p0;
        let mut cur = prev.derivative().normalized();
        while !cur.is_zero() {
            seq.push(cur.clone());
            if cur.degree() == 0 {
                break;
            }
            let (q, r) = prev.div_rem(&cur);
            let scale = q.max_abs().max(1.0);
            if r.max_abs() <= threshold * scale {
                break;
            }
            let next = (-&r).trimmed(threshold).normalized();
            prev = cur;
            cur = next;
        }
        SturmSequence { seq }
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    fn count_changes(signs: impl Iterator<Item = f64>) -> usize {
        let mut last = 0.0;
        let mut changes = 0;
        for s in signs.filter(|&s| s != 0.0) {
            if last != 0.0 && s.signum() != last {
                changes += 1;
            }
            last = s.signum();
        }
        changes
    }

    /// Number of sign variations at `x`, zeros dropped.
    pub fn variations(&self, x: f64) -> usize {
        Self::count_changes(self.seq.iter().map(|p| p.eval(x)))
    }

    /// Number of distinct roots in the half-open interval `(a, b]`.
    pub fn count(&self, a: f64, b: f64) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// Where to look for roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    WholeLine,
    /// Closed interval `[lo, hi]`.
    Interval(f64, f64),
}

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Target absolute enclosure width.
    pub width: f64,
    /// Relative coefficient zero threshold.
    pub zero_threshold: f64,
    /// Remainder threshold of the gcd steps in the square-free
    /// decomposition. Distinct roots closer than roughly its square root
    /// coalesce into one multiple root.
    pub multiplicity_tol: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            width: DEFAULT_ROOT_WIDTH,
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
            multiplicity_tol: DEFAULT_MULTIPLICITY_TOL,
        }
    }
}

/// A distinct real root with its multiplicity and an enclosure `[lo, hi]`
/// containing exactly one distinct root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealRoot {
    pub location: f64,
    pub multiplicity: usize,
    pub enclosure: (f64, f64),
}

/// Cauchy bound: every root satisfies `|x| < 1 + max |c_i / c_d|`.
pub fn cauchy_bound(p: &Poly) -> f64 {
    let d = p.degree();
    let lead = p.coeffs()[d].abs();
    1.0 + p.coeffs()[..d].iter().fold(0.0_f64, |m, c| m.max(c.abs() / lead))
}

/// Fujiwara bound: every root satisfies
/// `|x| <= 2 max(|c_{d-1}/c_d|, |c_{d-2}/c_d|^(1/2), ..., |c_0/(2 c_d)|^(1/d))`.
/// Much tighter than [`cauchy_bound`] when the leading coefficient is small.
pub fn fujiwara_bound(p: &Poly) -> f64 {
    let d = p.degree();
    let c = p.coeffs();
    let lead = c[d].abs();
    2.0 * (1..=d)
        .map(|i| {
            let r = c[d - i].abs() / lead;
            let r = if i == d { 0.5 * r } else { r };
            r.powf(1.0 / i as f64)
        })
        .fold(0.0_f64, f64::max)
}

pub fn isolate_roots(p: &Poly, window: Window) -> Result<Vec<RealRoot>> {
    isolate_roots_with(p, window, &RootOptions::default())
}

/// Isolates every distinct real root of `p` inside `window`.
pub fn isolate_roots_with(p: &Poly, window: Window, opts: &RootOptions) -> Result<Vec<RealRoot>> {
    if p.max_abs() == 0.0 || p.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(if p.max_abs() == 0.0 {
            Error::IdenticallyZero
        } else {
            Error::Invalid("non-finite polynomial coefficient".into())
        });
    }
    let p = p.trimmed(opts.zero_threshold);
    if p.degree() == 0 {
        return Ok(Vec::new());
    }
    // Work in y = x / s with s a power of two near the root bound: the
    // substitution is exact and keeps the Euclidean remainders balanced.
    let bound = fujiwara_bound(&p);
    let s = if bound > 0.0 {
        2f64.powi(bound.log2().round() as i32)
    } else {
        1.0
    };
    let ps = p.dilate(s).normalized();
    let scaled_opts = RootOptions {
        width: opts.width / s,
        ..*opts
    };
    let mut roots = Vec::new();
    for (factor, mult) in square_free_decomposition(&ps, opts.multiplicity_tol) {
        let (lo, hi) = match window {
            Window::WholeLine => {
                let b = cauchy_bound(&factor) * 1.0625;
                (-b, b)
            }
            Window::Interval(a, b) => (a / s, b / s),
        };
        if !(lo <= hi) {
            return Err(Error::Invalid(format!("empty window [{}, {}]", lo * s, hi * s)));
        }
        let start = roots.len();
        isolate_square_free(&factor, mult, lo, hi, &scaled_opts, &mut roots);
        for r in &mut roots[start..] {
            r.location *= s;
            r.enclosure = (r.enclosure.0 * s, r.enclosure.1 * s);
        }
    }
    roots.sort_by(|a, b| a.location.total_cmp(&b.location));
    Ok(roots)
}

fn isolate_square_free(f: &Poly, mult: usize, lo: f64, hi: f64, opts: &RootOptions, out: &mut Vec<RealRoot>) {
    let sturm = SturmSequence::new(f, opts.zero_threshold);
    // Sturm counts cover (a, b]; widen slightly so that roots on a closed
    // window boundary are not lost to rounding in the evaluation.
    let pad = opts.width.max(4.0 * f64::EPSILON * lo.abs().max(hi.abs()));
    let (lo, hi) = (lo - pad, hi + pad);
    let mut stack = vec![(lo, hi, sturm.variations(lo), sturm.variations(hi))];
    while let Some((a, b, va, vb)) = stack.pop() {
        let n = va.saturating_sub(vb);
        if n == 0 {
            continue;
        }
        if n == 1 {
            out.push(refine(f, &sturm, mult, a, b, opts.width));
            continue;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // Numerically coincident roots: coalesce into one.
            out.push(RealRoot {
                location: mid,
                multiplicity: mult * n,
                enclosure: (a, b),
            });
            continue;
        }
        let vm = sturm.variations(mid);
        stack.push((mid, b, vm, vb));
        stack.push((a, mid, va, vm));
    }
}

/// Shrinks `(a, b]`, known to hold exactly one root of `f`, to the target width.
fn refine(f: &Poly, sturm: &SturmSequence, mult: usize, mut a: f64, mut b: f64, width: f64) -> RealRoot {
    let exact = |x: f64| RealRoot {
        location: x,
        multiplicity: mult,
        enclosure: (x, x),
    };
    let fb = f.eval(b);
    if fb == 0.0 {
        return exact(b);
    }
    let fa = f.eval(a);
    let bracketed = fa != 0.0 && fa.signum() != fb.signum();
    let mut va = sturm.variations(a);
    while b - a > width {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f.eval(mid);
        if bracketed {
            if fm == 0.0 {
                return exact(mid);
            }
            if fm.signum() == fa.signum() {
                a = mid;
            } else {
                b = mid;
            }
        } else {
            let vm = sturm.variations(mid);
            if va.saturating_sub(vm) >= 1 {
                b = mid;
            } else {
                a = mid;
                va = vm;
            }
        }
    }
    // Newton polish, kept inside the enclosure.
    let df = f.derivative();
    let mut x = 0.5 * (a + b);
    for _ in 0..4 {
        let d = df.eval(x);
        if d == 0.0 {
            break;
        }
        let next = x - f.eval(x) / d;
        if !(next >= a && next <= b) {
            break;
        }
        x = next;
    }
    RealRoot {
        location: x,
        multiplicity: mult,
        enclosure: (a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn locations(roots: &[RealRoot]) -> Vec<(f64, usize)> {
        roots.iter().map(|r| (r.location, r.multiplicity)).collect()
    }

    #[test]
    fn arithmetic_and_horner() {
        let p = Poly::new(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 12.0);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 6.0]);
        let q = &p * &Poly::new(vec![0.0, 1.0]);
        assert_eq!(q.coeffs(), &[0.0, 1.0, -2.0, 3.0]);
        let (quot, rem) = q.div_rem(&p);
        assert_eq!(quot.coeffs(), &[0.0, 1.0]);
        assert!(rem.is_zero());
    }

    #[test]
    fn translate_shifts_argument() {
        let p = Poly::new(vec![1.0, 0.0, 1.0]); // 1 + x^2
        let t = p.translate(2.0);
        for x in [-1.0, 0.3, 4.0] {
            assert!((t.eval(x) - p.eval(x - 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn gcd_of_shared_factor() {
        let a = Poly::from_roots(1.0, &[1.0, 2.0, -3.0]);
        let b = Poly::from_roots(2.0, &[1.0, 5.0]);
        let g = gcd(&a, &b, DEFAULT_ZERO_THRESHOLD);
        assert_eq!(g.degree(), 1);
        assert!(g.eval(1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_circle_roots() {
        let p = Poly::new(vec![1.0, 0.0, -1.0]);
        let roots = isolate_roots(&p, Window::WholeLine).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0].location + 1.0).abs() < 1e-14);
        assert!((roots[1].location - 1.0).abs() < 1e-14);
        assert!(roots.iter().all(|r| r.multiplicity == 1));
    }

    #[test]
    fn double_root_at_origin() {
        // 4x^2 - 4x^4 = 4x^2 (1 - x)(1 + x)
        let p = Poly::new(vec![0.0, 0.0, 4.0, 0.0, -4.0]);
        let sf = square_free_decomposition(&p, DEFAULT_ZERO_THRESHOLD);
        // oracle: factors (1 - x^2) with multiplicity 1, x with multiplicity 2
        assert_eq!(sf.len(), 2);
        assert_eq!(sf[0].1, 1);
        assert_eq!(sf[0].0.degree(), 2);
        assert_eq!(sf[1].1, 2);
        assert_eq!(sf[1].0.degree(), 1);

        let roots = isolate_roots(&p, Window::WholeLine).unwrap();
        let got = locations(&roots);
        assert_eq!(got.len(), 3);
        assert!((got[0].0 + 1.0).abs() < 1e-14 && got[0].1 == 1);
        assert!(got[1].0.abs() < 1e-14 && got[1].1 == 2);
        assert!((got[2].0 - 1.0).abs() < 1e-14 && got[2].1 == 1);
    }

    #[test]
    fn fujiwara_bounds_roots() {
        let p = Poly::from_roots(1e-3, &[-3.0, 0.5, 2.0, 2.9]);
        let b = fujiwara_bound(&p);
        assert!(b >= 3.0 && b < cauchy_bound(&p));
    }

    #[test]
    fn shifted_cluster_keeps_simple_roots() {
        // Roots bunched far from the origin sit deep inside the Cauchy bound.
        let want = [2.5, 2.6, 2.8, 3.0, 3.1, 3.3, 3.4, 3.6];
        let p = Poly::from_roots(1.0, &want);
        assert!(cauchy_bound(&p) > 1000.0);
        let roots = isolate_roots(&p, Window::WholeLine).unwrap();
        assert_eq!(roots.len(), 8);
        for (r, w) in roots.iter().zip(want) {
            assert_eq!(r.multiplicity, 1);
            // eps * sum|c_i| 3.6^i / |p'(r)| is about 1e-5 at the worst root.
            assert!((r.location - w).abs() < 1e-5, "{} vs {w}", r.location);
        }
    }

    #[test]
    fn constant_has_no_roots() {
        let p = Poly::constant(1.0 - 0.36);
        assert!(isolate_roots(&p, Window::WholeLine).unwrap().is_empty());
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert_eq!(
            isolate_roots(&Poly::zero(), Window::WholeLine),
            Err(Error::IdenticallyZero)
        );
    }

    #[test]
    fn window_restricts_roots() {
        let p = Poly::from_roots(1.0, &[-2.0, 0.5, 3.0]);
        let roots = isolate_roots(&p, Window::Interval(0.0, 2.0)).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].location - 0.5).abs() < 1e-13);
        // Closed window: a root on the boundary is kept.
        let roots = isolate_roots(&p, Window::Interval(0.5, 3.0)).unwrap();
        assert_eq!(roots.len(), 2);
    }

    #[test]
    fn triple_and_double_roots() {
        let mut roots_in = vec![0.25; 3];
        roots_in.extend([-1.5, -1.5, 2.0]);
        let p = Poly::from_roots(2.0, &roots_in);
        let roots = isolate_roots(&p, Window::WholeLine).unwrap();
        let got = locations(&roots);
        assert_eq!(got.len(), 3, "{got:?}");
        assert!((got[0].0 + 1.5).abs() < 1e-10 && got[0].1 == 2);
        assert!((got[1].0 - 0.25).abs() < 1e-10 && got[1].1 == 3);
        assert!((got[2].0 - 2.0).abs() < 1e-10 && got[2].1 == 1);
    }

    #[test]
    fn enclosures_have_requested_width() {
        let p = Poly::from_roots(1.0, &[0.1, 0.7, 1.3, 5.0]);
        for r in isolate_roots(&p, Window::WholeLine).unwrap() {
            let (lo, hi) = r.enclosure;
            assert!(lo <= r.location && r.location <= hi);
            assert!(hi - lo <= DEFAULT_ROOT_WIDTH);
        }
    }
}

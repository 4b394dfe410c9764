//! Polynomial vectors `F(x) = (F^1(x), ..., F^n(x))` of degree at most `k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Poly, DEFAULT_ZERO_THRESHOLD};

/// `coeffs[j][i]` is the coefficient of `x^i` in component `j`.
///
/// The degree bound `k` is part of the value: derivatives and lifts keep
/// `k + 1` coefficient slots even when trailing coefficients vanish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyVecRepr", into = "PolyVecRepr")]
pub struct PolyVec {
    n: usize,
    k: usize,
    coeffs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct PolyVecRepr {
    n: usize,
    k: usize,
    coeffs: Vec<Vec<f64>>,
}

impl TryFrom<PolyVecRepr> for PolyVec {
    type Error = Error;
    fn try_from(r: PolyVecRepr) -> Result<Self> {
        let pv = PolyVec::new(r.coeffs)?;
        if pv.n != r.n || pv.k != r.k {
            return Err(Error::Dimension(format!(
                "declared n={}, k={} but coefficients are {}x{}",
                r.n,
                r.k,
                pv.n,
                pv.k + 1
            )));
        }
        Ok(pv)
    }
}

impl From<PolyVec> for PolyVecRepr {
    fn from(p: PolyVec) -> Self {
        PolyVecRepr {
            n: p.n,
            k: p.k,
            coeffs: p.coeffs,
        }
    }
}

impl PolyVec {
    /// Rows are components; every row must have the same length `k + 1`.
    pub fn new(coeffs: Vec<Vec<f64>>) -> Result<Self> {
        let n = coeffs.len();
        if n == 0 {
            return Err(Error::Dimension("polynomial vector needs n >= 1".into()));
        }
        let len = coeffs[0].len();
        if len == 0 || coeffs.iter().any(|row| row.len() != len) {
            return Err(Error::Dimension(
                "all components need the same positive number of coefficients".into(),
            ));
        }
        if coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("non-finite coefficient".into()));
        }
        Ok(PolyVec { n, k: len - 1, coeffs })
    }

    pub fn constant(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn zero(n: usize, k: usize) -> Self {
        PolyVec {
            n,
            k,
            coeffs: vec![vec![0.0; k + 1]; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    /// Coefficient of `x^i` in component `j` (both zero-based).
    pub fn coeff(&self, j: usize, i: usize) -> f64 {
        self.coeffs[j][i]
    }

    pub fn component(&self, j: usize) -> Poly {
        Poly::new(self.coeffs[j].clone())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().flatten().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Highest power with a coefficient above the zero threshold.
    pub fn degree(&self) -> usize {
        self.degree_with(DEFAULT_ZERO_THRESHOLD)
    }

    pub fn degree_with(&self, threshold: f64) -> usize {
        self.coeffs
            .iter()
            .filter_map(|row| row.iter().rposition(|c| c.abs() > threshold))
            .max()
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|row| row.iter().rev().fold(0.0, |acc, &c| acc * x + c))
            .collect()
    }

    /// `||F(x)||^2`
    pub fn sq_norm_at(&self, x: f64) -> f64 {
        self.eval(x).iter().map(|v| v * v).sum()
    }

    /// `(dF/dx, F)(x)`, half the derivative of the squared norm.
    pub fn force_dot(&self, x: f64) -> f64 {
        let f = self.eval(x);
        let df = self.derivative(1).eval(x);
        f.iter().zip(&df).map(|(a, b)| a * b).sum()
    }

    /// Componentwise `order`-th derivative; `k` is preserved.
    pub fn derivative(&self, order: usize) -> PolyVec {
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                (0..=self.k)
                    .map(|i| {
                        let src = i + order;
                        if src > self.k {
                            0.0
                        } else {
                            // src! / i!
                            let falling: f64 = ((i + 1)..=src).map(|m| m as f64).product();
                            row[src] * falling
                        }
                    })
                    .collect()
            })
            .collect();
        PolyVec {
            n: self.n,
            k: self.k,
            coeffs,
        }
    }

    /// `sum_j (F^j)^2` as a single polynomial of nominal degree `2k`.
    pub fn sq_norm_poly(&self) -> Poly {
        let mut out = vec![0.0; 2 * self.k + 1];
        for row in &self.coeffs {
            for (a, &ca) in row.iter().enumerate() {
                for (b, &cb) in row.iter().enumerate() {
                    out[a + b] += ca * cb;
                }
            }
        }
        Poly::new(out)
    }

    /// `1 - ||F(x)||^2`
    pub fn hill_poly(&self) -> Poly {
        &Poly::constant(1.0) - &self.sq_norm_poly()
    }

    pub fn scale(&self, s: f64) -> PolyVec {
        PolyVec {
            n: self.n,
            k: self.k,
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|c| c * s).collect())
                .collect(),
        }
    }

    /// `F(x - shift)`
    pub fn translate(&self, shift: f64) -> PolyVec {
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                let mut c = Poly::new(row.clone()).translate(shift).coeffs().to_vec();
                c.resize(self.k + 1, 0.0);
                c
            })
            .collect();
        PolyVec {
            n: self.n,
            k: self.k,
            coeffs,
        }
    }

    /// Reorders components: result component `j` is `self` component `perm[j]`.
    pub fn permute(&self, perm: &[usize]) -> Result<PolyVec> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n
            || perm
                .iter()
                .any(|&p| p >= self.n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::Dimension("not a permutation of the components".into()));
        }
        Ok(PolyVec {
            n: self.n,
            k: self.k,
            coeffs: perm.iter().map(|&p| self.coeffs[p].clone()).collect(),
        })
    }
}

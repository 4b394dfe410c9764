//! Small numeric helpers shared across modules.

/// `n!` as a float (exact for the small `n` used here).
pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|m| m as f64).product()
}

/// `x^i / i!` for `i = 0..=k`.
pub fn scaled_powers(x: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    let mut term = 1.0;
    out.push(term);
    for i in 1..=k {
        term *= x / i as f64;
        out.push(term);
    }
    out
}

/// Three-point central difference on a possibly non-uniform grid, at the
/// interior index `m` (second order accurate).
pub fn central_derivative(t: &[f64], f: &[f64], m: usize) -> f64 {
    let h1 = t[m] - t[m - 1];
    let h2 = t[m + 1] - t[m];
    -h2 / (h1 * (h1 + h2)) * f[m - 1] + (h2 - h1) / (h1 * h2) * f[m] + h1 / (h2 * (h1 + h2)) * f[m + 1]
}

/// Derivative at `t[m]` of the Lagrange interpolant through the samples
/// `m - r ..= m + r` (order `2r` on smooth data, any spacing).
pub fn lagrange_derivative(t: &[f64], f: &[f64], m: usize, r: usize) -> f64 {
    let idx = (m - r)..=(m + r);
    let tm = t[m];
    idx.clone()
        .map(|k| {
            let w = if k == m {
                idx.clone().filter(|&l| l != m).map(|l| 1.0 / (tm - t[l])).sum::<f64>()
            } else {
                let num: f64 = idx.clone().filter(|&l| l != k && l != m).map(|l| tm - t[l]).product();
                let den: f64 = idx.clone().filter(|&l| l != k).map(|l| t[k] - t[l]).product();
                num / den
            };
            w * f[k]
        })
        .sum()
}

/// Central difference at `m` with the widest symmetric stencil of at most
/// five points that fits.
pub fn central_derivative5(t: &[f64], f: &[f64], m: usize) -> f64 {
    let r = m.min(t.len() - 1 - m).min(2);
    lagrange_derivative(t, f, m, r)
}

pub fn strictly_increasing(t: &[f64]) -> bool {
    t.windows(2).all(|w| w[1] > w[0])
}

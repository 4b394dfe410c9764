//! Seeded randomized certificate sweeps.
//!
//! Case `m` draws from its own ChaCha stream, so the result of a sweep is
//! independent of scheduling and identical between the parallel and
//! sequential drivers.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{certify_with, Certificate, CertifyOptions, Verdict};
use crate::error::{Error, Result};
use crate::periods::{deflate, hill_interval_containing, HillInterval};
use crate::polyvec::PolyVec;

/// Coarse grid used to guarantee a Hill interval.
const GRID: (f64, f64, usize) = (-2.0, 2.0, 81);
/// Target for `min ||F||^2` on the grid after rescaling.
const RESCALE_TARGET: f64 = 0.5;
const MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub count: usize,
    pub seed: u64,
    pub kmax: usize,
    pub nmax: usize,
    pub certify: CertifyOptions,
}

impl SweepConfig {
    pub fn new(count: usize, seed: u64, kmax: usize, nmax: usize) -> Self {
        SweepConfig {
            count,
            seed,
            kmax,
            nmax,
            certify: CertifyOptions::default(),
        }
    }
}

/// A random non-constant `F` with `k <= kmax`, `n <= nmax`, coefficients
/// uniform in `[-1, 1]`, rescaled when needed so that `min ||F||^2 < 1` on
/// the grid, and the regular Hill interval containing the grid minimiser.
pub fn sample_pair<R: Rng>(rng: &mut R, kmax: usize, nmax: usize) -> Result<(PolyVec, HillInterval)> {
    if kmax == 0 || nmax == 0 {
        return Err(Error::Invalid("kmax and nmax must be at least 1".into()));
    }
    for _ in 0..MAX_ATTEMPTS {
        let k = rng.gen_range(1..=kmax);
        let n = rng.gen_range(1..=nmax);
        let rows = (0..n)
            .map(|_| (0..=k).map(|_| rng.gen_range(-1.0..=1.0)).collect())
            .collect();
        let mut f = PolyVec::new(rows)?;
        if f.degree() == 0 {
            continue;
        }
        let (lo, hi, m) = GRID;
        let (x_min, v_min) = (0..m)
            .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
            .map(|x| (x, f.sq_norm_at(x)))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if v_min >= 1.0 {
            f = f.scale((RESCALE_TARGET / v_min).sqrt());
        }
        let Ok(interval) = hill_interval_containing(&f, x_min) else {
            continue;
        };
        if interval.is_regular() && deflate(&f, &interval).is_ok() {
            return Ok((f, interval));
        }
    }
    Err(Error::Invalid("could not sample a regular pair".into()))
}

/// The RNG of case `index` under `seed`.
pub fn case_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCase {
    pub index: usize,
    pub certificate: Option<Certificate>,
    /// Error code when sampling or certification failed.
    pub error: Option<String>,
}

impl SweepCase {
    pub fn is_conclusive(&self) -> bool {
        matches!(&self.certificate, Some(c) if c.verdict == Verdict::NotPeriodic)
    }
}

pub fn run_case(cfg: &SweepConfig, index: usize) -> SweepCase {
    let mut rng = case_rng(cfg.seed, index);
    let outcome = sample_pair(&mut rng, cfg.kmax, cfg.nmax).and_then(|(f, i)| certify_with(&f, &i, &cfg.certify));
    match outcome {
        Ok(c) => SweepCase {
            index,
            certificate: Some(c),
            error: None,
        },
        Err(e) => SweepCase {
            index,
            certificate: None,
            error: Some(e.code().to_string()),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub count: usize,
    pub seed: u64,
    pub kmax: usize,
    pub nmax: usize,
    pub quadrature_n: usize,
    pub not_periodic: usize,
    /// Inconclusive verdicts plus failed cases.
    pub inconclusive: usize,
    pub failed: usize,
    pub min_delta_inf_norm: f64,
    pub max_reconstruction_error: f64,
    pub min_gram_lambda_min: f64,
    pub max_quadrature_n: usize,
}

pub fn summarize(cfg: &SweepConfig, cases: &[SweepCase]) -> SweepSummary {
    let certs: Vec<&Certificate> = cases.iter().filter_map(|c| c.certificate.as_ref()).collect();
    let not_periodic = cases.iter().filter(|c| c.is_conclusive()).count();
    SweepSummary {
        count: cases.len(),
        seed: cfg.seed,
        kmax: cfg.kmax,
        nmax: cfg.nmax,
        quadrature_n: cfg.certify.quadrature_n,
        not_periodic,
        inconclusive: cases.len() - not_periodic,
        failed: cases.len() - certs.len(),
        min_delta_inf_norm: certs.iter().map(|c| c.delta_inf_norm).fold(f64::INFINITY, f64::min),
        max_reconstruction_error: certs.iter().map(|c| c.reconstruction_error).fold(0.0, f64::max),
        min_gram_lambda_min: certs.iter().map(|c| c.gram_lambda_min).fold(f64::INFINITY, f64::min),
        max_quadrature_n: certs.iter().map(|c| c.quadrature_n).max().unwrap_or(0),
    }
}

pub fn run_sweep_sequential(cfg: &SweepConfig) -> Vec<SweepCase> {
    (0..cfg.count).map(|m| run_case(cfg, m)).collect()
}

#[cfg(feature = "parallel")]
pub fn run_sweep_parallel(cfg: &SweepConfig) -> Vec<SweepCase> {
    use rayon::prelude::*;
    (0..cfg.count).into_par_iter().map(|m| run_case(cfg, m)).collect()
}

/// Parallel when the `parallel` feature is on, sequential otherwise.
pub fn run_sweep(cfg: &SweepConfig) -> Vec<SweepCase> {
    #[cfg(feature = "parallel")]
    {
        run_sweep_parallel(cfg)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sweep_sequential(cfg)
    }
}

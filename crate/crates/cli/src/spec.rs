//! The JSON run specification shared by the single-geodesic commands.

use std::path::Path;

use jetflow_core::periods::{hill_interval_containing, match_interval, period_l};
use jetflow_core::{hill_intervals, Error, HillInterval, JetMatrix, PolyVec};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_QUADRATURE_N: usize = 64;
pub const MIN_QUADRATURE_N: usize = 8;
/// Relative slack when matching an explicit `[x0, x1]` to a Hill interval.
const INTERVAL_MATCH_TOL: f64 = 1e-9;
/// Slack on `x_init` membership, absorbing rounding in the endpoints.
const MEMBERSHIP_SLACK: f64 = 1e-12;

/// `F` as a bare list of component rows or as the full library object.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PolyVecInput {
    Rows(Vec<Vec<f64>>),
    Full(PolyVec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(rename = "F")]
    f: PolyVecInput,
    #[serde(default)]
    pub interval_index: Option<usize>,
    #[serde(default)]
    pub interval: Option<[f64; 2]>,
    #[serde(default)]
    pub x_init: Option<f64>,
    #[serde(default = "default_px_sign")]
    pub px_sign: f64,
    #[serde(default)]
    pub theta0: Option<JetMatrix>,
    #[serde(default)]
    pub duration: Option<f64>,
    #[serde(default)]
    pub periods: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_quadrature_n", alias = "quadrature_N")]
    pub quadrature_n: usize,
    /// Only read by sweeps.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_px_sign() -> f64 {
    1.0
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_quadrature_n() -> usize {
    DEFAULT_QUADRATURE_N
}

/// A validated spec: the interval is a genuine Hill interval of `F` and
/// `x_init` lies inside it.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub f: PolyVec,
    pub interval: HillInterval,
    pub x_init: f64,
    pub px_sign: f64,
    pub theta0: JetMatrix,
    pub duration: Option<f64>,
    pub periods: Option<f64>,
    pub tol: f64,
    pub quadrature_n: usize,
}

pub fn load(path: &Path) -> CliResult<Resolved> {
    load_raw(path)?.resolve()
}

/// Parses without validating the pair, for commands that only read the
/// numeric settings.
pub fn load_raw(path: &Path) -> CliResult<RunSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::spec(format!("{}: {e}", path.display())))
}

impl RunSpec {
    pub fn resolve(self) -> CliResult<Resolved> {
        let f = match self.f {
            PolyVecInput::Rows(rows) => PolyVec::new(rows)?,
            PolyVecInput::Full(f) => f,
        };
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::spec(format!("tol must be positive, got {}", self.tol)));
        }
        if self.quadrature_n < MIN_QUADRATURE_N {
            return Err(CliError::spec(format!(
                "quadrature_n must be at least {MIN_QUADRATURE_N}, got {}",
                self.quadrature_n
            )));
        }
        if self.px_sign != 1.0 && self.px_sign != -1.0 {
            return Err(CliError::spec(format!(
                "px_sign must be +1 or -1, got {}",
                self.px_sign
            )));
        }
        if self.duration.is_some() && self.periods.is_some() {
            return Err(CliError::spec("give at most one of duration and periods"));
        }
        check_positive("duration", self.duration)?;
        check_positive("periods", self.periods)?;

        let interval = select_interval(&f, self.interval_index, self.interval, self.x_init)?;
        let x_init = match (self.x_init, interval.bounds()) {
            (Some(x), _) => x,
            (None, Some((a, b))) => 0.5 * (a + b),
            (None, None) => 0.0,
        };
        if !interval.contains(x_init, MEMBERSHIP_SLACK) {
            let (lo, hi) = interval.bounds().unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
            return Err(Error::OutsideHillInterval { x: x_init, lo, hi }.into());
        }
        let theta0 = match self.theta0 {
            Some(t) if t.n() != f.n() || t.k() != f.k() => {
                return Err(CliError::spec(format!(
                    "theta0 is {}x{} but F is {}x{}",
                    t.n(),
                    t.k() + 1,
                    f.n(),
                    f.k() + 1
                )))
            }
            Some(t) => t,
            None => JetMatrix::zeros(f.n(), f.k()),
        };
        Ok(Resolved {
            f,
            interval,
            x_init,
            px_sign: self.px_sign,
            theta0,
            duration: self.duration,
            periods: self.periods,
            tol: self.tol,
            quadrature_n: self.quadrature_n,
        })
    }
}

fn check_positive(name: &str, v: Option<f64>) -> CliResult<()> {
    match v {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(CliError::spec(format!("{name} must be positive, got {v}"))),
        _ => Ok(()),
    }
}

fn select_interval(
    f: &PolyVec,
    index: Option<usize>,
    explicit: Option<[f64; 2]>,
    x_init: Option<f64>,
) -> CliResult<HillInterval> {
    match (index, explicit) {
        (Some(_), Some(_)) => Err(CliError::spec("give at most one of interval_index and interval")),
        (None, Some([lo, hi])) => Ok(match_interval(f, lo, hi, INTERVAL_MATCH_TOL)?),
        (Some(i), None) => {
            let all = hill_intervals(f)?;
            let count = all.len();
            all.into_iter().nth(i).ok_or_else(|| {
                CliError::new(
                    "interval_index_out_of_range",
                    format!("interval_index {i} but F has {count} Hill interval(s)"),
                )
            })
        }
        (None, None) => match x_init {
            Some(x) => Ok(hill_interval_containing(f, x)?),
            None => Ok(hill_intervals(f)?[0]),
        },
    }
}

impl Resolved {
    /// Integration time from command-line overrides, then the spec. Without
    /// either, one x-period.
    pub fn duration(&self, duration: Option<f64>, periods: Option<f64>) -> CliResult<f64> {
        check_positive("duration", duration)?;
        check_positive("periods", periods)?;
        let (duration, periods) = match (duration, periods) {
            (Some(_), Some(_)) => {
                return Err(CliError::new(
                    "invalid_arguments",
                    "give at most one of --duration and --periods",
                ))
            }
            (None, None) => (self.duration, self.periods),
            flags => flags,
        };
        match (duration, periods) {
            (Some(d), _) => Ok(d),
            (None, p) => Ok(p.unwrap_or(1.0) * period_l(&self.f, &self.interval, self.quadrature_n)?),
        }
    }
}

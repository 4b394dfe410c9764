//! `jetflow`: geodesics, periods and non-periodicity certificates of
//! polynomial pairs from the command line.

mod error;
mod io;
mod plot;
mod spec;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use jetflow_core::analysis::{certify_with, classify_start, CertifyOptions, GeodesicClass};
use jetflow_core::sweep::{run_sweep, summarize, SweepConfig, SweepSummary};
use jetflow_core::{delta_theta, geodesic, FlowOptions, GeodesicSpec, Trajectory, SCHEMA_VERSION};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::Format;

const DEFAULT_SAMPLE_DT: f64 = 1e-3;

#[derive(Parser)]
#[command(name = "jetflow", about = "Sub-Riemannian geodesics on jet spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one geodesic and write its trajectory.
    Geodesic {
        #[arg(long)]
        spec: PathBuf,
        /// Trajectory file; `.json` selects JSON, anything else CSV.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Number of x-periods to integrate; overrides the spec.
        #[arg(long, conflicts_with = "duration")]
        periods: Option<f64>,
        /// Integration time; overrides the spec.
        #[arg(long)]
        duration: Option<f64>,
        /// Output sample spacing.
        #[arg(long, default_value_t = DEFAULT_SAMPLE_DT)]
        dt: f64,
        /// Also write the diagnostics JSON here.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Print the x-period and the holonomy over one period.
    Periods {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Print the geodesic class of the spec's pair.
    Classify {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Print the non-periodicity certificate of the spec's pair.
    Certify {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Certify many seeded random pairs.
    Sweep {
        #[arg(long)]
        count: usize,
        /// Falls back to the `seed` of `--spec`.
        #[arg(long)]
        seed: Option<u64>,
        /// Supplies `seed` and `quadrature_n` when the flags are absent.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
        #[arg(long)]
        quadrature_n: Option<usize>,
        /// Summary file; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-case certificates, one JSON object per line.
        #[arg(long)]
        archive: Option<PathBuf>,
    },
    /// Render the projection `(x, theta_0^j)` of a trajectory file as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// 1-based component `j`.
        #[arg(long, default_value_t = 1)]
        component: usize,
    },
}

fn main() -> ExitCode {
    let version = format!("{} (schema {SCHEMA_VERSION})", env!("CARGO_PKG_VERSION"));
    let matches = match Cli::command().version(version).try_get_matches() {
        Ok(m) => m,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::new("invalid_arguments", e.render().to_string().trim_end())),
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => return fail(&CliError::new("invalid_arguments", e.to_string())),
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(2)
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Geodesic {
            spec,
            out,
            format,
            periods,
            duration,
            dt,
            diagnostics,
        } => cmd_geodesic(&spec, &out, format, periods, duration, dt, diagnostics.as_deref()),
        Command::Periods { spec } => {
            let r = spec::load(&spec)?;
            print_json(&delta_theta(&r.f, &r.interval, r.quadrature_n)?)
        }
        Command::Classify { spec } => {
            let r = spec::load(&spec)?;
            print_json(&classify_start(&r.f, &r.interval, r.x_init)?)
        }
        Command::Certify { spec } => {
            let r = spec::load(&spec)?;
            let opts = CertifyOptions {
                quadrature_n: r.quadrature_n,
                ..CertifyOptions::default()
            };
            print_json(&certify_with(&r.f, &r.interval, &opts)?)
        }
        Command::Sweep {
            count,
            seed,
            spec,
            kmax,
            nmax,
            quadrature_n,
            out,
            archive,
        } => {
            let from_spec = spec.as_deref().map(spec::load_raw).transpose()?;
            let seed = seed
                .or_else(|| from_spec.as_ref().and_then(|s| s.seed))
                .ok_or_else(|| CliError::new("invalid_arguments", "a seed is required (--seed or the spec's seed)"))?;
            let quadrature_n = quadrature_n
                .or_else(|| from_spec.as_ref().map(|s| s.quadrature_n))
                .unwrap_or(spec::DEFAULT_QUADRATURE_N);
            cmd_sweep(
                count,
                seed,
                kmax,
                nmax,
                quadrature_n,
                out.as_deref(),
                archive.as_deref(),
            )
        }
        Command::Plot { input, out, component } => {
            let samples = io::read_samples(&input)?;
            let n = samples[0].theta.n();
            if component == 0 || component > n {
                return Err(CliError::new(
                    "invalid_arguments",
                    format!("component must be in 1..={n}, got {component}"),
                ));
            }
            io::write_atomic(&out, plot::svg(&samples, component - 1).as_bytes())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::new("io_error", e.to_string()))
}

/// Writes a line to stdout; a closed pipe is not an error.
fn emit(text: &str) -> CliResult<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::new("io_error", format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    emit(&to_json(value)?)
}

#[derive(Serialize)]
struct GeodesicReport {
    schema_version: &'static str,
    classification: GeodesicClass,
    duration: f64,
    sample_dt: f64,
    samples: usize,
    max_energy_drift: f64,
    max_arclength_defect: Option<f64>,
    max_confinement_violation: f64,
    out: String,
}

/// Keeps only the samples on the output grid `m * dt` (plus the final time),
/// dropping the integrator's own steps.
fn thin_to_grid(traj: &mut Trajectory, dt: f64, t_end: f64) {
    traj.samples.retain(|s| s.t == t_end || (s.t / dt).round() * dt == s.t);
    traj.refresh_diagnostics();
}

fn cmd_geodesic(
    spec_path: &Path,
    out: &Path,
    format: Option<Format>,
    periods: Option<f64>,
    duration: Option<f64>,
    dt: f64,
    diagnostics: Option<&Path>,
) -> CliResult<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CliError::new(
            "invalid_arguments",
            format!("--dt must be positive, got {dt}"),
        ));
    }
    let r = spec::load(spec_path)?;
    let classification = classify_start(&r.f, &r.interval, r.x_init)?;
    let t_end = r.duration(duration, periods)?;
    let gspec = GeodesicSpec {
        f: r.f.clone(),
        interval: r.interval,
        x0: r.x_init,
        px_sign: r.px_sign,
        theta0: r.theta0.clone(),
    };
    let opts = FlowOptions {
        sample_dt: Some(dt),
        ..FlowOptions::with_tol(r.tol)
    };
    let mut traj = geodesic(&gspec, t_end, &[], &opts)?;
    thin_to_grid(&mut traj, dt, t_end);

    let format = format.unwrap_or_else(|| Format::from_path(out));
    io::write_atomic(out, &io::trajectory_bytes(&traj, format)?)?;

    let report = GeodesicReport {
        schema_version: SCHEMA_VERSION,
        classification,
        duration: t_end,
        sample_dt: dt,
        samples: traj.samples.len(),
        max_energy_drift: traj.diagnostics.max_energy_drift,
        max_arclength_defect: traj.diagnostics.max_arclength_defect,
        max_confinement_violation: traj.max_confinement_violation(),
        out: out.display().to_string(),
    };
    let text = to_json(&report)?;
    if let Some(path) = diagnostics {
        io::write_atomic(path, format!("{text}\n").as_bytes())?;
    }
    emit(&text)
}

#[derive(Serialize)]
struct SweepReport {
    schema_version: &'static str,
    #[serde(flatten)]
    summary: SweepSummary,
}

/// Caps the worker pool at `JETFLOW_THREADS` when set.
fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("JETFLOW_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().ok().filter(|&t| t >= 1).ok_or_else(|| {
        CliError::new(
            "invalid_arguments",
            format!("JETFLOW_THREADS must be a positive integer, got {value:?}"),
        )
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::new("invalid_arguments", e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn cmd_sweep(
    count: usize,
    seed: u64,
    kmax: usize,
    nmax: usize,
    quadrature_n: usize,
    out: Option<&Path>,
    archive: Option<&Path>,
) -> CliResult<()> {
    if count == 0 || kmax == 0 || nmax == 0 {
        return Err(CliError::new(
            "invalid_arguments",
            "count, kmax and nmax must be at least 1",
        ));
    }
    if quadrature_n < spec::MIN_QUADRATURE_N {
        return Err(CliError::new(
            "invalid_arguments",
            format!(
                "quadrature_n must be at least {}, got {quadrature_n}",
                spec::MIN_QUADRATURE_N
            ),
        ));
    }
    configure_threads()?;
    let mut cfg = SweepConfig::new(count, seed, kmax, nmax);
    cfg.certify.quadrature_n = quadrature_n;
    let cases = run_sweep(&cfg);

    if let Some(path) = archive {
        let mut lines = Vec::new();
        for case in &cases {
            lines.extend(serde_json::to_vec(case).map_err(|e| CliError::new("io_error", e.to_string()))?);
            lines.push(b'\n');
        }
        io::write_atomic(path, &lines)?;
    }
    let text = to_json(&SweepReport {
        schema_version: SCHEMA_VERSION,
        summary: summarize(&cfg, &cases),
    })?;
    match out {
        Some(path) => io::write_atomic(path, format!("{text}\n").as_bytes()),
        None => emit(&text),
    }
}

//! Atomic output files and the trajectory CSV/JSON formats.

use std::io::Write;
use std::path::Path;

use jetflow_core::dynamics::{csv_header, Sample};
use jetflow_core::{Trajectory, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// From the file extension; CSV unless it is `.json`.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct TrajectoryFile {
    schema_version: String,
    #[serde(flatten)]
    trajectory: Trajectory,
}

pub fn trajectory_bytes(traj: &Trajectory, format: Format) -> CliResult<Vec<u8>> {
    match format {
        Format::Json => {
            let file = TrajectoryFile {
                schema_version: SCHEMA_VERSION.to_string(),
                trajectory: traj.clone(),
            };
            let mut out = serde_json::to_vec_pretty(&file).map_err(|e| CliError::new("io_error", e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let err = |e: csv::Error| CliError::new("io_error", e.to_string());
            w.write_record(csv_header(traj.f.n(), traj.f.k())).map_err(err)?;
            for s in &traj.samples {
                w.serialize(s.csv_row()).map_err(err)?;
            }
            w.into_inner().map_err(|e| CliError::new("io_error", e.to_string()))
        }
    }
}

fn malformed(path: &Path, what: impl std::fmt::Display) -> CliError {
    CliError::new("malformed_trajectory", format!("{}: {what}", path.display()))
}

/// Samples of a trajectory file written by `geodesic`; the format follows
/// the extension.
pub fn read_samples(path: &Path) -> CliResult<Vec<Sample>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let samples = match Format::from_path(path) {
        Format::Json => {
            let file: TrajectoryFile = serde_json::from_str(&text).map_err(|e| malformed(path, e))?;
            file.trajectory.samples
        }
        Format::Csv => parse_csv(path, &text)?,
    };
    if samples.is_empty() {
        return Err(CliError::new(
            "empty_trajectory",
            format!("{}: no samples", path.display()),
        ));
    }
    Ok(samples)
}

fn parse_csv(path: &Path, text: &str) -> CliResult<Vec<Sample>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| malformed(path, e))?.clone();
    let (n, k) = shape_from_header(&header).ok_or_else(|| malformed(path, "unrecognised header"))?;
    r.records()
        .enumerate()
        .map(|(line, rec)| {
            let rec = rec.map_err(|e| malformed(path, e))?;
            let row = rec
                .iter()
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| malformed(path, format!("row {}: {e}", line + 1)))?;
            Sample::from_csv_row(&row, n, k).map_err(|e| malformed(path, format!("row {}: {e}", line + 1)))
        })
        .collect()
}

/// `(n, k)` when the header is exactly the one [`csv_header`] writes.
fn shape_from_header(header: &csv::StringRecord) -> Option<(usize, usize)> {
    let fields: Vec<&str> = header.iter().collect();
    let m = fields.len().checked_sub(3)?;
    let (mut n, mut k) = (0, 0);
    for f in fields.get(3..)? {
        let mut parts = f.strip_prefix("theta_")?.split('_');
        let i: usize = parts.next()?.parse().ok()?;
        let j: usize = parts.next()?.parse().ok()?;
        k = k.max(i);
        n = n.max(j);
    }
    if n == 0 || m != (k + 1) * n {
        return None;
    }
    let want = csv_header(n, k);
    (fields == want.iter().map(String::as_str).collect::<Vec<_>>()).then_some((n, k))
}

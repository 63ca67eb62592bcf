//! Atomic file output: CSV tables and OLF1 fields.

use std::io::Write;
use std::path::{Path, PathBuf};

use orlicz_lab::fields::{write_field, AnyField};

use crate::CliError;

pub const CHECK_HEADER: [&str; 8] = [
    "phi",
    "psi",
    "dimension",
    "s_theta",
    "threshold",
    "satisfied",
    "s_rho",
    "ratio_finite",
];
pub const THETA_HEADER: [&str; 4] = ["phi", "psi", "t", "theta"];
pub const DIAGNOSTICS_HEADER: [&str; 4] = ["iter", "energy", "residual", "step_length"];
pub const CACCIOPPOLI_HEADER: [&str; 9] = [
    "phi",
    "psi",
    "h",
    "ball",
    "lhs",
    "rhs_osc",
    "rhs_src",
    "empirical_C",
    "verdict",
];
pub const GEHRING_HEADER: [&str; 8] = [
    "phi",
    "psi",
    "ball",
    "delta",
    "coarse_ratio",
    "fine_ratio",
    "delta_star",
    "integrable",
];
pub const PROBE_HEADER: [&str; 9] = [
    "phi", "psi", "fixture", "epsilon", "kappa", "s_gamma", "fitted_c", "fitted_C", "positive",
];
pub const PLOT_HEADER: [&str; 3] = ["x", "y", "series"];

/// Shortest round-trip decimal form, so CSV values parse back bit-exactly.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| CliError::Io(e.error))?;
    Ok(path)
}

pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    write_atomic(dir, name, &bytes)
}

pub fn write_olf1(dir: &Path, name: &str, field: &AnyField) -> Result<PathBuf, CliError> {
    let mut buf = Vec::new();
    write_field(&mut buf, field).map_err(|e| CliError::Compute(e.to_string()))?;
    write_atomic(dir, name, &buf)
}

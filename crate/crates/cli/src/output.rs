//! CSV emission. Rows are written in grid order by a single writer.

use std::io::Write;
use std::path::Path;

use udw_core::metrics::SweepRow;
use udw_core::noise::NoiseRow;

use crate::CliError;

pub const CAPACITY_COLUMNS: [&str; 4] = ["lambda_phi", "gamma", "capacity", "backend"];
pub const DIAMOND_COLUMNS: [&str; 5] = ["lambda_phi", "gamma", "diamond", "starts", "converged"];
pub const NOISE_COLUMNS: [&str; 5] = ["lambda_phi", "b", "lambda_eff", "capacity", "flag"];

/// 12 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt<T>(x: Option<T>, f: impl Fn(T) -> String) -> String {
    x.map(f).unwrap_or_default()
}

pub fn header_line(seed: u64, backend: &str) -> String {
    format!("# udw v{} seed={seed} backend={backend}\n", env!("CARGO_PKG_VERSION"))
}

fn table(header: &str, columns: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut buf = header.as_bytes().to_vec();
    let mut w = csv::Writer::from_writer(&mut buf);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    drop(w);
    Ok(buf)
}

pub fn capacity_csv(rows: &[SweepRow], seed: u64, backend: &str) -> Result<Vec<u8>, CliError> {
    let body = rows
        .iter()
        .map(|r| vec![num(r.lambda_phi), num(r.gamma), num(r.value), r.backend.to_string()])
        .collect();
    table(&header_line(seed, backend), &CAPACITY_COLUMNS, body)
}

pub fn diamond_csv(rows: &[SweepRow], seed: u64, backend: &str) -> Result<Vec<u8>, CliError> {
    let body = rows
        .iter()
        .map(|r| {
            vec![
                num(r.lambda_phi),
                num(r.gamma),
                num(r.value),
                opt(r.starts, |s| s.to_string()),
                opt(r.converged, |c| c.to_string()),
            ]
        })
        .collect();
    table(&header_line(seed, backend), &DIAMOND_COLUMNS, body)
}

pub fn noise_csv(rows: &[NoiseRow], seed: u64, backend: &str) -> Result<Vec<u8>, CliError> {
    let body = rows
        .iter()
        .map(|r| {
            vec![
                num(r.lambda_phi),
                num(r.b),
                opt(r.lambda_eff, num),
                opt(r.capacity, num),
                r.flag.name().to_string(),
            ]
        })
        .collect();
    table(&header_line(seed, backend), &NOISE_COLUMNS, body)
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

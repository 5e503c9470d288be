//! CSV outputs with JSON sidecars. Every written file `<out>` gets a
//! `<out>.json` sidecar recording the full configuration, the seed, and
//! the git describe of the build, so any output can be regenerated.

use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use mhg_core::harness::TailCurve;

use crate::GIT_DESCRIBE;

/// Sidecar payload: the command's full configuration plus build identity.
#[derive(Serialize)]
pub struct Sidecar<T: Serialize> {
    pub command: String,
    pub config: T,
    pub seed: u64,
    pub git_describe: &'static str,
    pub version: &'static str,
}

pub fn write_sidecar<T: Serialize>(out: &Path, command: &str, config: &T, seed: u64) -> Result<()> {
    let sidecar = Sidecar {
        command: command.to_string(),
        config,
        seed,
        git_describe: GIT_DESCRIBE,
        version: env!("CARGO_PKG_VERSION"),
    };
    let mut path = out.as_os_str().to_owned();
    path.push(".json");
    let path = PathBuf::from(path);
    let file = File::create(&path)
        .with_context(|| format!("creating sidecar {}", path.display()))?;
    serde_json::to_writer_pretty(file, &sidecar)?;
    Ok(())
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut path = out.as_os_str().to_owned();
    path.push(".json");
    PathBuf::from(path)
}

/// Tail curve rows: `s,p_hat,ci_lo,ci_hi,n_effective`.
pub fn write_curve_csv(out: &Path, curve: &TailCurve) -> Result<()> {
    let mut w = csv::Writer::from_path(out)
        .with_context(|| format!("creating {}", out.display()))?;
    w.write_record(["s", "p_hat", "ci_lo", "ci_hi", "n_effective"])?;
    for e in &curve.entries {
        w.write_record(&[
            format_float(e.s),
            format_float(e.p_hat),
            format_float(e.ci.0),
            format_float(e.ci.1),
            e.n_effective.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed curve row: `(s, p_hat, (ci_lo, ci_hi), n_effective)`.
pub type CurveRow = (f64, f64, (f64, f64), u64);

/// Read back a curve CSV written by [`write_curve_csv`].
pub fn read_curve_csv(path: &Path) -> Result<Vec<CurveRow>> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            record
                .get(i)
                .with_context(|| format!("missing column {i}"))?
                .parse::<f64>()
                .with_context(|| format!("bad float in column {i}"))
        };
        let n = record
            .get(4)
            .context("missing n_effective")?
            .parse::<u64>()
            .context("bad n_effective")?;
        rows.push((parse(0)?, parse(1)?, (parse(2)?, parse(3)?), n));
    }
    Ok(rows)
}

/// Configuration dump: `index,r,theta`.
pub fn write_configuration_csv(
    out: &Path,
    config: &mhg_core::sampling::Configuration,
) -> Result<()> {
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(["index", "r", "theta"])?;
    for (i, p) in config.points.iter().enumerate() {
        w.write_record(&[i.to_string(), format_float(p.r), format_float(p.theta)])?;
    }
    w.flush()?;
    Ok(())
}

/// Region boundary rows: `r,theta_boundary`.
pub fn write_boundary_csv(out: &Path, profile: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(["r", "theta_boundary"])?;
    for (r, t) in profile {
        w.write_record(&[format_float(*r), format_float(*t)])?;
    }
    w.flush()?;
    Ok(())
}

/// Generic one-table writer: header plus stringified rows.
pub fn write_table_csv(out: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trippable decimal representation.
pub fn format_float(x: f64) -> String {
    let mut buffer = ryu_like(x);
    if buffer.is_empty() {
        buffer = format!("{x}");
    }
    buffer
}

fn ryu_like(x: f64) -> String {
    // `{}` on f64 already prints the shortest representation that parses
    // back to the same bits
    format!("{x}")
}

/// Write a plain text report (used by verify-analytics alongside stdout).
pub fn write_text(out: &Path, text: &str) -> Result<()> {
    let mut f = File::create(out)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

//! CSV tables and run manifests.
//!
//! CSV files carry `#`-prefixed metadata lines, then one header row. Numbers
//! are written in shortest round-trip exponent form, so identical values give
//! identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;

pub const UNITS_NOTE: &str = "energies in eV, angles in rad, wavelengths in nm";

/// Streams one CSV table to disk.
pub struct CsvWriter {
    out: BufWriter<File>,
    columns: usize,
    path: PathBuf,
}

impl CsvWriter {
    pub fn create(path: &Path, meta: &[(&str, String)], header: &[&str]) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        for (k, v) in meta {
            writeln!(out, "# {k}: {v}")?;
        }
        writeln!(out, "{}", header.join(","))?;
        Ok(CsvWriter { out, columns: header.len(), path: path.to_path_buf() })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        debug_assert_eq!(values.len(), self.columns);
        let mut first = true;
        for v in values {
            if !first {
                self.out.write_all(b",")?;
            }
            write!(self.out, "{v:e}")?;
            first = false;
        }
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

pub fn write_csv<I>(path: &Path, meta: &[(&str, String)], header: &[&str], rows: I) -> Result<PathBuf>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = CsvWriter::create(path, meta, header)?;
    for r in rows {
        w.row(&r)?;
    }
    w.finish()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(path.to_path_buf())
}

/// Metadata common to every CSV of a run.
pub fn standard_meta(subcommand: &str, config: &RunConfig, seed: Option<u64>) -> Vec<(&'static str, String)> {
    let mut m = vec![
        ("tool", format!("wavepacket-radiation {}", env!("CARGO_PKG_VERSION"))),
        ("subcommand", subcommand.to_string()),
        ("config_hash", config.hash()),
        ("units", UNITS_NOTE.to_string()),
    ];
    if let Some(s) = seed {
        m.push(("seed", s.to_string()));
    }
    m
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub wavepacket_radiation: &'static str,
    pub manifest_format: u32,
}

/// Record of one run, written next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub versions: Versions,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub config: std::collections::BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(subcommand: &str, config: &RunConfig, seed: Option<u64>, wall_time_s: f64, outputs: &[PathBuf]) -> Self {
        Manifest {
            subcommand: subcommand.to_string(),
            config_hash: config.hash(),
            seed,
            versions: Versions { wavepacket_radiation: env!("CARGO_PKG_VERSION"), manifest_format: 1 },
            wall_time_s,
            outputs: outputs
                .iter()
                .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
                .collect(),
            config: config.resolved().clone(),
        }
    }
}

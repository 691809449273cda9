//! CSV tables, run manifests and checksums.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::jobs::Job;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Flag(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => sig9(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Flag(v) => v.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Nine significant digits; plain notation for moderate magnitudes.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.8e}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Written next to every output file as `<file>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub job: Job,
    pub seed: Option<u64>,
    pub version: String,
    /// File name of the output, relative to the manifest's directory.
    pub output: String,
    /// SHA-256 of the output bytes, lowercase hex.
    pub sha256: String,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Writes `csv` to `path` and its manifest beside it.
pub fn write_with_manifest(path: &Path, command: &str, job: &Job, csv: &str) -> Result<RunManifest, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, csv).map_err(|e| CliError::io(path, e))?;
    let manifest = RunManifest {
        command: command.to_string(),
        job: job.clone(),
        seed: job.seed(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        output: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
        sha256: sha256_hex(csv.as_bytes()),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    let mpath = manifest_path(path);
    fs::write(&mpath, json + "\n").map_err(|e| CliError::io(&mpath, e))?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: not a run manifest: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.7810546828218939), "0.781054683");
        assert_eq!(sig9(146769.0), "146769.000");
        assert_eq!(sig9(1.0), "1.00000000");
        assert_eq!(sig9(3.48348733260729e-44), "3.48348733e-44");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(-0.25), "-0.250000000");
        for v in [1.234567891e-3, 9.87654321e7, 2.5e-5] {
            let parsed: f64 = sig9(v).parse().unwrap();
            assert!(((parsed - v) / v).abs() < 1e-8);
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["alpha", "n_alpha", "feasible"]);
        t.push(vec![Cell::Num(0.7), Cell::Int(146769), Cell::Flag(true)]);
        t.push(vec![Cell::Num(0.95), Cell::Empty, Cell::Flag(false)]);
        assert_eq!(t.to_csv(), "alpha,n_alpha,feasible\n0.700000000,146769,true\n0.950000000,,false\n");
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_sits_beside_output() {
        assert_eq!(
            manifest_path(Path::new("out/fig2_d1.csv")),
            PathBuf::from("out/fig2_d1.csv.manifest.json")
        );
    }
}

//! Output directory with atomic writes and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{hex, Config};
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRecord {
    pub n_modes: usize,
    pub dk: f64,
}

#[derive(Debug, Clone, Serialize)]
struct OutputRecord {
    file: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_sha256: String,
    seed: u64,
    strict: bool,
    grids: &'a [GridRecord],
    outputs: &'a [OutputRecord],
    resolution_flags: &'a [String],
    notes: &'a [String],
}

/// Findings of a run. Resolution flags decide the exit status under `--strict`.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Flags {
    pub resolution: Vec<String>,
    pub notes: Vec<String>,
}

impl Flags {
    pub fn resolution(&mut self, msg: impl Into<String>) {
        self.resolution.push(msg.into());
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }
}

pub struct OutDir {
    dir: PathBuf,
    outputs: Vec<OutputRecord>,
    pub grids: Vec<GridRecord>,
    pub flags: Flags,
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| CliError::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Shortest round-trip decimal.
pub fn num(v: f64) -> String {
    format!("{v}")
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), outputs: Vec::new(), grids: Vec::new(), flags: Flags::default() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn grid(&mut self, g: &airy_core::FourierGrid) {
        self.grids.push(GridRecord { n_modes: g.n_modes(), dk: g.dk() });
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(&self.path(name), bytes)?;
        self.outputs.push(OutputRecord { file: name.to_string(), sha256: hex(&Sha256::digest(bytes)) });
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Failed(format!("writing {name}: {e}"));
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Failed(format!("writing {name}: {e}")))?;
        self.write(name, &bytes)
    }

    pub fn write_json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `config.toml` and `manifest.json`.
    pub fn finish(&mut self, command: &str, cfg: &Config, strict: bool) -> Result<(), CliError> {
        self.write("config.toml", cfg.to_toml().as_bytes())?;
        let manifest = Manifest {
            command,
            version: VERSION,
            config_sha256: cfg.hash(),
            seed: cfg.seed,
            strict,
            grids: &self.grids,
            outputs: &self.outputs,
            resolution_flags: &self.flags.resolution,
            notes: &self.flags.notes,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        write_atomic(&self.path("manifest.json"), text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = std::env::temp_dir().join(format!("airy-out-{}", std::process::id()));
        let mut out = OutDir::create(&dir).unwrap();
        out.write_csv("a.csv", &["x", "y"], &[vec![num(1.0), num(0.1)]]).unwrap();
        out.finish("test", &Config::default(), false).unwrap();
        let mut names: Vec<String> =
            fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        names.sort();
        assert_eq!(names, ["a.csv", "config.toml", "manifest.json"]);
        assert_eq!(fs::read_to_string(dir.join("a.csv")).unwrap(), "x,y\n1,0.1\n");
        fs::remove_dir_all(&dir).unwrap();
    }
}

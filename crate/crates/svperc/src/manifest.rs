//! Run manifests, written next to each output as `<output>.manifest.json`.
//!
//! Timestamps live only here so that the outputs themselves are reproducible
//! byte for byte.

use std::path::{Path, PathBuf};

use serde::Serialize;
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::error::CliResult;
use crate::formats::write_file;

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub svperc: &'static str,
    pub rng: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: serde_json::Value,
    pub table_sha256: Option<String>,
    pub outputs: Vec<PathBuf>,
    pub versions: Versions,
    pub started_utc: String,
    pub finished_utc: String,
}

pub fn now_utc() -> String {
    OffsetDateTime::now_utc()
        .format(&Rfc3339)
        .unwrap_or_else(|_| String::from("unknown"))
}

impl RunManifest {
    pub fn new(command_line: Vec<String>, config: serde_json::Value, started_utc: String) -> Self {
        Self {
            command_line,
            config,
            table_sha256: None,
            outputs: Vec::new(),
            versions: Versions {
                svperc: env!("CARGO_PKG_VERSION"),
                rng: svperc_core::montecarlo::RNG_ALGORITHM,
            },
            started_utc,
            finished_utc: String::new(),
        }
    }

    pub fn sidecar_path(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    /// Stamps the finish time and writes the manifest beside `primary`.
    pub fn write_beside(self, primary: &Path) -> CliResult<PathBuf> {
        let path = Self::sidecar_path(primary);
        self.write_to(&path)?;
        Ok(path)
    }

    pub fn write_to(mut self, path: &Path) -> CliResult<()> {
        self.finished_utc = now_utc();
        write_file(path, crate::json::to_string(&self).as_bytes())
    }
}

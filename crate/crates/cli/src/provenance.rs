use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Provenance for one invocation, written as `run.json` in the output
/// directory. `argv` plus `config` is enough to repeat the run.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub command: String,
    pub argv: Vec<String>,
    pub config: Value,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub versions: Versions,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub exit_code: i32,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub cadfusion: &'static str,
    pub checkpoint_blob: u32,
    pub eval_schema: u32,
}

impl RunRecord {
    pub fn start(command: &str, seed: u64, threads: usize) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            argv: std::env::args().collect(),
            config: Value::Null,
            config_sha256: String::new(),
            seed,
            threads,
            versions: Versions {
                cadfusion: env!("CARGO_PKG_VERSION"),
                checkpoint_blob: trainkit::checkpoint::BLOB_VERSION,
                eval_schema: metrics::report::SCHEMA_VERSION,
            },
            started_unix: now(),
            finished_unix: 0.0,
            exit_code: 0,
            outputs: Vec::new(),
        }
    }

    pub fn set_config(&mut self, config: &impl Serialize) {
        self.config = serde_json::to_value(config).unwrap_or(Value::Null);
        self.config_sha256 = hex::encode(Sha256::digest(self.config.to_string()));
    }

    pub fn finish(mut self, dir: &Path, exit_code: i32) -> Result<(), CliError> {
        self.finished_unix = now();
        self.exit_code = exit_code;
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        let path = dir.join("run.json");
        let text = serde_json::to_string_pretty(&self).expect("run record serializes");
        fs::write(&path, text).map_err(CliError::io(path))
    }
}

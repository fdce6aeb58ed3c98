//! Run directories and their manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use time::format_description::well_known::Rfc3339;
use time::macros::format_description;
use time::OffsetDateTime;

use crate::args::OutputArgs;
use crate::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

/// `SOURCE_DATE_EPOCH` when set, so reruns can produce identical manifests.
pub fn now() -> OffsetDateTime {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse::<i64>().ok())
        .and_then(|secs| OffsetDateTime::from_unix_timestamp(secs).ok())
        .unwrap_or_else(OffsetDateTime::now_utc)
}

fn rfc3339(t: OffsetDateTime) -> String {
    t.format(&Rfc3339).unwrap_or_default()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub parameters: serde_json::Value,
    pub seeds: Vec<u64>,
    pub started_at: String,
    pub finished_at: String,
    /// SHA-256 of the config file, or of the parameters when there is none.
    pub config_sha256: String,
    pub outputs: Vec<String>,
}

/// An output directory collecting files for one run.
pub struct RunDir {
    root: PathBuf,
    subcommand: &'static str,
    parameters: serde_json::Value,
    seeds: Vec<u64>,
    config_sha256: Option<String>,
    started: OffsetDateTime,
    outputs: Vec<String>,
    pub json: bool,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl RunDir {
    pub fn create(subcommand: &'static str, output: &OutputArgs, parameters: &impl Serialize) -> CliResult<Self> {
        let started = now();
        let root = match &output.out {
            Some(p) => p.clone(),
            None => {
                let stamp = started
                    .format(format_description!("[year][month][day]T[hour][minute][second]Z"))
                    .unwrap_or_default();
                PathBuf::from("runs").join(format!("{stamp}-{subcommand}"))
            }
        };
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        let parameters = serde_json::to_value(parameters).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Self {
            root,
            subcommand,
            parameters,
            seeds: Vec::new(),
            config_sha256: None,
            started,
            outputs: Vec::new(),
            json: output.json,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn seed(&mut self, seed: u64) {
        if !self.seeds.contains(&seed) {
            self.seeds.push(seed);
        }
    }

    pub fn config_bytes(&mut self, bytes: &[u8]) {
        self.config_sha256 = Some(sha256_hex(bytes));
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> CliResult<()> {
        let path = self.root.join(name);
        fs::write(&path, text).map_err(io_err(&path))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> CliResult<()> {
        let text = to_json(value)?;
        self.write_text(name, &text)
    }

    /// Writes `value` to `name` and, with `--json`, to stdout.
    pub fn primary_json(&mut self, name: &str, value: &impl Serialize) -> CliResult<()> {
        let text = to_json(value)?;
        if self.json {
            print!("{text}");
        }
        self.write_text(name, &text)
    }

    /// Prints a line unless `--json` owns stdout.
    pub fn say(&self, line: impl AsRef<str>) {
        if !self.json {
            println!("{}", line.as_ref());
        }
    }

    pub fn finish(mut self) -> CliResult<RunManifest> {
        self.outputs.sort();
        let params_text = serde_json::to_string(&self.parameters).unwrap_or_default();
        let manifest = RunManifest {
            tool: "sumdim",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            parameters: self.parameters.clone(),
            seeds: self.seeds.clone(),
            started_at: rfc3339(self.started),
            finished_at: rfc3339(now()),
            config_sha256: self.config_sha256.clone().unwrap_or_else(|| sha256_hex(params_text.as_bytes())),
            outputs: self.outputs.clone(),
        };
        let path = self.root.join(MANIFEST_FILE);
        fs::write(&path, to_json(&manifest)?).map_err(io_err(&path))?;
        Ok(manifest)
    }
}

pub fn to_json(value: &impl Serialize) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Comma-separated CSV with a mandatory header.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

//! Output plumbing: provenance headers, atomic file writes and the run
//! manifest.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn config_hash(document: &Value) -> String {
    let bytes = serde_json::to_vec(document).expect("JSON values always serialize");
    hex::encode(Sha256::digest(&bytes))
}

/// Destination directory plus the provenance stamped into every file.
pub struct Sink {
    dir: PathBuf,
    hash: String,
    written: Vec<String>,
}

impl Sink {
    pub fn new(dir: &Path, document: &Value) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), hash: config_hash(document), written: Vec::new() })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn csv_header(&self) -> String {
        format!("dirac-lab {VERSION} config_sha256={}", self.hash)
    }

    pub fn provenance(&self) -> Value {
        json!({"tool": "dirac-lab", "version": VERSION, "config_sha256": self.hash})
    }

    /// Writes `bytes` to `name` through a temporary file in the same
    /// directory, renamed into place.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Pretty JSON with a `provenance` field added to the top-level object.
    pub fn write_json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<(), CliError> {
        let mut v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
        if let Value::Object(map) = &mut v {
            map.insert("provenance".into(), self.provenance());
        }
        let mut text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Flat little-endian `f64` array with a JSON sidecar `<name>.json`.
    pub fn write_snapshot(&mut self, name: &str, data: &[f64], mut sidecar: Value) -> Result<(), CliError> {
        let mut bytes = Vec::with_capacity(8 * data.len());
        for v in data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        self.write(name, &bytes)?;
        if let Value::Object(map) = &mut sidecar {
            map.insert("file".into(), name.into());
            map.insert("dtype".into(), "f64".into());
            map.insert("byte_order".into(), "little".into());
            map.insert("len".into(), data.len().into());
        }
        self.write_json(&format!("{name}.json"), &sidecar)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

/// Record of one invocation, written whether or not the run succeeded.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub config_sha256: String,
    pub status: &'static str,
    pub exit_code: u8,
    pub error: Option<String>,
    pub stages: Vec<Stage>,
    pub diagnostics: Value,
    pub outputs: Vec<String>,
    pub started_unix: f64,
    pub finished_unix: f64,
}

/// Stage timer and diagnostics collector for the manifest.
pub struct Run {
    pub command: String,
    started: f64,
    pub stages: Vec<Stage>,
    pub diagnostics: serde_json::Map<String, Value>,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

impl Run {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            started: unix_now(),
            stages: Vec::new(),
            diagnostics: Default::default(),
        }
    }

    pub fn stage<R>(&mut self, name: &str, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let out = f();
        self.stages.push(Stage { name: name.into(), seconds: t.elapsed().as_secs_f64() });
        out
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.diagnostics.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn finish(
        self,
        document: &Value,
        outputs: &[String],
        exit_code: u8,
        error: Option<String>,
    ) -> RunManifest {
        RunManifest {
            tool: "dirac-lab",
            version: VERSION,
            command: self.command,
            config: document.clone(),
            config_sha256: config_hash(document),
            status: if exit_code == 0 { "ok" } else { "failed" },
            exit_code,
            error,
            stages: self.stages,
            diagnostics: Value::Object(self.diagnostics),
            outputs: outputs.to_vec(),
            started_unix: self.started,
            finished_unix: unix_now(),
        }
    }
}

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Machine-readable error record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub kind: String,
    pub message: String,
}

impl Failure {
    pub fn new(stage: &str, kind: &str, message: impl Into<String>) -> Self {
        Failure {
            stage: stage.into(),
            kind: kind.into(),
            message: message.into(),
        }
    }

    pub fn core(stage: &str, e: &bnsp_core::Error) -> Self {
        Failure::new(stage, e.kind(), e.to_string())
    }

    pub fn io(stage: &str, path: &Path, e: std::io::Error) -> Self {
        Failure::new(stage, "io", format!("{}: {e}", path.display()))
    }
}

pub type CliResult<T> = Result<T, Failure>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub name: String,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub timestamp: String,
    pub seed: u64,
    pub threads: usize,
    pub config: serde_json::Value,
    pub stages: Vec<StageTime>,
    pub outputs: Vec<OutputFile>,
}

pub const MANIFEST: &str = "manifest.json";
pub const ERROR_RECORD: &str = "error.json";

/// Output directory, stage timings and the inventory of written files.
pub struct Run {
    pub dir: PathBuf,
    stages: Vec<StageTime>,
    outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Run {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| Failure::io("output", dir, e))?;
        Ok(Run {
            dir: dir.to_path_buf(),
            stages: Vec::new(),
            outputs: Vec::new(),
        })
    }

    /// Time `f` as a named stage and tag its errors with the stage name.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> bnsp_core::Result<T>) -> CliResult<T> {
        let start = Instant::now();
        let out = f().map_err(|e| Failure::core(name, &e));
        self.stages.push(StageTime {
            name: name.into(),
            wall_seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Failure::io("output", &path, e))?;
        self.register(name, bytes);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::new("output", "serialize", e.to_string()))?;
        self.write(name, (text + "\n").as_bytes())
    }

    /// Record a file written by someone else.
    pub fn adopt(&mut self, name: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        let bytes = fs::read(&path).map_err(|e| Failure::io("output", &path, e))?;
        self.register(name, &bytes);
        Ok(())
    }

    fn register(&mut self, name: &str, bytes: &[u8]) {
        self.outputs.retain(|o| o.path != name);
        self.outputs.push(OutputFile {
            path: name.into(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
    }

    pub fn finish(self, command: &str, seed: u64, config: &impl Serialize) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            tool: "bnsp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            seed,
            threads: rayon::current_num_threads(),
            config: serde_json::to_value(config)
                .map_err(|e| Failure::new("output", "serialize", e.to_string()))?,
            stages: self.stages,
            outputs: self.outputs,
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Failure::new("output", "serialize", e.to_string()))?;
        let path = self.dir.join(MANIFEST);
        fs::write(&path, text + "\n").map_err(|e| Failure::io("output", &path, e))?;
        Ok(manifest)
    }
}

/// Full-precision float for CSV and text output.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text from a header and rows of preformatted cells.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

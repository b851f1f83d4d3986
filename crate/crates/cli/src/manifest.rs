//! Run manifest: effective settings, stage timings, and a checksummed list of
//! every file the run wrote. Written atomically at the end of the run so a
//! manifest on disk always describes a complete run.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sumfunc_core::{checksum, CoreError, Result};

pub const MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: u64,
    pub fnv64: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub experiment: String,
    pub pass: bool,
    pub config: BTreeMap<String, String>,
    pub stages: Vec<StageTime>,
    pub outputs: Vec<OutputFile>,
}

/// Collects result files and stage timings as the run produces them.
pub struct RunRecorder {
    out_dir: PathBuf,
    stages: Vec<StageTime>,
    outputs: Vec<OutputFile>,
    current: Option<(String, Instant)>,
}

impl RunRecorder {
    pub fn new(out_dir: &Path) -> Result<RunRecorder> {
        std::fs::create_dir_all(out_dir)?;
        Ok(RunRecorder {
            out_dir: out_dir.to_path_buf(),
            stages: Vec::new(),
            outputs: Vec::new(),
            current: None,
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Begin a named stage, closing the previous one.
    pub fn stage(&mut self, name: &str) {
        self.finish_stage();
        self.current = Some((name.to_string(), Instant::now()));
    }

    fn finish_stage(&mut self) {
        if let Some((stage, started)) = self.current.take() {
            self.stages.push(StageTime {
                stage,
                seconds: started.elapsed().as_secs_f64(),
            });
        }
    }

    /// Record an externally produced stage duration (e.g. table acquisition).
    pub fn record_stage(&mut self, name: &str, seconds: f64) {
        self.stages.push(StageTime {
            stage: name.to_string(),
            seconds,
        });
    }

    fn register(&mut self, name: &str, bytes: &[u8]) {
        self.outputs.push(OutputFile {
            file: name.to_string(),
            bytes: bytes.len() as u64,
            fnv64: format!("{:016x}", checksum(bytes)),
        });
    }

    /// Write a result file and add it to the manifest's output list.
    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, bytes)?;
        self.register(name, bytes);
        Ok(path)
    }

    /// Serialize a value as pretty JSON (trailing newline) and record it.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CoreError::invalid(format!("serializing {name}: {e}")))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Finish the run: close the open stage and atomically write the manifest.
    pub fn finish(mut self, config: &BTreeMap<String, String>, experiment: &str, pass: bool) -> Result<PathBuf> {
        self.finish_stage();
        let manifest = RunManifest {
            tool: "sumfunc".to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.to_string(),
            pass,
            config: config.clone(),
            stages: self.stages,
            outputs: self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CoreError::invalid(format!("serializing manifest: {e}")))?;
        text.push('\n');

        let path = self.out_dir.join(MANIFEST_FILE);
        let tmp = self.out_dir.join(format!("{MANIFEST_FILE}.tmp"));
        {
            let mut file = std::fs::File::create(&tmp)?;
            file.write_all(text.as_bytes())?;
            file.sync_all()?;
        }
        std::fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

/// Format a float with 17 significant digits; reruns must be byte-comparable.
pub fn float_cell(x: f64) -> String {
    format!("{x:.16e}")
}

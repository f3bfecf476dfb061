use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{PmeError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    /// A prerequisite (such as a certified datum) could not be produced.
    Blocked,
}

/// The acceptance condition a measured number is held to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Limit {
    AtMost { bound: f64 },
    AtLeast { bound: f64 },
    /// `|value - target| <= rel |target|`.
    Relative { target: f64, rel: f64 },
    /// Recorded for context only.
    Info,
}

impl Limit {
    pub fn admits(&self, v: f64) -> bool {
        match *self {
            Limit::AtMost { bound } => v <= bound,
            Limit::AtLeast { bound } => v >= bound,
            Limit::Relative { target, rel } => (v - target).abs() <= rel * target.abs(),
            Limit::Info => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub limit: Limit,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: u8,
    pub label: String,
    pub status: Status,
    pub measurements: Vec<Measurement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn new(criterion: u8, label: impl Into<String>) -> Self {
        Verdict { criterion, label: label.into(), status: Status::Pass, measurements: Vec::new(), note: None }
    }

    pub fn blocked(criterion: u8, label: impl Into<String>, why: impl Into<String>) -> Self {
        Verdict { status: Status::Blocked, note: Some(why.into()), ..Self::new(criterion, label) }
    }

    /// Records a measurement and downgrades the verdict if it is out of bounds.
    pub fn measure(&mut self, name: impl Into<String>, value: f64, limit: Limit) -> bool {
        let ok = limit.admits(value);
        if !ok && self.status == Status::Pass {
            self.status = Status::Fail;
        }
        self.measurements.push(Measurement { name: name.into(), value, limit, ok });
        ok
    }

    pub fn info(&mut self, name: impl Into<String>, value: f64) {
        self.measure(name, value, Limit::Info);
    }

    /// A pass/fail condition without a natural number attached.
    pub fn require(&mut self, name: impl Into<String>, ok: bool) {
        self.measure(name, if ok { 1.0 } else { 0.0 }, Limit::AtLeast { bound: 1.0 });
    }

    pub fn note(&mut self, s: impl Into<String>) {
        let s = s.into();
        self.note = Some(match self.note.take() {
            Some(old) => format!("{old}; {s}"),
            None => s,
        });
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// One line: `criterion 5 [label]: PASS`.
    pub fn summary(&self) -> String {
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Blocked => "BLOCKED",
        };
        let mut s = format!("criterion {} [{}]: {status}", self.criterion, self.label);
        if let Some(n) = &self.note {
            s.push_str(&format!(" ({n})"));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub verdicts: Vec<Verdict>,
    pub files: Vec<PathBuf>,
    /// Wall-clock seconds; the only field that varies between identical runs.
    pub timings: BTreeMap<String, f64>,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        ExperimentReport {
            experiment: config.experiment,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash(),
            config: config.clone(),
            verdicts: Vec::new(),
            files: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(Verdict::passed)
    }

    /// Process exit status for a completed run: 0 if every verdict passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn report_path(&self) -> PathBuf {
        self.config.out_dir.join(format!("{}-report.json", self.experiment))
    }

    /// Writes a CSV series under the output directory and records its path.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
        let mut s = header.join(",");
        s.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        let path = self.config.out_dir.join(name);
        write_atomic(&path, s.as_bytes())?;
        self.files.push(path);
        Ok(())
    }

    pub fn write(&self) -> Result<PathBuf> {
        let path = self.report_path();
        write_atomic(&path, serde_json::to_string_pretty(self)?.as_bytes())?;
        Ok(path)
    }
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| PmeError::Io(e.error))?;
    Ok(())
}

//! Config-driven scenario runs: TOML parsing, matrix presets, the four
//! scenario kinds, parameter sweeps and CSV output.

mod config;
mod output;
mod presets;
mod run;

use std::path::PathBuf;

use serde::Serialize;

pub use config::{
    parse_config, DerivativeModeName, DiagnoseTarget, FeedbackName, MatrixSpec, ScalarFnSpec,
    ScenarioConfig, ScenarioKind, Sweep, SweepParameter, DEFAULT_EPSILON,
};
pub use output::{format_value, sweep_output_path, CsvTable};
pub use presets::{build_initial, build_matrix, build_two_level};
pub use run::{execute, run_scenario, run_sweep, OutputFile, RunOptions, ScenarioOutput};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        message: String,
        line: usize,
        column: usize,
    },
    #[error("invalid `{field}`: {message}")]
    Validation {
        field: &'static str,
        message: String,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Numeric(#[from] crate::Error),
}

impl ScenarioError {
    pub fn validation(field: &'static str, message: impl Into<String>) -> Self {
        ScenarioError::Validation {
            field,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Integration halted at a near-singular state.
    Singularity,
    /// The scalar determinant law exceeded its guard.
    BlowUp,
    /// A non-finite or failed computation; the affected output is empty.
    NumericError,
    UnitarityDefect,
    NearSingular,
    LevelCrossing,
}

impl EventKind {
    /// Events that `--strict` escalates to a failure.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            EventKind::Singularity
                | EventKind::BlowUp
                | EventKind::NumericError
                | EventKind::UnitarityDefect
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub time: Option<f64>,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_index: Option<usize>,
}

impl Event {
    pub(crate) fn new(kind: EventKind, time: Option<f64>, message: impl Into<String>) -> Self {
        Self {
            kind,
            time,
            message: message.into(),
            sweep_index: None,
        }
    }
}

/// Summary of one run or sweep, printed as JSON by the command-line tool.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub scenario: ScenarioKind,
    /// SHA-256 of the canonical JSON form of the validated configuration.
    pub config_hash: String,
    pub wall_time_seconds: f64,
    pub events: Vec<Event>,
    pub outputs: Vec<PathBuf>,
}

impl RunRecord {
    pub fn has_numeric_events(&self) -> bool {
        self.events.iter().any(|e| e.kind.is_numeric())
    }
}

/// Hex SHA-256 of the configuration's canonical JSON serialization.
pub fn config_hash(config: &ScenarioConfig) -> String {
    use sha2::{Digest, Sha256};
    let json = serde_json::to_string(config).expect("configuration serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

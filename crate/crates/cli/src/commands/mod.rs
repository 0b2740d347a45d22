//! One module per subcommand.

use colombeau_core::Result;
use schemars::JsonSchema;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::Overrides;

pub mod aaa;
pub mod classify;
pub mod embed;
pub mod ndds;
pub mod seeley;

pub use aaa::{ComposeConfig, DecomposeConfig};
pub use classify::ClassifyConfig;
pub use embed::EmbedConfig;
pub use ndds::{PrimitiveConfig, SolveConfig, VerifyConfig};
pub use seeley::SeeleyConfig;

/// Result of a pipeline that ran to a verdict.
pub struct Outcome {
    pub passed: bool,
    pub result: serde_json::Value,
    /// Verdict-level failure carried alongside a result.
    pub error: Option<String>,
    /// CSV sidecar.
    pub csv: Option<String>,
}

impl Outcome {
    pub fn new(passed: bool, result: &impl Serialize) -> Self {
        Self {
            passed,
            result: serde_json::to_value(result).expect("report types serialize"),
            error: None,
            csv: None,
        }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.csv = Some(table.to_csv());
        self
    }
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv is utf-8")
    }
}

pub trait Workflow: Serialize + DeserializeOwned + JsonSchema {
    const NAME: &'static str;
    /// Whether `--csv` produces a table.
    const TABLE: bool = true;

    fn apply(&mut self, overrides: &Overrides) -> std::result::Result<(), String>;

    fn run(&self) -> Result<Outcome>;
}

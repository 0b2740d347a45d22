//! Batch front-end: one subcommand per workflow, configured by TOML or JSON
//! files and reporting in JSON.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use colombeau_core::{Error, EvalError};
use schemars::JsonSchema;
use serde::Serialize;

pub mod commands;
pub mod config;

use commands::{
    ClassifyConfig, ComposeConfig, DecomposeConfig, EmbedConfig, PrimitiveConfig, SeeleyConfig, SolveConfig,
    VerifyConfig, Workflow,
};
use config::{Overrides, ScheduleSpec};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(name = "colombeau", version, about = "Numerical workbench for Colombeau generalized functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML configuration, or JSON when the extension is `.json`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON report path; the report goes to standard output otherwise.
    #[arg(long, visible_alias = "report")]
    pub out: Option<PathBuf>,
    /// CSV sidecar path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Parameter schedule as `eps0,ratio,count`.
    #[arg(long)]
    pub schedule: Option<ScheduleSpec>,
    /// Highest seminorm or derivative order.
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Pass/fail tolerance of the subcommand.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Classify a net as moderate, negligible or neither.
    Classify(Common),
    /// Build a Seeley sequence and extend a function from the half-line.
    Seeley {
        #[command(flatten)]
        common: Common,
        /// Sequence length.
        #[arg(long = "L")]
        len: Option<usize>,
    },
    /// Build a mollifier and classify a consistency residual.
    Embed(Common),
    /// Decompose a net into principal and corrective parts.
    Decompose(Common),
    /// Compose a tempered function with a decomposed net.
    Compose {
        #[command(flatten)]
        common: Common,
        /// Seed of the randomized chain-rule checks.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve a hyperbolic linear system with decomposed forcing.
    Solve(Common),
    /// Check a candidate solution of a neutral system.
    Verify(Common),
    /// Tabulate a primitive, optionally split into parts.
    Primitive(Common),
}

#[derive(Serialize)]
struct Report<'a, C: Serialize> {
    command: &'a str,
    config: &'a C,
    passed: bool,
    result: Option<serde_json::Value>,
    error: Option<String>,
}

/// Exit status for an error that stopped a pipeline.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. }
        | Error::InvalidInput(_)
        | Error::Precondition(_)
        | Error::OutOfDomain(_)
        | Error::Eval(EvalError::UnboundParameter(_)) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn execute<W: Workflow>(common: &Common, mut overrides: Overrides) -> i32 {
    overrides.schedule = common.schedule;
    overrides.k_max = common.kmax;
    overrides.tolerance = common.tolerance;
    let mut cfg: W = match config::load(common.config.as_deref()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{}: {msg}", W::NAME);
            return EXIT_USAGE;
        }
    };
    if let Err(msg) = cfg.apply(&overrides) {
        eprintln!("{}: {msg}", W::NAME);
        return EXIT_USAGE;
    }
    if common.csv.is_some() && !W::TABLE {
        eprintln!("{}: --csv is not available, this command produces no table", W::NAME);
        return EXIT_USAGE;
    }
    let (code, report, csv) = match cfg.run() {
        Ok(out) => {
            let code = if out.passed { EXIT_PASS } else { EXIT_FAIL };
            let report = Report {
                command: W::NAME,
                config: &cfg,
                passed: out.passed,
                result: Some(out.result),
                error: out.error,
            };
            (code, report, out.csv)
        }
        Err(e) => {
            let report = Report {
                command: W::NAME,
                config: &cfg,
                passed: false,
                result: None,
                error: Some(e.to_string()),
            };
            (exit_code(&e), report, None)
        }
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    let written = match &common.out {
        Some(path) => write(path, &json),
        None => std::io::stdout().write_all(json.as_bytes()).map_err(|e| e.to_string()),
    };
    let written = written.and_then(|()| match (&common.csv, &csv) {
        (Some(path), Some(text)) => write(path, text),
        _ => Ok(()),
    });
    if let Err(msg) = written {
        eprintln!("{}: {msg}", W::NAME);
        return EXIT_USAGE;
    }
    if let Some(e) = &report.error {
        eprintln!("{}: {e}", W::NAME);
    }
    if common.out.is_some() {
        eprintln!("{}: {}", W::NAME, if report.passed { "pass" } else { "fail" });
    }
    code
}

pub fn run(cli: Cli) -> i32 {
    let none = Overrides::default();
    match cli.command {
        Command::Classify(c) => execute::<ClassifyConfig>(&c, none),
        Command::Seeley { common, len } => execute::<SeeleyConfig>(&common, Overrides { len, ..none }),
        Command::Embed(c) => execute::<EmbedConfig>(&c, none),
        Command::Decompose(c) => execute::<DecomposeConfig>(&c, none),
        Command::Compose { common, seed } => execute::<ComposeConfig>(&common, Overrides { seed, ..none }),
        Command::Solve(c) => execute::<SolveConfig>(&c, none),
        Command::Verify(c) => execute::<VerifyConfig>(&c, none),
        Command::Primitive(c) => execute::<PrimitiveConfig>(&c, none),
    }
}

/// Configuration of every subcommand, keyed by subcommand name.
#[derive(JsonSchema)]
#[allow(dead_code)]
pub struct Configs {
    classify: ClassifyConfig,
    seeley: SeeleyConfig,
    embed: EmbedConfig,
    decompose: DecomposeConfig,
    compose: ComposeConfig,
    solve: SolveConfig,
    verify: VerifyConfig,
    primitive: PrimitiveConfig,
}

/// JSON schema of every configuration file.
pub fn config_schema() -> String {
    let schema = schemars::schema_for!(Configs);
    let mut text = serde_json::to_string_pretty(&schema).expect("schema serializes");
    text.push('\n');
    text
}

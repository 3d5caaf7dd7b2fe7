//! `uca` - unified security assessment scoring from the command line.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 composite below
//! the `--min-score` threshold.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uca_core::config::CONFIG_ENV;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_THRESHOLD: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "uca",
    version,
    about = "Parse, normalize and aggregate security tool reports"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Configuration file (weights, history path, tool command lines)
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Weight profile file; overrides the weights in --config
    #[arg(long, global = true)]
    pub weights: Option<PathBuf>,
    /// Machine-readable JSON output
    #[arg(long, global = true)]
    pub json: bool,
    /// Show where every extracted number came from
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse one report and print its raw metrics and normalized score
    Parse {
        /// Tool that produced the report (lynis, stig, aide, tripwire, cis, nmap, ...)
        #[arg(long)]
        tool: uca_core::ToolKind,
        file: PathBuf,
        /// Firewall state for nmap scans, replacing the filtered-port heuristic
        #[arg(long)]
        firewall: Option<bool>,
    },
    /// Score all six tools listed in a manifest and print the composite
    Score {
        manifest: PathBuf,
        /// Assessment label (defaults to the manifest's label, then its file name)
        #[arg(long)]
        label: Option<String>,
        /// Host label stored with the record
        #[arg(long)]
        host: Option<String>,
        /// Exit with status 3 when the composite is below this value
        #[arg(long)]
        min_score: Option<f64>,
        /// Append the assessment to the history file
        #[arg(long)]
        record: bool,
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Decompose the composite change between two assessments
    Compare {
        /// Manifest, assessment JSON file, or label in the history file
        from: String,
        to: String,
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(long)]
        host: Option<String>,
    },
    /// List stored assessments
    History {
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(long)]
        host: Option<String>,
    },
    /// Render a score table, trends and decomposition for one or more assessments
    Report {
        #[arg(required = true)]
        assessments: Vec<String>,
        #[arg(long, default_value = "markdown")]
        format: uca_core::report::Format,
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(long)]
        host: Option<String>,
    },
    /// Run the configured tools on this host and collect their reports
    Run {
        /// Subset of tools to run (comma separated)
        #[arg(long, value_delimiter = ',')]
        tools: Vec<uca_core::ToolKind>,
        /// Directory for the reports and the generated manifest.toml
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Run tools concurrently
        #[arg(long)]
        parallel: bool,
        /// nmap target host or range
        #[arg(long)]
        target: Option<String>,
    },
    /// Create the AIDE or Tripwire baseline database (once, before hardening)
    InitIntegrityDb {
        /// aide or tripwire
        #[arg(long)]
        tool: uca_core::ToolKind,
        /// Replace an existing database
        #[arg(long)]
        force: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(EXIT_INPUT)
        }
    }
}

/// Joins the error chain, dropping causes whose text the previous link
/// already includes.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if last.contains(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
        last = text;
    }
    out
}

//! Invokes the assessment tools on the local host and captures their reports.
//!
//! Each invocation runs one external command with a timeout. Output goes to
//! `<output>.partial` and is renamed into place only when the command exits
//! with an accepted code, so a failed or timed-out run never leaves a report
//! the parsers could mistake for a complete one.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::model::ToolKind;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(3600);
const POLL_INTERVAL: Duration = Duration::from_millis(20);
const STDERR_TAIL: usize = 2048;

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error("TOOL_NOT_FOUND: `{program}` is not installed or not on PATH")]
    ToolNotFound { program: String },
    #[error("TIMEOUT_EXCEEDED: `{program}` still running after {}s; partial output discarded", timeout.as_secs_f64())]
    TimeoutExceeded { program: String, timeout: Duration },
    #[error("UNEXPECTED_EXIT_CODE: `{program}` exited with {}{}", code.map_or("a signal".to_string(), |c| c.to_string()), if stderr.is_empty() { String::new() } else { format!(": {stderr}") })]
    UnexpectedExitCode {
        program: String,
        code: Option<i32>,
        stderr: String,
    },
    #[error("OUTPUT_MISSING: expected report at {0}")]
    OutputMissing(PathBuf),
    #[error("DUPLICATE_TOOL: {0} appears more than once")]
    DuplicateTool(ToolKind),
    #[error("ALREADY_INITIALIZED: {0} exists; pass force to reinitialize")]
    AlreadyInitialized(PathBuf),
    #[error("INVALID_INVOCATION: {0}")]
    InvalidInvocation(String),
    #[error("IO_FAILURE: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunnerError {
    pub fn code(&self) -> &'static str {
        match self {
            RunnerError::ToolNotFound { .. } => "TOOL_NOT_FOUND",
            RunnerError::TimeoutExceeded { .. } => "TIMEOUT_EXCEEDED",
            RunnerError::UnexpectedExitCode { .. } => "UNEXPECTED_EXIT_CODE",
            RunnerError::OutputMissing(_) => "OUTPUT_MISSING",
            RunnerError::DuplicateTool(_) => "DUPLICATE_TOOL",
            RunnerError::AlreadyInitialized(_) => "ALREADY_INITIALIZED",
            RunnerError::InvalidInvocation(_) => "INVALID_INVOCATION",
            RunnerError::Io { .. } => "IO_FAILURE",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunnerError + '_ {
    move |source| RunnerError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One tool run.
///
/// `command_template` is split shell-style into words. `{output}` in a word
/// is replaced by the path the tool should write its report to; a template
/// without `{output}` has its standard output captured as the report.
/// Other `{name}` placeholders come from `vars`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolInvocation {
    pub tool: ToolKind,
    pub command_template: String,
    pub timeout: Duration,
    pub output_path: PathBuf,
    pub accepted_exit_codes: BTreeSet<i32>,
    pub vars: BTreeMap<String, String>,
}

impl ToolInvocation {
    pub fn new(
        tool: ToolKind,
        command_template: impl Into<String>,
        output_path: impl Into<PathBuf>,
    ) -> Self {
        ToolInvocation {
            tool,
            command_template: command_template.into(),
            timeout: DEFAULT_TIMEOUT,
            output_path: output_path.into(),
            accepted_exit_codes: BTreeSet::from([0]),
            vars: BTreeMap::new(),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_exit_codes(mut self, codes: impl IntoIterator<Item = i32>) -> Self {
        self.accepted_exit_codes = codes.into_iter().collect();
        self
    }

    pub fn with_var(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.vars.insert(name.into(), value.into());
        self
    }

    fn partial_path(&self) -> PathBuf {
        let mut s = self.output_path.clone().into_os_string();
        s.push(".partial");
        PathBuf::from(s)
    }
}

/// Expands the template into argv. Returns whether `{output}` was used.
fn expand(
    template: &str,
    vars: &BTreeMap<String, String>,
    output: &Path,
) -> Result<(Vec<String>, bool), RunnerError> {
    let words = shell_words::split(template)
        .map_err(|e| RunnerError::InvalidInvocation(format!("{template:?}: {e}")))?;
    if words.is_empty() {
        return Err(RunnerError::InvalidInvocation("empty command".into()));
    }
    let mut uses_output = false;
    let mut argv = Vec::with_capacity(words.len());
    for word in words {
        let mut expanded = String::new();
        let mut rest = word.as_str();
        while let Some(open) = rest.find('{') {
            let Some(close) = rest[open..].find('}') else {
                break;
            };
            let name = &rest[open + 1..open + close];
            expanded.push_str(&rest[..open]);
            if name == "output" {
                uses_output = true;
                expanded.push_str(&output.to_string_lossy());
            } else if let Some(v) = vars.get(name) {
                expanded.push_str(v);
            } else {
                return Err(RunnerError::InvalidInvocation(format!(
                    "no value for placeholder {{{name}}} in {template:?}"
                )));
            }
            rest = &rest[open + close + 1..];
        }
        expanded.push_str(rest);
        argv.push(expanded);
    }
    Ok((argv, uses_output))
}

/// Runs argv to completion or timeout. Returns the exit status.
fn run_command(
    argv: &[String],
    stdout: Stdio,
    timeout: Duration,
    accepted: &BTreeSet<i32>,
) -> Result<ExitStatus, RunnerError> {
    let program = argv[0].clone();
    let mut child = Command::new(&program)
        .args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(stdout)
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => RunnerError::ToolNotFound {
                program: program.clone(),
            },
            _ => RunnerError::Io {
                path: PathBuf::from(&program),
                source: e,
            },
        })?;

    let mut stderr = child.stderr.take().expect("stderr piped");
    let reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stderr.read_to_end(&mut buf);
        buf
    });

    let deadline = Instant::now() + timeout;
    let status = loop {
        match child.try_wait().map_err(io_err(Path::new(&program)))? {
            Some(status) => break status,
            None if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                // Grandchildren may still hold stderr open; the reader is left detached.
                return Err(RunnerError::TimeoutExceeded { program, timeout });
            }
            None => thread::sleep(POLL_INTERVAL.min(deadline - Instant::now())),
        }
    };

    let stderr = reader.join().unwrap_or_default();
    match status.code() {
        Some(code) if accepted.contains(&code) => Ok(status),
        code => {
            let text = String::from_utf8_lossy(&stderr);
            let text = text.trim();
            let tail = match text.char_indices().rev().nth(STDERR_TAIL) {
                Some((i, _)) => &text[i..],
                None => text,
            };
            Err(RunnerError::UnexpectedExitCode {
                program,
                code,
                stderr: tail.to_string(),
            })
        }
    }
}

/// Result of a successful tool run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvocationOutcome {
    pub tool: ToolKind,
    pub report_path: PathBuf,
    pub exit_code: i32,
    pub elapsed: Duration,
}

pub fn invoke_tool(invocation: &ToolInvocation) -> Result<InvocationOutcome, RunnerError> {
    if invocation.timeout.is_zero() {
        return Err(RunnerError::InvalidInvocation(
            "timeout must be positive".into(),
        ));
    }
    let partial = invocation.partial_path();
    let (argv, uses_output) = expand(&invocation.command_template, &invocation.vars, &partial)?;

    if let Some(parent) = invocation
        .output_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
    {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    if partial.exists() {
        std::fs::remove_file(&partial).map_err(io_err(&partial))?;
    }

    let stdout = if uses_output {
        Stdio::null()
    } else {
        Stdio::from(File::create(&partial).map_err(io_err(&partial))?)
    };

    log::info!("{}: running {:?}", invocation.tool, argv);
    let started = Instant::now();
    let result = run_command(
        &argv,
        stdout,
        invocation.timeout,
        &invocation.accepted_exit_codes,
    );
    let status = match result {
        Ok(s) => s,
        Err(e) => {
            let _ = std::fs::remove_file(&partial);
            return Err(e);
        }
    };

    let written = std::fs::metadata(&partial)
        .map(|m| m.len() > 0)
        .unwrap_or(false);
    if !written {
        let _ = std::fs::remove_file(&partial);
        return Err(RunnerError::OutputMissing(invocation.output_path.clone()));
    }
    std::fs::rename(&partial, &invocation.output_path).map_err(io_err(&invocation.output_path))?;

    Ok(InvocationOutcome {
        tool: invocation.tool,
        report_path: invocation.output_path.clone(),
        exit_code: status.code().unwrap_or_default(),
        elapsed: started.elapsed(),
    })
}

/// Successes and failures of one orchestrated scan, keyed by tool.
#[derive(Debug, Default)]
pub struct ScanOutcome {
    pub reports: BTreeMap<ToolKind, InvocationOutcome>,
    pub failures: Vec<(ToolKind, RunnerError)>,
}

impl ScanOutcome {
    pub fn report_paths(&self) -> BTreeMap<ToolKind, PathBuf> {
        self.reports
            .iter()
            .map(|(&t, o)| (t, o.report_path.clone()))
            .collect()
    }
}

/// Runs every invocation; one tool failing does not stop the others.
/// Sequential unless `parallel` is set.
pub fn orchestrate_scan(
    invocations: &[ToolInvocation],
    parallel: bool,
) -> Result<ScanOutcome, RunnerError> {
    let mut seen = BTreeSet::new();
    for inv in invocations {
        if !seen.insert(inv.tool) {
            return Err(RunnerError::DuplicateTool(inv.tool));
        }
    }

    let results: Vec<(ToolKind, Result<InvocationOutcome, RunnerError>)> = if parallel {
        thread::scope(|s| {
            let handles: Vec<_> = invocations
                .iter()
                .map(|inv| (inv.tool, s.spawn(move || invoke_tool(inv))))
                .collect();
            handles
                .into_iter()
                .map(|(t, h)| {
                    let r = h.join().unwrap_or_else(|_| {
                        Err(RunnerError::InvalidInvocation(format!(
                            "{t} runner thread panicked"
                        )))
                    });
                    (t, r)
                })
                .collect()
        })
    } else {
        invocations
            .iter()
            .map(|inv| (inv.tool, invoke_tool(inv)))
            .collect()
    };

    let mut outcome = ScanOutcome::default();
    for (tool, r) in results {
        match r {
            Ok(o) => {
                outcome.reports.insert(tool, o);
            }
            Err(e) => {
                log::warn!("{tool}: {e}");
                outcome.failures.push((tool, e));
            }
        }
    }
    outcome.failures.sort_by_key(|(t, _)| *t);
    Ok(outcome)
}

/// One-time creation of a file-integrity baseline database.
///
/// The database is meant to be built once on the unmodified system; later
/// checks measure drift from it. Refuses to overwrite an existing database
/// unless forced.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrityInit {
    pub tool: ToolKind,
    pub command_template: String,
    pub database: PathBuf,
    /// Where the tool writes the new database, if not directly to `database`
    /// (AIDE writes `aide.db.new`).
    pub promote_from: Option<PathBuf>,
    pub timeout: Duration,
    pub accepted_exit_codes: BTreeSet<i32>,
}

pub fn init_integrity_db(init: &IntegrityInit, force: bool) -> Result<PathBuf, RunnerError> {
    if !matches!(init.tool, ToolKind::Aide | ToolKind::Tripwire) {
        return Err(RunnerError::InvalidInvocation(format!(
            "{} has no integrity database",
            init.tool
        )));
    }
    if init.timeout.is_zero() {
        return Err(RunnerError::InvalidInvocation(
            "timeout must be positive".into(),
        ));
    }
    if init.database.exists() && !force {
        return Err(RunnerError::AlreadyInitialized(init.database.clone()));
    }
    let (argv, _) = expand(&init.command_template, &BTreeMap::new(), &init.database)?;
    log::info!("{}: initializing database with {:?}", init.tool, argv);
    run_command(
        &argv,
        Stdio::null(),
        init.timeout,
        &init.accepted_exit_codes,
    )?;

    if let Some(src) = init.promote_from.as_ref().filter(|p| p.exists()) {
        std::fs::rename(src, &init.database).map_err(io_err(&init.database))?;
    }
    if !init.database.exists() {
        return Err(RunnerError::OutputMissing(init.database.clone()));
    }
    Ok(init.database.clone())
}

/// Command line used for `tool` unless configuration overrides it.
pub fn default_command(tool: ToolKind) -> &'static str {
    match tool {
        ToolKind::Lynis => "lynis audit system --quiet --no-colors --report-file {output}",
        ToolKind::OpenscapStandard => {
            "oscap xccdf eval --profile xccdf_org.ssgproject.content_profile_stig --results {output} {datastream}"
        }
        ToolKind::OpenscapCis => {
            "oscap xccdf eval --profile xccdf_org.ssgproject.content_profile_cis_level1_server --results {output} {datastream}"
        }
        ToolKind::Aide => "aide --check",
        ToolKind::Tripwire => "tripwire --check",
        ToolKind::VulnScan => "nmap -sV -p- --script vuln,vulners -oX {output} {target}",
    }
}

/// Exit codes that still mean the scan completed.
///
/// `oscap` returns 2 when any rule failed; AIDE and Tripwire return a bitmask
/// of added/removed/changed (1|2|4) when they detect changes.
pub fn default_exit_codes(tool: ToolKind) -> BTreeSet<i32> {
    match tool {
        ToolKind::Lynis | ToolKind::VulnScan => BTreeSet::from([0]),
        ToolKind::OpenscapStandard | ToolKind::OpenscapCis => BTreeSet::from([0, 2]),
        ToolKind::Aide | ToolKind::Tripwire => (0..=7).collect(),
    }
}

pub fn default_report_name(tool: ToolKind) -> &'static str {
    match tool {
        ToolKind::Lynis => "lynis-report.dat",
        ToolKind::OpenscapStandard => "openscap-standard.xml",
        ToolKind::OpenscapCis => "openscap-cis.xml",
        ToolKind::Aide => "aide-check.txt",
        ToolKind::Tripwire => "tripwire-check.txt",
        ToolKind::VulnScan => "nmap.xml",
    }
}

pub const DEFAULT_DATASTREAM: &str = "/usr/share/xml/scap/ssg/content/ssg-ubuntu2204-ds.xml";
pub const DEFAULT_TARGET: &str = "127.0.0.1";

/// Default invocation for `tool`, writing into `output_dir`.
pub fn default_invocation(tool: ToolKind, output_dir: &Path) -> ToolInvocation {
    ToolInvocation {
        tool,
        command_template: default_command(tool).to_string(),
        timeout: DEFAULT_TIMEOUT,
        output_path: output_dir.join(default_report_name(tool)),
        accepted_exit_codes: default_exit_codes(tool),
        vars: BTreeMap::from([
            ("target".to_string(), DEFAULT_TARGET.to_string()),
            ("datastream".to_string(), DEFAULT_DATASTREAM.to_string()),
        ]),
    }
}

pub fn default_integrity_init(tool: ToolKind) -> Option<IntegrityInit> {
    match tool {
        ToolKind::Aide => Some(IntegrityInit {
            tool,
            command_template: "aide --init".into(),
            database: PathBuf::from("/var/lib/aide/aide.db"),
            promote_from: Some(PathBuf::from("/var/lib/aide/aide.db.new")),
            timeout: DEFAULT_TIMEOUT,
            accepted_exit_codes: BTreeSet::from([0]),
        }),
        ToolKind::Tripwire => Some(IntegrityInit {
            tool,
            command_template: "tripwire --init".into(),
            database: PathBuf::from("/var/lib/tripwire/tripwire.twd"),
            promote_from: None,
            timeout: DEFAULT_TIMEOUT,
            accepted_exit_codes: BTreeSet::from([0]),
        }),
        _ => None,
    }
}

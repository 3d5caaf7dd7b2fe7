use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chrono::SecondsFormat;
use serde::Serialize;
use uca_core::analysis::{decompose_delta, rank_contributions};
use uca_core::config::Config;
use uca_core::manifest::{Manifest, ManifestEntry};
use uca_core::model::{CompositeAssessment, RawToolReport, ToolKind, WeightProfile};
use uca_core::parsers::{self, ParseDiagnostics, ParseOptions};
use uca_core::report::{self, Format, Report};
use uca_core::runner;
use uca_core::scoring;
use uca_core::store::{self, HistoryRecord};

use crate::{Cli, Command, GlobalOpts, EXIT_OK, EXIT_THRESHOLD};

const DEFAULT_HOST: &str = "localhost";

struct Session {
    global: GlobalOpts,
    config: Config,
}

impl Session {
    fn load(global: GlobalOpts) -> Result<Self> {
        let config = match &global.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        Ok(Session { global, config })
    }

    fn profile(&self) -> Result<WeightProfile> {
        match &self.global.weights {
            Some(p) => Ok(Config::load(p)?.weight_profile()?),
            None => Ok(self.config.weight_profile()?),
        }
    }

    fn history_path(&self, flag: Option<PathBuf>) -> Option<PathBuf> {
        flag.or_else(|| self.config.history_path().map(Path::to_path_buf))
    }
}

pub fn run(cli: Cli) -> Result<u8> {
    let ctx = Session::load(cli.global)?;
    match cli.command {
        Command::Parse {
            tool,
            file,
            firewall,
        } => cmd_parse(&ctx, tool, &file, firewall),
        Command::Score {
            manifest,
            label,
            host,
            min_score,
            record,
            history,
        } => cmd_score(&ctx, &manifest, label, host, min_score, record, history),
        Command::Compare {
            from,
            to,
            history,
            host,
        } => cmd_compare(&ctx, &from, &to, history, host.as_deref()),
        Command::History { history, host } => cmd_history(&ctx, history, host.as_deref()),
        Command::Report {
            assessments,
            format,
            history,
            host,
        } => cmd_report(&ctx, &assessments, format, history, host.as_deref()),
        Command::Run {
            tools,
            output_dir,
            parallel,
            target,
        } => cmd_run(&ctx, &tools, output_dir, parallel, target),
        Command::InitIntegrityDb { tool, force } => cmd_init_db(&ctx, tool, force),
    }
}

fn describe_raw(raw: &RawToolReport) -> String {
    match raw {
        RawToolReport::Lynis(r) => format!("hardening_index {}", r.hardening_index),
        RawToolReport::Scap(r) => format!(
            "pass {}, fail {} (evaluated {})",
            r.pass_count,
            r.fail_count,
            r.pass_count + r.fail_count
        ),
        RawToolReport::Aide(r) => format!(
            "added {}, removed {}, changed {}, V_total {}",
            r.added,
            r.removed,
            r.changed,
            r.total()
        ),
        RawToolReport::Tripwire(r) => format!(
            "objects scanned {}, violations {}",
            r.objects_scanned, r.violations
        ),
        RawToolReport::Vuln(r) => format!(
            "open ports {}, filtered ports {}, firewall {}, findings {}, confirmed {}",
            r.open_ports,
            r.filtered_ports,
            if r.firewall_active {
                "active"
            } else {
                "inactive"
            },
            r.findings.len(),
            r.confirmed_count
        ),
    }
}

fn print_diagnostics(diag: &ParseDiagnostics, verbose: bool) {
    if verbose {
        for p in &diag.provenance {
            eprintln!("  {}: {p}", diag.source_path);
        }
    }
    for (what, n) in &diag.excluded {
        eprintln!("  {}: excluded {n} `{what}` results", diag.source_path);
    }
}

#[derive(Serialize)]
struct ParseOutput<'a> {
    tool: ToolKind,
    source: &'a str,
    raw: &'a RawToolReport,
    score: f64,
    diagnostics: &'a ParseDiagnostics,
}

fn cmd_parse(ctx: &Session, tool: ToolKind, file: &Path, firewall: Option<bool>) -> Result<u8> {
    let profile = ctx.profile()?;
    let parsed = parsers::parse_file(
        tool,
        file,
        ParseOptions {
            firewall_override: firewall,
        },
    )
    .with_context(|| format!("{}", file.display()))?;
    let score = scoring::normalize(&parsed.report, &profile)
        .with_context(|| format!("{}", file.display()))?;

    if ctx.global.json {
        let out = ParseOutput {
            tool,
            source: &parsed.diagnostics.source_path,
            raw: &parsed.report,
            score: score.value,
            diagnostics: &parsed.diagnostics,
        };
        println!("{}", serde_json::to_string(&out)?);
    } else {
        print_diagnostics(&parsed.diagnostics, ctx.global.verbose);
        println!("tool: {tool}");
        println!("source: {}", file.display());
        println!("raw: {}", describe_raw(&parsed.report));
        if let RawToolReport::Vuln(v) = &parsed.report {
            for f in &v.findings {
                println!(
                    "  finding {} {}{}{}",
                    f.identifier,
                    f.severity,
                    f.cvss.map(|c| format!(" cvss {c}")).unwrap_or_default(),
                    if f.confirmed { " confirmed" } else { "" }
                );
            }
        }
        println!("score: {}", report::score(score.value));
    }
    Ok(EXIT_OK)
}

fn score_manifest(
    ctx: &Session,
    path: &Path,
    label: Option<String>,
) -> Result<(CompositeAssessment, Option<String>)> {
    let profile = ctx.profile()?;
    let manifest = Manifest::load(path)?;
    let scored = manifest.score(&profile)?;
    for d in &scored.diagnostics {
        print_diagnostics(d, ctx.global.verbose);
    }
    let label = label
        .or_else(|| manifest.label.clone())
        .unwrap_or_else(|| file_stem(path));
    let assessment = scoring::aggregate(&scored.scores, &profile, &label)?;
    Ok((assessment, manifest.host))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "assessment".into())
}

fn cmd_score(
    ctx: &Session,
    manifest: &Path,
    label: Option<String>,
    host: Option<String>,
    min_score: Option<f64>,
    record: bool,
    history: Option<PathBuf>,
) -> Result<u8> {
    let (assessment, manifest_host) = score_manifest(ctx, manifest, label)?;
    let host = host
        .or(manifest_host)
        .unwrap_or_else(|| DEFAULT_HOST.into());
    let rec = HistoryRecord::new(host, assessment);

    if record {
        let path = ctx
            .history_path(history)
            .ok_or_else(|| anyhow!("--record needs --history or a [history] path in the config"))?;
        store::append_record(&path, &rec)?;
        log::info!("appended {} to {}", rec.assessment.label, path.display());
    }

    if ctx.global.json {
        println!("{}", serde_json::to_string(&rec)?);
    } else {
        print!("{}", report::assessment_text(&rec.assessment));
    }

    if let Some(min) = min_score {
        if rec.assessment.composite < min {
            eprintln!(
                "threshold: composite {} is below --min-score {}",
                report::score(rec.assessment.composite),
                report::score(min)
            );
            return Ok(EXIT_THRESHOLD);
        }
    }
    Ok(EXIT_OK)
}

/// Finds an assessment by manifest path, JSON file, or stored label.
fn resolve(
    ctx: &Session,
    arg: &str,
    history: Option<&Path>,
    host: Option<&str>,
) -> Result<CompositeAssessment> {
    let path = Path::new(arg);
    if path.is_file() {
        if path.extension().is_some_and(|e| e == "toml") {
            return Ok(score_manifest(ctx, path, None)?.0);
        }
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        if let Ok(rec) = serde_json::from_str::<HistoryRecord>(&text) {
            return Ok(rec.assessment);
        }
        if let Ok(a) = serde_json::from_str::<CompositeAssessment>(&text) {
            return Ok(a);
        }
        let h = store::load_history(path, host)?;
        return h
            .records
            .into_iter()
            .last()
            .map(|r| r.assessment)
            .ok_or_else(|| anyhow!("{}: no assessment found", path.display()));
    }

    let Some(history) = history else {
        bail!("`{arg}` is not a file and no history file is configured to look it up");
    };
    let h = store::load_history(history, host)?;
    h.records
        .into_iter()
        .rev()
        .find(|r| r.assessment.label == arg)
        .map(|r| r.assessment)
        .ok_or_else(|| anyhow!("unknown assessment label `{arg}` in {}", history.display()))
}

#[derive(Serialize)]
struct CompareOutput {
    decomposition: uca_core::DeltaDecomposition,
    ranked: Vec<uca_core::analysis::RankedContribution>,
}

fn cmd_compare(
    ctx: &Session,
    from: &str,
    to: &str,
    history: Option<PathBuf>,
    host: Option<&str>,
) -> Result<u8> {
    let history = ctx.history_path(history);
    let a = resolve(ctx, from, history.as_deref(), host)?;
    let b = resolve(ctx, to, history.as_deref(), host)?;
    let d = decompose_delta(&a, &b)?;
    if ctx.global.json {
        let ranked = rank_contributions(&d);
        let out = CompareOutput {
            decomposition: d,
            ranked,
        };
        println!("{}", serde_json::to_string(&out)?);
    } else {
        print!("{}", report::decomposition_text(&d));
    }
    Ok(EXIT_OK)
}

fn cmd_history(ctx: &Session, history: Option<PathBuf>, host: Option<&str>) -> Result<u8> {
    let path = ctx
        .history_path(history)
        .ok_or_else(|| anyhow!("no history file: pass --history or set [history] path"))?;
    let h = store::load_history(&path, host)?;
    if h.skipped > 0 {
        eprintln!(
            "warning: skipped {} unreadable line(s) in {}",
            h.skipped,
            path.display()
        );
    }
    for r in &h.records {
        if ctx.global.json {
            println!("{}", serde_json::to_string(r)?);
        } else {
            println!(
                "{}  {:<16} {:<12} {}",
                r.assessment
                    .timestamp
                    .to_rfc3339_opts(SecondsFormat::Secs, true),
                r.host_label,
                r.assessment.label,
                report::score(r.assessment.composite)
            );
        }
    }
    Ok(EXIT_OK)
}

fn cmd_report(
    ctx: &Session,
    args: &[String],
    format: Format,
    history: Option<PathBuf>,
    host: Option<&str>,
) -> Result<u8> {
    let history = ctx.history_path(history);
    let assessments = args
        .iter()
        .map(|a| resolve(ctx, a, history.as_deref(), host))
        .collect::<Result<Vec<_>>>()?;
    let format = if ctx.global.json {
        Format::Json
    } else {
        format
    };
    print!("{}", Report::build(assessments)?.render(format));
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RunOutput {
    reports: Vec<(ToolKind, PathBuf)>,
    failures: Vec<(ToolKind, String)>,
    manifest: Option<PathBuf>,
}

fn cmd_run(
    ctx: &Session,
    tools: &[ToolKind],
    output_dir: Option<PathBuf>,
    parallel: bool,
    target: Option<String>,
) -> Result<u8> {
    let output_dir = output_dir
        .or_else(|| ctx.config.output_dir())
        .unwrap_or_else(|| PathBuf::from("uca-reports"));
    let only = (!tools.is_empty()).then_some(tools);
    let mut invocations = ctx.config.invocations(&output_dir, only);
    if let Some(t) = target {
        for inv in &mut invocations {
            inv.vars.insert("target".into(), t.clone());
        }
    }
    let outcome = runner::orchestrate_scan(&invocations, parallel || ctx.config.parallel())?;

    let manifest_path = if outcome.reports.is_empty() {
        None
    } else {
        let mut m = Manifest::default();
        for (&tool, o) in &outcome.reports {
            let rel = o
                .report_path
                .strip_prefix(&output_dir)
                .unwrap_or(&o.report_path)
                .to_path_buf();
            m.tools.insert(tool, ManifestEntry::Path(rel));
        }
        let p = output_dir.join("manifest.toml");
        std::fs::write(&p, m.to_toml()).with_context(|| format!("writing {}", p.display()))?;
        Some(p)
    };

    if ctx.global.json {
        let out = RunOutput {
            reports: outcome.report_paths().into_iter().collect(),
            failures: outcome
                .failures
                .iter()
                .map(|(t, e)| (*t, e.to_string()))
                .collect(),
            manifest: manifest_path,
        };
        println!("{}", serde_json::to_string(&out)?);
    } else {
        for (tool, o) in &outcome.reports {
            println!(
                "{tool}: {} (exit {}, {:.1}s)",
                o.report_path.display(),
                o.exit_code,
                o.elapsed.as_secs_f64()
            );
        }
        for (tool, e) in &outcome.failures {
            println!("{tool}: FAILED {e}");
        }
        if let Some(p) = &manifest_path {
            println!("manifest: {}", p.display());
        }
    }
    Ok(if outcome.failures.is_empty() {
        EXIT_OK
    } else {
        crate::EXIT_INPUT
    })
}

fn cmd_init_db(ctx: &Session, tool: ToolKind, force: bool) -> Result<u8> {
    let init = ctx
        .config
        .integrity_init(tool)
        .ok_or_else(|| anyhow!("{tool} has no integrity database"))?;
    let db = runner::init_integrity_db(&init, force)?;
    println!("{tool}: baseline database at {}", db.display());
    Ok(EXIT_OK)
}

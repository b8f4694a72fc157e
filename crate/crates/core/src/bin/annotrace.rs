use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use annotrace::commands;
use annotrace::crossdb::MergeGroup;
use annotrace::manifest::{ingest_manifest, IngestOutcome, Manifest};
use annotrace::metrics::ReleaseSelector;
use annotrace::model::DatabaseId;
use annotrace::patterns::PatternLabel;
use annotrace::report::{OutputFormat, Payload, Report};
use annotrace::store::Workspace;
use annotrace::synth::{generate, GeneratorSpec};
use annotrace::Error;

/// Sentence reuse and propagation patterns across database releases.
#[derive(Parser)]
#[command(name = "annotrace", version)]
struct Cli {
    /// Workspace directory.
    #[arg(long, global = true, env = "ANNOTRACE_WORKSPACE")]
    workspace: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    format: Format,

    /// Suppress progress messages on standard error.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Selector {
    Latest,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Label {
    All,
    Transient,
    PossiblyTransient,
    MissingOrigin,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Partition,
    Patterns,
}

#[derive(Subcommand)]
enum Command {
    /// Register and ingest every release listed in a manifest.
    Ingest { manifest: PathBuf },
    /// Total, unique and singleton sentence counts per release.
    Stats {
        #[arg(long = "database")]
        databases: Vec<DatabaseId>,
        #[arg(long, value_enum, default_value_t = Selector::Latest)]
        release: Selector,
    },
    /// Within-database propagation patterns.
    Patterns {
        #[arg(long = "database")]
        databases: Vec<DatabaseId>,
        #[arg(long, value_enum, default_value_t = Label::All)]
        label: Label,
        /// Scan several databases sharing one calendar as one, e.g. uniprotkb=swissprot,trembl.
        #[arg(long)]
        merged: Option<MergeGroup>,
    },
    /// Sentence sharing and propagation across databases.
    Crossdb {
        /// Treat databases as one group, e.g. uniprotkb=swissprot,trembl.
        #[arg(long = "merge")]
        merges: Vec<MergeGroup>,
        #[arg(long, value_enum, default_value_t = Mode::Partition)]
        mode: Mode,
        /// Only instances originating in this group.
        #[arg(long)]
        origin: Option<String>,
        /// Only destinations among these groups (needs --origin).
        #[arg(long = "destination", requires = "origin")]
        destinations: Vec<String>,
    },
    /// Presence history of one sentence, given as text or fingerprint.
    Timeline {
        sentence: String,
        #[arg(long = "merge")]
        merges: Vec<MergeGroup>,
        /// Emit one (date, present) step series per record.
        #[arg(long)]
        chart: bool,
    },
    /// Check the workspace files against each other.
    Integrity,
    /// Generate a synthetic corpus with planted patterns.
    Synth {
        /// Generator spec (TOML).
        spec: PathBuf,
        /// Output directory for release files, manifest.toml and truth.json.
        #[arg(long)]
        out: PathBuf,
        /// Also ingest the generated manifest into the workspace.
        #[arg(long)]
        ingest: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("annotrace: {e}");
            ExitCode::FAILURE
        }
    }
}

fn workspace_path(cli: &Cli) -> Result<&Path, Error> {
    cli.workspace
        .as_deref()
        .ok_or_else(|| Error::NotFound("workspace path (use --workspace or ANNOTRACE_WORKSPACE)".into()))
}

/// Runs one command and prints its report; `Ok(false)` means the command
/// completed but found problems.
fn run(cli: &Cli) -> Result<bool, Error> {
    let mut params: Vec<(String, String)> = Vec::new();
    let mut ok = true;
    let (command, ws_id, payload) = match &cli.command {
        Command::Ingest { manifest } => {
            params.push(("manifest".into(), manifest.display().to_string()));
            let m = Manifest::load(manifest)?;
            let mut ws = Workspace::open_or_create(workspace_path(cli)?)?;
            let quiet = cli.quiet;
            let mut done = Vec::new();
            let result = ingest_manifest(&mut ws, &m, |o| {
                if !quiet {
                    progress(o);
                }
                done.push(o.clone());
            });
            if let Err(e) = result {
                if !quiet && !done.is_empty() {
                    eprintln!("annotrace: {} release(s) were ingested before the error", done.len());
                }
                return Err(e);
            }
            ("ingest", Some(ws.id().to_owned()), commands::ingest(&done))
        }
        Command::Stats { databases, release } => {
            let ws = Workspace::open(workspace_path(cli)?)?;
            let selector = match release {
                Selector::Latest => ReleaseSelector::Latest,
                Selector::All => ReleaseSelector::All,
            };
            params.extend(databases.iter().map(|d| ("database".into(), d.to_string())));
            params.push(("release".into(), release_name(*release).into()));
            ("stats", Some(ws.id().to_owned()), commands::stats(&ws, databases, selector)?)
        }
        Command::Patterns { databases, label, merged } => {
            let ws = Workspace::open(workspace_path(cli)?)?;
            let label = match label {
                Label::All => None,
                Label::Transient => Some(PatternLabel::Transient),
                Label::PossiblyTransient => Some(PatternLabel::PossiblyTransient),
                Label::MissingOrigin => Some(PatternLabel::MissingOrigin),
            };
            params.extend(databases.iter().map(|d| ("database".into(), d.to_string())));
            params.push(("label".into(), label.map_or("all", PatternLabel::name).into()));
            if let Some(g) = merged {
                params.push(("merged".into(), g.to_string()));
            }
            let payload = commands::patterns(&ws, databases, label, merged.as_ref())?;
            ("patterns", Some(ws.id().to_owned()), payload)
        }
        Command::Crossdb {
            merges,
            mode,
            origin,
            destinations,
        } => {
            let ws = Workspace::open(workspace_path(cli)?)?;
            params.extend(merges.iter().map(|m| ("merge".into(), m.to_string())));
            let payload = match mode {
                Mode::Partition => {
                    params.push(("mode".into(), "partition".into()));
                    commands::partition(&ws, merges)?
                }
                Mode::Patterns => {
                    params.push(("mode".into(), "patterns".into()));
                    if let Some(o) = origin {
                        params.push(("origin".into(), o.clone()));
                    }
                    params.extend(destinations.iter().map(|d| ("destination".into(), d.clone())));
                    commands::cross_patterns(&ws, merges, origin.as_deref(), destinations)?
                }
            };
            ("crossdb", Some(ws.id().to_owned()), payload)
        }
        Command::Timeline { sentence, merges, chart } => {
            let ws = Workspace::open(workspace_path(cli)?)?;
            params.push(("sentence".into(), sentence.clone()));
            params.extend(merges.iter().map(|m| ("merge".into(), m.to_string())));
            params.push(("chart".into(), chart.to_string()));
            ("timeline", Some(ws.id().to_owned()), commands::timeline(&ws, merges, sentence, *chart)?)
        }
        Command::Integrity => {
            let ws = Workspace::open(workspace_path(cli)?)?;
            let (payload, healthy) = commands::integrity(&ws)?;
            if !healthy {
                if !cli.quiet {
                    eprintln!("annotrace: integrity problems found");
                }
                ok = false;
            }
            ("integrity", Some(ws.id().to_owned()), payload)
        }
        Command::Synth { spec, out, ingest } => {
            params.push(("spec".into(), spec.display().to_string()));
            params.push(("out".into(), out.display().to_string()));
            let text = std::fs::read_to_string(spec).map_err(|e| Error::Io {
                path: spec.clone(),
                source: e,
            })?;
            let generated = generate(&GeneratorSpec::from_toml(&text)?)?;
            let manifest = generated.write(out)?;
            let mut ws_id = None;
            if *ingest {
                let mut ws = Workspace::open_or_create(workspace_path(cli)?)?;
                let quiet = cli.quiet;
                ingest_manifest(&mut ws, &Manifest::load(&manifest)?, |o| {
                    if !quiet {
                        progress(o)
                    }
                })?;
                ws_id = Some(ws.id().to_owned());
            }
            ("synth", ws_id, commands::synth(&generated))
        }
    };
    emit(cli, command, ws_id.as_deref(), params, payload)?;
    Ok(ok)
}

fn release_name(s: Selector) -> &'static str {
    match s {
        Selector::Latest => "latest",
        Selector::All => "all",
    }
}

fn progress(o: &IngestOutcome) {
    match o {
        IngestOutcome::Ingested(s) => {
            let r = s.release.as_ref().expect("summaries name their release");
            eprintln!("ingested {r}: {} records, {} occurrences", s.records, s.occurrences);
        }
        IngestOutcome::Skipped(r) => eprintln!("skipped {r}: already ingested"),
    }
}

fn emit(cli: &Cli, command: &str, ws: Option<&str>, params: Vec<(String, String)>, payload: Payload) -> Result<(), Error> {
    let format = match cli.format {
        Format::Tsv => OutputFormat::Tsv,
        Format::Json => OutputFormat::Json,
    };
    let text = Report::new(command, ws, params, payload).render(format);
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

//! Command-line and HTTP front ends for the `recallm` engine.

pub mod config;
pub mod server;

use std::ffi::OsString;
use std::io::{BufRead, Read, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use recallm::bench::{
    export_blind_grading, import_grades, run_temporal_bench, BenchConfig, SystemId, TemporalDataset,
};
use recallm::provider::{ChatProvider, RemoteProvider, ScriptedProvider};
use recallm::update::ProviderReviser;
use recallm::vecstore::Embedder;
use recallm::{AskMode, BenchReport, Engine};

use config::{EmbeddingKind, Overrides, ProviderKind, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "recallm", version, about = "Temporal concept-graph memory")]
pub struct Cli {
    /// TOML config file (default: ./recallm.toml when present).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory holding the graph and vector snapshots.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Chat backend: none, echo or remote.
    #[arg(long, global = true)]
    provider: Option<ProviderKind>,
    /// Base URL of a chat-completions endpoint.
    #[arg(long, global = true)]
    api_base: Option<String>,
    #[arg(long, global = true)]
    model: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Add knowledge, one update per line (or one per input with --document).
    Ingest {
        /// Input file, or `-` for stdin.
        input: String,
        #[arg(long)]
        document: bool,
    },
    /// Answer a question and print the trace as JSON.
    Ask {
        question: String,
        #[arg(long, default_value = "graph")]
        mode: AskMode,
        /// Print only the answer (or the assembled context when there is none).
        #[arg(long)]
        plain: bool,
    },
    /// Interactive loop: plain lines are knowledge, lines starting with `?` are questions.
    Repl {
        #[arg(long, default_value = "graph")]
        mode: AskMode,
    },
    #[command(subcommand)]
    Bench(BenchCommand),
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Print counter, node, edge and chunk counts.
    Stats,
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        addr: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// Run the temporal benchmark on a fresh engine and write JSON-lines records.
    Run(BenchRunArgs),
    /// Write a blind grading sheet and its key from a results file.
    Export {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        sheet: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Join a graded sheet with its key and print accuracy per system and checkpoint.
    Grade {
        #[arg(long)]
        grades: PathBuf,
        #[arg(long)]
        key: PathBuf,
    },
}

#[derive(Debug, Args)]
struct BenchRunArgs {
    #[arg(long, default_value_t = 25)]
    reps: usize,
    /// Use the offline echo stub regardless of the configured provider.
    #[arg(long)]
    offline: bool,
    #[arg(long, default_value = "bench.jsonl")]
    out: PathBuf,
    /// Alternative dataset file in the bundled fixture format.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Comma-separated subset of recallm, vectordb, hybrid, raw.
    #[arg(long, value_delimiter = ',')]
    systems: Vec<SystemId>,
    #[arg(long)]
    no_long_range: bool,
}

#[derive(Debug, Subcommand)]
enum GraphCommand {
    /// Print the graph snapshot document.
    Export {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let addr = match &cli.command {
        Command::Serve { addr } => addr.clone(),
        _ => None,
    };
    let flags = Overrides {
        config: cli.config,
        data_dir: cli.data_dir,
        provider: cli.provider,
        api_base: cli.api_base,
        model: cli.model,
        addr,
    };
    let settings = config::resolve(&flags)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Ingest { input, document } => {
            let mut engine = open_engine(&settings)?;
            let text = read_input(&input)?;
            let updates: Vec<&str> = if document {
                vec![text.as_str()]
            } else {
                text.lines().filter(|l| !l.trim().is_empty()).collect()
            };
            if updates.is_empty() {
                bail!("no knowledge in {input}");
            }
            for u in updates {
                let report = engine.ingest(u)?;
                writeln!(out, "{}", serde_json::to_string(&report)?)?;
            }
            save(&engine, &settings)
        }
        Command::Ask { question, mode, plain } => {
            let engine = open_engine(&settings)?;
            let trace = engine.ask(&question, mode)?;
            if plain {
                writeln!(out, "{}", trace.answer().map(str::to_owned).unwrap_or_else(|| trace.context()))?;
            } else {
                writeln!(out, "{}", serde_json::to_string_pretty(&trace)?)?;
            }
            if let Some(err) = trace.error() {
                bail!("provider failed: {err}");
            }
            Ok(())
        }
        Command::Repl { mode } => {
            let mut engine = open_engine(&settings)?;
            repl(&mut engine, mode, std::io::stdin().lock(), &mut out)?;
            save(&engine, &settings)
        }
        Command::Bench(cmd) => bench(cmd, &settings, &mut out),
        Command::Graph(GraphCommand::Export { out: path }) => {
            let engine = open_engine(&settings)?;
            let doc = engine.graph().snapshot();
            match path {
                Some(p) => std::fs::write(&p, doc).with_context(|| format!("writing {}", p.display()))?,
                None => {
                    out.write_all(&doc)?;
                    writeln!(out)?;
                }
            }
            Ok(())
        }
        Command::Stats => {
            let engine = open_engine(&settings)?;
            writeln!(out, "{}", serde_json::to_string(&engine.stats())?)?;
            Ok(())
        }
        Command::Serve { .. } => server::serve_blocking(settings),
    }
}

fn read_input(input: &str) -> anyhow::Result<String> {
    if input == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(input).with_context(|| format!("reading {input}"))
    }
}

pub fn chat_provider(settings: &Settings) -> anyhow::Result<Option<Arc<dyn ChatProvider>>> {
    Ok(match settings.provider {
        ProviderKind::None => None,
        ProviderKind::Echo => Some(Arc::new(ScriptedProvider::echo())),
        ProviderKind::Remote => Some(Arc::new(RemoteProvider::new(settings.remote.clone())?)),
    })
}

/// A fresh engine wired to the configured backends. Snapshots are not loaded.
pub fn build_engine(settings: &Settings, provider: Option<Arc<dyn ChatProvider>>) -> anyhow::Result<Engine> {
    let mut engine = Engine::new(settings.engine);
    if settings.embeddings == EmbeddingKind::Remote {
        let remote = Arc::new(RemoteProvider::new(settings.remote.clone())?);
        let dimension = settings.remote.embedding_dim.unwrap_or_default();
        engine = engine.with_embedder(Embedder::Remote { provider: remote, dimension });
    }
    if let Some(p) = provider {
        if settings.provider == ProviderKind::Remote {
            engine = engine.with_reviser(Arc::new(ProviderReviser::new(Arc::clone(&p))));
        }
        engine = engine.with_provider(p);
    }
    Ok(engine)
}

/// The configured engine with any saved snapshots loaded.
pub fn open_engine(settings: &Settings) -> anyhow::Result<Engine> {
    let mut engine = build_engine(settings, chat_provider(settings)?)?;
    engine.load_stores(&settings.graph_path(), &settings.vector_path())?;
    Ok(engine)
}

pub fn save(engine: &Engine, settings: &Settings) -> anyhow::Result<()> {
    engine.save(&settings.graph_path(), &settings.vector_path())?;
    Ok(())
}

fn repl(engine: &mut Engine, mode: AskMode, input: impl BufRead, out: &mut impl Write) -> anyhow::Result<()> {
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == ":quit" || line == ":q" {
            break;
        }
        if line == ":stats" {
            writeln!(out, "{}", serde_json::to_string(&engine.stats())?)?;
        } else if let Some(q) = line.strip_prefix('?') {
            match engine.ask(q.trim(), mode) {
                Ok(trace) => match (trace.answer(), trace.error()) {
                    (Some(a), _) => writeln!(out, "{a}")?,
                    (None, Some(e)) => writeln!(out, "error: {e}")?,
                    (None, None) => writeln!(out, "{}", trace.context())?,
                },
                Err(e) => writeln!(out, "error: {e}")?,
            }
        } else {
            match engine.ingest(line) {
                Ok(r) => writeln!(out, "ok t={}", r.update.t_after)?,
                Err(e) => writeln!(out, "error: {e}")?,
            }
        }
        out.flush()?;
    }
    Ok(())
}

fn bench(cmd: BenchCommand, settings: &Settings, out: &mut impl Write) -> anyhow::Result<()> {
    match cmd {
        BenchCommand::Run(args) => {
            let dataset = match &args.dataset {
                Some(p) => TemporalDataset::load(p)?,
                None => TemporalDataset::bundled(),
            };
            let (provider, mode) = if args.offline {
                (Some(Arc::new(ScriptedProvider::echo()) as Arc<dyn ChatProvider>), "offline-echo".to_string())
            } else {
                (chat_provider(settings)?, format!("{:?}", settings.provider).to_lowercase())
            };
            let mut engine = build_engine(settings, provider)?;
            let mut cfg = BenchConfig {
                repetitions: args.reps,
                checkpoints: BenchConfig::default_checkpoints(args.reps.max(1)),
                include_long_range: !args.no_long_range,
                provider_mode: mode,
                ..Default::default()
            };
            if !args.systems.is_empty() {
                cfg.systems = args.systems;
            }
            let report: BenchReport = run_temporal_bench(&dataset, &mut engine, &cfg)?;
            let file = std::fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
            let mut w = std::io::BufWriter::new(file);
            report.write_jsonl(&mut w)?;
            w.flush()?;
            writeln!(out, "wrote {} records to {}", report.records.len(), args.out.display())?;
            writeln!(out, "final counter {}", report.final_counter)?;
            if let Some(at) = report.raw_exceeded_at {
                writeln!(out, "raw baseline exceeded its budget at repetition {at}")?;
            }
            for r in &report.records {
                let hits = r.questions.iter().filter(|q| q.evidence_hit).count();
                writeln!(out, "{:<9} rep {:>2}: evidence in context {hits}/{}", r.system, r.checkpoint, r.questions.len())?;
            }
            Ok(())
        }
        BenchCommand::Export { results, sheet, key, seed } => {
            let text = std::fs::read_to_string(&results).with_context(|| format!("reading {}", results.display()))?;
            let records = BenchReport::read_jsonl(&text)?;
            let n = export_blind_grading(&records, &sheet, &key, seed)?;
            writeln!(out, "wrote {n} rows to {} (key: {})", sheet.display(), key.display())?;
            Ok(())
        }
        BenchCommand::Grade { grades, key } => {
            for row in import_grades(&grades, &key)? {
                writeln!(out, "{:<9} rep {:>2}: {}/{} = {}%", row.system, row.checkpoint, row.correct, row.total, row.percent)?;
            }
            Ok(())
        }
    }
}

/// Used by tests to drive the REPL without a terminal.
pub fn repl_session(engine: &mut Engine, mode: AskMode, input: &str) -> anyhow::Result<String> {
    let mut out = Vec::new();
    repl(engine, mode, input.as_bytes(), &mut out)?;
    Ok(String::from_utf8(out)?)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use deid_cli::commands::{self, AnonymizeArgs, Backend, EvalArgs, ReportFormat, SchemaErrors, ServeArgs, Settings};
use deid_cli::config::FileConfig;
use deid_core::detect::Scheme;
use deid_core::eval::MissMode;
use deid_core::pseudo::DateMode;
use deid_core::Scope;

/// Clinical-text PII detection and de-identification.
#[derive(Debug, Parser)]
#[command(name = "deid", version)]
struct Cli {
    /// TOML settings file. LOGICAL_MODEL_URL and LOGICAL_DATA_DIR override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for batch commands (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Words per chunk.
    #[arg(long, global = true)]
    max_words: Option<usize>,
    /// Words shared by neighbouring chunks.
    #[arg(long, global = true)]
    overlap_words: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Auto,
    Model,
    Gazetteer,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Auto => Backend::Auto,
            BackendArg::Model => Backend::Model,
            BackendArg::Gazetteer => Backend::Gazetteer,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScopeArg {
    Document,
    Corpus,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MissArg {
    AnyLabel,
    SameLabel,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Split annotated documents into overlapping word windows.
    Chunk {
        input: PathBuf,
        /// Chunk records (default: stdout).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Sidecar file of {chunk_id, char_base, word_range}.
        #[arg(long)]
        map: PathBuf,
    },
    /// Run a detector over {doc_id, text} lines.
    Detect {
        input: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "auto")]
        backend: BackendArg,
        /// Model server URL (overrides LOGICAL_MODEL_URL).
        #[arg(long)]
        model_url: Option<String>,
        /// Gazetteer TOML replacing the bundled lists.
        #[arg(long)]
        gazetteer: Option<PathBuf>,
        /// Minimum span score.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Replace annotated spans with lineage placeholders.
    Anonymize {
        input: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "document")]
        scope: ScopeArg,
        /// Lineage store to start from.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Where to save the corpus store (default: --store).
        #[arg(long)]
        store_out: Option<PathBuf>,
        #[arg(long)]
        fuzzy_threshold: Option<f64>,
    },
    /// Replace annotated spans with format-preserving surrogates.
    Pseudonymize {
        input: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        /// Directory with replacement lists (names.txt, states.txt, ...).
        #[arg(long)]
        resources: Option<PathBuf>,
        /// Give day/month/year dates a real calendar date.
        #[arg(long)]
        strict_dates: bool,
    },
    /// Score predictions against gold annotations at character level.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        /// Prediction file; repeat for several solutions.
        #[arg(long = "pred", required = true)]
        preds: Vec<PathBuf>,
        /// Label scheme: azure_ner, presidio or native. Once for all, or once per --pred.
        #[arg(long = "scheme")]
        schemes: Vec<Scheme>,
        /// Solution name per --pred (default: file stem).
        #[arg(long = "name")]
        names: Vec<String>,
        #[arg(long, value_enum, default_value = "any-label")]
        miss_mode: MissArg,
        /// Write report.json and report.txt here instead of printing.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
    },
    /// Time the non-model pipeline (and, with --model, end to end).
    Bench {
        input: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also time detection against the configured model server.
        #[arg(long)]
        model: bool,
        #[arg(long)]
        model_url: Option<String>,
    },
    /// Run the HTTP service.
    Serve {
        /// Overrides LOGICAL_DATA_DIR.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
        /// Bearer token for /v1 (required for non-loopback binds).
        #[arg(long, env = "DEID_API_TOKEN", hide_env_values = true)]
        token: Option<String>,
        /// Drop original text once a document is anonymized.
        #[arg(long)]
        purge_originals: bool,
        #[arg(long, value_enum, default_value = "auto")]
        backend: BackendArg,
        #[arg(long)]
        model_url: Option<String>,
        #[arg(long)]
        gazetteer: Option<PathBuf>,
    },
}

fn settings(cli: &Cli) -> anyhow::Result<Settings> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let mut file = file.with_env(|k| std::env::var(k).ok());
    if cli.max_words.is_some() {
        file.max_words = cli.max_words;
    }
    if cli.overlap_words.is_some() {
        file.overlap_words = cli.overlap_words;
    }
    match &cli.cmd {
        Cmd::Detect {
            model_url,
            gazetteer,
            threshold,
            ..
        } => {
            file.model_url = model_url.clone().or(file.model_url);
            file.gazetteer = gazetteer.clone().or(file.gazetteer);
            file.threshold = threshold.or(file.threshold);
        }
        Cmd::Anonymize { fuzzy_threshold, .. } => file.fuzzy_threshold = fuzzy_threshold.or(file.fuzzy_threshold),
        Cmd::Bench { model_url, .. } => file.model_url = model_url.clone().or(file.model_url),
        Cmd::Serve { model_url, gazetteer, .. } => {
            file.model_url = model_url.clone().or(file.model_url);
            file.gazetteer = gazetteer.clone().or(file.gazetteer);
        }
        _ => {}
    }
    Ok(Settings { file, jobs: cli.jobs })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let s = settings(&cli)?;
    match cli.cmd {
        Cmd::Chunk { input, out, map } => commands::chunk(&s, &input, out.as_deref(), &map),
        Cmd::Detect {
            input, out, backend, ..
        } => commands::detect(&s, backend.into(), &input, out.as_deref()),
        Cmd::Anonymize {
            input,
            out,
            scope,
            store,
            store_out,
            ..
        } => commands::anonymize(
            &s,
            AnonymizeArgs {
                input: &input,
                out: out.as_deref(),
                scope: match scope {
                    ScopeArg::Document => Scope::Document,
                    ScopeArg::Corpus => Scope::Corpus,
                },
                store: store.as_deref(),
                store_out: store_out.as_deref(),
            },
        ),
        Cmd::Pseudonymize {
            input,
            out,
            seed,
            resources,
            strict_dates,
        } => commands::pseudonymize(
            &s,
            &input,
            out.as_deref(),
            seed,
            resources.as_deref(),
            if strict_dates { DateMode::StrictCalendar } else { DateMode::Pattern },
        ),
        Cmd::Eval {
            gold,
            preds,
            schemes,
            names,
            miss_mode,
            out_dir,
            format,
        } => commands::eval(
            &s,
            &EvalArgs {
                gold: &gold,
                preds: &preds,
                schemes: &schemes,
                names: &names,
                miss_mode: match miss_mode {
                    MissArg::AnyLabel => MissMode::AnyLabel,
                    MissArg::SameLabel => MissMode::SameLabel,
                },
                out_dir: out_dir.as_deref(),
                format: match format {
                    FormatArg::Table => ReportFormat::Table,
                    FormatArg::Json => ReportFormat::Json,
                },
            },
        ),
        Cmd::Bench { input, out, model, .. } => commands::bench(&s, &input, out.as_deref(), model),
        Cmd::Serve {
            data_dir,
            bind,
            token,
            purge_originals,
            backend,
            ..
        } => commands::serve(
            &s,
            ServeArgs {
                data_dir,
                bind,
                token,
                purge_originals,
                backend: backend.into(),
            },
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<SchemaErrors>() => {
            eprintln!("schema errors:\n{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use settings::ConfigFile;

/// Reconstructs texts from verbatim and near-verbatim snippets of a reference
/// corpus and scores how much of each text is left unaccounted for.
#[derive(Parser, Debug)]
#[command(name = "remixtrace", version)]
pub struct Cli {
    /// Optional `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (overrides REMIXTRACE_THREADS and the config file).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true)]
    pub log_level: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Index management.
    Index {
        #[command(subcommand)]
        action: IndexAction,
    },
    /// Analyze texts and write one report per text.
    Analyze(AnalyzeArgs),
    /// Greedy source selection: which documents account for the matched text.
    Coverage(CoverageArgs),
    /// Report which corpus documents would be excluded as copies of each text.
    Dedup(DedupArgs),
    /// AUROC and Mann-Whitney U of creativity indices, human versus machine.
    Detect(DetectArgs),
    /// Print the effective stop-word list, one word per line.
    DumpStopwords {
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum IndexAction {
    /// Build an index directory from a JSONL corpus.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Longest accepted document, in tokens.
        #[arg(long, default_value_t = remixtrace_core::corpus::DEFAULT_MAX_DOC_TOKENS)]
        max_doc_tokens: usize,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct AnalysisArgs {
    /// Index directory created by `index build`.
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub l_min: Option<usize>,
    #[arg(long)]
    pub l_max: Option<usize>,
    #[arg(long)]
    pub bm25_k1: Option<f64>,
    #[arg(long)]
    pub bm25_b: Option<f64>,
    /// BM25 candidates searched for semantic matches.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Source documents listed per exact match.
    #[arg(long)]
    pub source_cap: Option<usize>,
    /// Also accept near-verbatim (embedding-similar) matches.
    #[arg(long, overrides_with = "no_semantic")]
    pub semantic: bool,
    #[arg(long)]
    pub no_semantic: bool,
    /// Word vectors, one `word v1 v2 ...` entry per line.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Distance threshold for a near-verbatim match.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Stop-word override, one word per line.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

impl AnalysisArgs {
    pub fn semantic_flag(&self) -> Option<bool> {
        match (self.semantic, self.no_semantic) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct DedupFlags {
    /// Exclusion threshold on the normalized LCS score.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Review threshold on the normalized LCS score.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Settle the review band with a shared-run heuristic.
    #[arg(long)]
    pub heuristic_judge: bool,
    /// Author of the analyzed texts (otherwise taken from each record).
    #[arg(long)]
    pub author: Option<String>,
    /// Title of the analyzed texts (otherwise taken from each record).
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Html,
    Both,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    /// Exclude near-copies of each text from its own reference corpus.
    #[arg(long)]
    pub dedup: bool,
    #[command(flatten)]
    pub dedup_flags: DedupFlags,
    /// Output directory for reports.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Text files: `.jsonl`/`.json` records or plain text.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long)]
    pub dedup: bool,
    #[command(flatten)]
    pub dedup_flags: DedupFlags,
    /// Documents to select.
    #[arg(long)]
    pub top_n: Option<usize>,
    /// Residual uniqueness target for `min_docs_for_theta`.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DedupArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[command(flatten)]
    pub dedup_flags: DedupFlags,
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    /// Report directory or JSONL of reports for human-written texts.
    #[arg(long)]
    pub human: PathBuf,
    /// Report directory or JSONL of reports for machine-generated texts.
    #[arg(long)]
    pub machine: PathBuf,
}

/// Failure before any work starts: bad configuration, missing index, etc.
#[derive(Debug)]
pub struct Precondition(pub String);

impl std::fmt::Display for Precondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Precondition {}

fn init_logging(level: &str) {
    env_logger::Builder::new()
        .parse_filters(level)
        .parse_default_env()
        .target(env_logger::Target::Stderr)
        .init();
}

fn thread_count(cli: &Cli, file: &ConfigFile) -> anyhow::Result<Option<usize>> {
    if let Some(n) = cli.threads {
        return Ok(Some(n));
    }
    if let Ok(v) = std::env::var("REMIXTRACE_THREADS") {
        let n = v
            .trim()
            .parse::<usize>()
            .map_err(|e| Precondition(format!("REMIXTRACE_THREADS={v}: {e}")))?;
        return Ok(Some(n));
    }
    file.get("threads")
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p).map_err(|e| Precondition(format!("{e:#}")))?,
        None => ConfigFile::default(),
    };
    let level = match &cli.log_level {
        Some(l) => l.clone(),
        None => file.raw("log-level").unwrap_or("warn").to_string(),
    };
    init_logging(&level);
    let threads = thread_count(&cli, &file).map_err(|e| Precondition(format!("{e:#}")))?;
    if let Some(n) = threads {
        if n == 0 {
            return Err(Precondition("thread count must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        log::debug!("using {n} worker threads");
    }
    match cli.command {
        Command::Index { action: IndexAction::Build { corpus, out, max_doc_tokens } } => {
            commands::index_build(&corpus, &out, max_doc_tokens)
        }
        Command::Analyze(args) => commands::analyze(&args, &file),
        Command::Coverage(args) => commands::coverage(&args, &file),
        Command::Dedup(args) => commands::dedup(&args, &file),
        Command::Detect(args) => commands::detect(&args),
        Command::DumpStopwords { stopwords } => commands::dump_stopwords(stopwords.as_deref(), &file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Precondition>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

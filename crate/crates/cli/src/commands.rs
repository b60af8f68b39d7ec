use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use serde::Serialize;

use remixtrace_core::corpus::Corpus;
use remixtrace_core::dedup::{CitationKeys, DedupConfig, OverlapVerdict, RunLengthJudge};
use remixtrace_core::detection::{auroc, mann_whitney_u, Label, ScoreSet};
use remixtrace_core::metric::AnalysisConfig;
use remixtrace_core::pipeline::{Analyzer, PipelineConfig};
use remixtrace_core::report::{render_html, report_file_stem};
use remixtrace_core::semantic::EmbeddingTable;
use remixtrace_core::stopwords::StopWordList;
use remixtrace_core::store::IndexBundle;
use remixtrace_core::{Execution, QueryText};

use crate::settings::ConfigFile;
use crate::{AnalysisArgs, AnalyzeArgs, CoverageArgs, DedupArgs, DedupFlags, DetectArgs, Format, Precondition};

const ERRORS_FILE: &str = "errors.jsonl";
const RUN_LOG: &str = "run.log";

fn precondition(e: impl std::fmt::Display) -> anyhow::Error {
    Precondition(e.to_string()).into()
}

pub fn index_build(corpus: &Path, out: &Path, max_doc_tokens: usize) -> Result<ExitCode> {
    if !corpus.is_file() {
        return Err(precondition(format!("corpus file {} not found", corpus.display())));
    }
    let corpus = Corpus::ingest_jsonl_with_cap(corpus, max_doc_tokens)?;
    info!("{} documents, {} tokens", corpus.len(), corpus.total_tokens());
    let bundle = IndexBundle::build(corpus, Execution::Parallel)?;
    bundle.save(out)?;
    println!("{}", serde_json::to_string(&bundle.manifest())?);
    Ok(ExitCode::SUCCESS)
}

/// Everything needed to analyze texts against one index.
struct Resources {
    bundle: IndexBundle,
    embeddings: Option<EmbeddingTable>,
    stop_words: StopWordList,
    config: PipelineConfig,
}

impl Resources {
    fn analyzer(&self) -> Result<Analyzer<'_>> {
        Ok(Analyzer::new(
            &self.bundle,
            self.embeddings.as_ref(),
            &self.stop_words,
            self.config.clone(),
            Execution::Parallel,
        )?)
    }
}

fn stop_words(path: Option<&Path>, file: &ConfigFile) -> Result<StopWordList> {
    let path = path.map(Path::to_path_buf).or(file.get::<PathBuf>("stopwords")?);
    match path {
        Some(p) => StopWordList::load(&p).map_err(precondition),
        None => Ok(StopWordList::english()),
    }
}

fn dedup_config(flags: &DedupFlags, file: &ConfigFile) -> Result<DedupConfig> {
    let defaults = DedupConfig::default();
    let judge = file.resolve_flag(flags.heuristic_judge.then_some(true), "heuristic-judge", false)?;
    let config = DedupConfig {
        alpha: file.resolve(flags.alpha, "alpha", defaults.alpha)?,
        beta: file.resolve(flags.beta, "beta", defaults.beta)?,
        judge: judge.then(|| Arc::new(RunLengthJudge::default()) as _),
    };
    config.validate()?;
    Ok(config)
}

fn citations(flags: &DedupFlags, q: &QueryText) -> CitationKeys {
    if flags.author.is_some() || flags.title.is_some() {
        CitationKeys::new(flags.author.as_deref(), flags.title.as_deref())
    } else {
        CitationKeys::from_query(q)
    }
}

/// Validates configuration and loads the index, stop words and embeddings.
/// Every failure here is a precondition failure: nothing has been written yet.
fn load_resources(args: &AnalysisArgs, file: &ConfigFile, dedup: Option<DedupConfig>) -> Result<Resources> {
    let defaults = PipelineConfig::default();
    let semantic = file
        .resolve_flag(args.semantic_flag(), "semantic", defaults.analysis.semantic_enabled)
        .map_err(precondition)?;
    let build = || -> Result<PipelineConfig> {
        let d = &defaults.analysis;
        let config = PipelineConfig {
            analysis: AnalysisConfig {
                l_min: file.resolve(args.l_min, "l-min", d.l_min)?,
                l_max: file.resolve(args.l_max, "l-max", d.l_max)?,
                semantic_enabled: semantic,
                delta: file.resolve(args.delta, "delta", d.delta)?,
                top_k: file.resolve(args.top_k, "top-k", d.top_k)?,
            },
            bm25_k1: file.resolve(args.bm25_k1, "bm25-k1", defaults.bm25_k1)?,
            bm25_b: file.resolve(args.bm25_b, "bm25-b", defaults.bm25_b)?,
            source_cap: file.resolve(args.source_cap, "source-cap", defaults.source_cap)?,
            dedup,
        };
        config.validate()?;
        Ok(config)
    };
    let config = build().map_err(|e| precondition(format!("{e:#}")))?;
    let embeddings_path = file.resolve_opt(args.embeddings.clone(), "embeddings").map_err(precondition)?;
    if semantic && embeddings_path.is_none() {
        return Err(precondition("semantic matching requires --embeddings"));
    }
    if !args.index.join("manifest.json").is_file() {
        return Err(precondition(format!("no index found at {}", args.index.display())));
    }
    let stop_words = stop_words(args.stopwords.as_deref(), file)?;
    let bundle = IndexBundle::load(&args.index).map_err(|e| precondition(format!("loading index: {e}")))?;
    let embeddings = match (semantic, embeddings_path) {
        (true, Some(p)) => Some(EmbeddingTable::load(&p).map_err(|e| precondition(format!("loading embeddings: {e}")))?),
        _ => None,
    };
    Ok(Resources { bundle, embeddings, stop_words, config })
}

#[derive(Debug, Serialize)]
struct ErrorRecord {
    input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    error: String,
}

fn load_inputs(paths: &[PathBuf]) -> (Vec<(String, QueryText)>, Vec<ErrorRecord>) {
    let mut queries = Vec::new();
    let mut errors = Vec::new();
    for path in paths {
        let input = path.display().to_string();
        match QueryText::load(path) {
            Ok(qs) => queries.extend(qs.into_iter().map(|q| (input.clone(), q))),
            Err(e) => {
                warn!("{input}: {e}");
                errors.push(ErrorRecord { input, id: None, error: e.to_string() });
            }
        }
    }
    (queries, errors)
}

fn status(errors: &[ErrorRecord]) -> ExitCode {
    if errors.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn analyze(args: &AnalyzeArgs, file: &ConfigFile) -> Result<ExitCode> {
    let started = unix_now();
    let dedup_on = file.resolve_flag(args.dedup.then_some(true), "dedup", false).map_err(precondition)?;
    let dedup = if dedup_on {
        Some(dedup_config(&args.dedup_flags, file).map_err(precondition)?)
    } else {
        None
    };
    let format = file.resolve(args.format, "format", Format::Json).map_err(precondition)?;
    let res = load_resources(&args.analysis, file, dedup)?;
    let analyzer = res.analyzer()?;

    let (queries, mut errors) = load_inputs(&args.inputs);
    let results = Execution::Parallel.map(&queries, |(_, q)| {
        analyzer.analyze_with(q, &citations(&args.dedup_flags, q))
    });

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut written = 0;
    for ((input, q), result) in queries.iter().zip(results) {
        let analysis = match result {
            Ok(a) => a,
            Err(e) => {
                warn!("{input} [{}]: {e}", q.id);
                errors.push(ErrorRecord { input: input.clone(), id: Some(q.id.clone()), error: e.to_string() });
                continue;
            }
        };
        let stem = report_file_stem(&q.id, &q.text);
        if matches!(format, Format::Json | Format::Both) {
            fs::write(args.out.join(format!("{stem}.json")), analysis.report.to_json()?)?;
        }
        if matches!(format, Format::Html | Format::Both) {
            fs::write(args.out.join(format!("{stem}.html")), render_html(&analysis.report)?)?;
        }
        written += 1;
        info!("{} -> {stem} (creativity index {:.3})", q.id, analysis.report.creativity_index);
    }

    let errors_path = args.out.join(ERRORS_FILE);
    if errors.is_empty() {
        if errors_path.exists() {
            fs::remove_file(&errors_path)?;
        }
    } else {
        let mut f = fs::File::create(&errors_path)?;
        for e in &errors {
            writeln!(f, "{}", serde_json::to_string(e)?)?;
        }
    }
    fs::write(
        args.out.join(RUN_LOG),
        format!(
            "started_unix={started}\nfinished_unix={}\ninputs={}\nreports={written}\nerrors={}\n",
            unix_now(),
            args.inputs.len(),
            errors.len()
        ),
    )?;
    Ok(status(&errors))
}

fn print_json_line(value: &impl Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string(value)?)?;
    Ok(())
}

fn report_errors(errors: &[ErrorRecord]) -> Result<()> {
    for e in errors {
        eprintln!("{}", serde_json::to_string(e)?);
    }
    Ok(())
}

pub fn coverage(args: &CoverageArgs, file: &ConfigFile) -> Result<ExitCode> {
    let dedup_on = file.resolve_flag(args.dedup.then_some(true), "dedup", false).map_err(precondition)?;
    let dedup = if dedup_on {
        Some(dedup_config(&args.dedup_flags, file).map_err(precondition)?)
    } else {
        None
    };
    let top_n: usize = file.resolve(args.top_n, "top-n", 10).map_err(precondition)?;
    let theta: f64 = file.resolve(args.theta, "theta", 0.5).map_err(precondition)?;
    if top_n == 0 || !(0.0..=1.0).contains(&theta) {
        return Err(precondition(format!("need top-n >= 1 and theta in [0, 1], got {top_n} and {theta}")));
    }
    let res = load_resources(&args.analysis, file, dedup)?;
    let analyzer = res.analyzer()?;
    let (queries, mut errors) = load_inputs(&args.inputs);
    let results = Execution::Parallel.map(&queries, |(_, q)| {
        let analysis = analyzer.analyze_with(q, &citations(&args.dedup_flags, q))?;
        analyzer.coverage(q, &analysis, top_n, theta)
    });
    for ((input, q), result) in queries.iter().zip(results) {
        match result {
            Ok(report) => print_json_line(&report)?,
            Err(e) => errors.push(ErrorRecord { input: input.clone(), id: Some(q.id.clone()), error: e.to_string() }),
        }
    }
    report_errors(&errors)?;
    Ok(status(&errors))
}

#[derive(Serialize)]
struct VerdictLine<'a> {
    query_id: &'a str,
    #[serde(flatten)]
    verdict: &'a OverlapVerdict,
}

pub fn dedup(args: &DedupArgs, file: &ConfigFile) -> Result<ExitCode> {
    let config = dedup_config(&args.dedup_flags, file).map_err(precondition)?;
    let res = load_resources(&args.analysis, file, None)?;
    let analyzer = res.analyzer()?;
    let (queries, mut errors) = load_inputs(&args.inputs);
    let results = Execution::Parallel.map(&queries, |(_, q)| {
        analyzer.dedup(q, &citations(&args.dedup_flags, q), &config)
    });
    for ((input, q), result) in queries.iter().zip(results) {
        match result {
            Ok(outcome) => {
                for verdict in &outcome.verdicts {
                    print_json_line(&VerdictLine { query_id: &q.id, verdict })?;
                }
            }
            Err(e) => errors.push(ErrorRecord { input: input.clone(), id: Some(q.id.clone()), error: e.to_string() }),
        }
    }
    report_errors(&errors)?;
    Ok(status(&errors))
}

fn score_of(value: &serde_json::Value, origin: &str) -> Result<f64> {
    value
        .get("creativity_index")
        .and_then(serde_json::Value::as_f64)
        .with_context(|| format!("{origin}: no numeric creativity_index"))
}

/// Creativity indices from a report directory (every `*.json`), a JSONL file
/// of reports, or a single report file.
fn read_scores(path: &Path) -> Result<Vec<f64>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        files.retain(|p| p.extension().is_some_and(|e| e == "json"));
        files.sort();
        files
            .iter()
            .map(|f| {
                let text = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
                let value: serde_json::Value =
                    serde_json::from_str(&text).with_context(|| format!("parsing {}", f.display()))?;
                score_of(&value, &f.display().to_string())
            })
            .collect()
    } else {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text)?;
            return Ok(vec![score_of(&value, &path.display().to_string())?]);
        }
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| {
                let origin = format!("{}:{}", path.display(), n + 1);
                let value: serde_json::Value = serde_json::from_str(l).with_context(|| origin.clone())?;
                score_of(&value, &origin)
            })
            .collect()
    }
}

#[derive(Serialize)]
struct DetectOutput {
    auroc: f64,
    u: f64,
    p: f64,
    n_human: usize,
    n_machine: usize,
}

pub fn detect(args: &DetectArgs) -> Result<ExitCode> {
    for p in [&args.human, &args.machine] {
        if !p.exists() {
            return Err(precondition(format!("{} not found", p.display())));
        }
    }
    let human = read_scores(&args.human)?;
    let machine = read_scores(&args.machine)?;
    if human.is_empty() || machine.is_empty() {
        bail!("need at least one report on each side, got {} human and {} machine", human.len(), machine.len());
    }
    let a = auroc(&ScoreSet::new(Label::Human, human.clone()), &ScoreSet::new(Label::Machine, machine.clone()))?;
    let mw = mann_whitney_u(&human, &machine)?;
    if mw.approximate {
        warn!("fewer than 8 scores: the p-value is a rough approximation");
    }
    print_json_line(&DetectOutput { auroc: a, u: mw.u, p: mw.p, n_human: human.len(), n_machine: machine.len() })?;
    Ok(ExitCode::SUCCESS)
}

pub fn dump_stopwords(path: Option<&Path>, file: &ConfigFile) -> Result<ExitCode> {
    let list = stop_words(path, file)?;
    let mut out = std::io::stdout().lock();
    for w in list.sorted() {
        writeln!(out, "{w}")?;
    }
    Ok(ExitCode::SUCCESS)
}

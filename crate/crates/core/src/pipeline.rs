//! End-to-end analysis of one query text against an [`IndexBundle`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::attribution::{attribute_spans, greedy_top_n, min_docs_for_threshold, DocCoverage};
use crate::bm25::Bm25Params;
use crate::corpus::QueryText;
use crate::dedup::{filter_candidates, CitationKeys, Decision, DedupConfig, DedupOutcome};
use crate::dj_search::{dj_search, MatchMap};
use crate::error::{Error, Result};
use crate::metric::{creativity_index, uniqueness_curve, AnalysisConfig, UniquenessCurve};
use crate::oracle::{CorpusOracle, NgramOracle, DEFAULT_SOURCE_CAP};
use crate::par::Execution;
use crate::report::{CandidateInfo, ConfigEcho, DedupEcho, DedupSummary, Report, SpanRecord};
use crate::semantic::{EmbeddingTable, SemanticContext, SemanticMatchConfig};
use crate::stopwords::StopWordList;
use crate::store::IndexBundle;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub analysis: AnalysisConfig,
    pub bm25_k1: f64,
    pub bm25_b: f64,
    pub source_cap: usize,
    pub dedup: Option<DedupConfig>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let bm25 = Bm25Params::default();
        PipelineConfig {
            analysis: AnalysisConfig::default(),
            bm25_k1: bm25.k1,
            bm25_b: bm25.b,
            source_cap: DEFAULT_SOURCE_CAP,
            dedup: None,
        }
    }
}

impl PipelineConfig {
    pub fn bm25_params(&self) -> Bm25Params {
        Bm25Params {
            k1: self.bm25_k1,
            b: self.bm25_b,
            top_k: self.analysis.top_k,
        }
    }

    pub fn semantic_config(&self) -> SemanticMatchConfig {
        SemanticMatchConfig {
            delta: self.analysis.delta,
            min_span: self.analysis.l_min,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.analysis.validate()?;
        self.bm25_params().validate()?;
        self.semantic_config().validate()?;
        if self.source_cap == 0 {
            return Err(Error::invalid("exact source cap must be at least 1"));
        }
        if let Some(d) = &self.dedup {
            d.validate()?;
        }
        Ok(())
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            l_min: self.analysis.l_min,
            l_max: self.analysis.l_max,
            semantic_enabled: self.analysis.semantic_enabled,
            delta: self.analysis.delta,
            top_k: self.analysis.top_k,
            bm25_k1: self.bm25_k1,
            bm25_b: self.bm25_b,
            exact_source_cap: self.source_cap,
            dedup: self.dedup.as_ref().map(|d| DedupEcho {
                alpha: d.alpha,
                beta: d.beta,
                judge: d.judge_name().map(str::to_string),
            }),
        }
    }
}

/// Everything computed for one query.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: Report,
    pub match_map: MatchMap,
    pub curve: UniquenessCurve,
    /// BM25 candidates by corpus ordinal, best first.
    pub bm25_candidates: Vec<usize>,
    /// Exclusion flags by corpus ordinal (empty when dedup is off).
    pub excluded: Vec<bool>,
    pub dedup: Option<DedupOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub id: String,
    pub selected: Vec<String>,
    pub residual_uniqueness_by_k: Vec<f64>,
    pub min_docs_for_theta: Option<usize>,
    pub theta: f64,
    pub l: usize,
    /// Number of documents attribution was computed over.
    pub candidate_pool: usize,
}

pub struct Analyzer<'a> {
    bundle: &'a IndexBundle,
    embeddings: Option<&'a EmbeddingTable>,
    stop_words: &'a StopWordList,
    config: PipelineConfig,
    exec: Execution,
}

impl<'a> Analyzer<'a> {
    pub fn new(
        bundle: &'a IndexBundle,
        embeddings: Option<&'a EmbeddingTable>,
        stop_words: &'a StopWordList,
        config: PipelineConfig,
        exec: Execution,
    ) -> Result<Self> {
        config.validate()?;
        if config.analysis.semantic_enabled && embeddings.is_none() {
            return Err(Error::invalid("semantic matching needs an embedding table"));
        }
        Ok(Analyzer {
            bundle,
            embeddings,
            stop_words,
            config,
            exec,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    fn content_tokens(&self, q: &QueryText) -> Vec<String> {
        q.tokens
            .iter()
            .filter(|t| self.stop_words.is_content(t))
            .cloned()
            .collect()
    }

    /// Documents worth an LCS comparison: those sharing an `l_min`-gram with
    /// the query, the BM25 top-k, and any citing the query's author or title.
    fn dedup_candidates(&self, q: &QueryText, citations: &CitationKeys) -> Vec<usize> {
        let index = &self.bundle.exact;
        let l = self.config.analysis.l_min;
        let mut set: BTreeSet<usize> = BTreeSet::new();
        if q.len() >= l {
            for w in q.tokens.windows(l) {
                if let Some(ids) = index.encode(w) {
                    set.extend(index.doc_ordinals_with(&ids, &[]));
                }
            }
        }
        let bm25 = self
            .bundle
            .bm25
            .top_k_ordinals(&self.content_tokens(q), &self.config.bm25_params(), &[]);
        set.extend(bm25.into_iter().map(|(d, _)| d));
        for key in citations.keys() {
            if let Some(ids) = index.encode(key) {
                set.extend(index.doc_ordinals_with(&ids, &[]));
            }
        }
        set.into_iter().collect()
    }

    pub fn dedup(&self, q: &QueryText, citations: &CitationKeys, config: &DedupConfig) -> Result<DedupOutcome> {
        let docs = self.bundle.corpus.documents();
        let candidates: Vec<_> = self
            .dedup_candidates(q, citations)
            .into_iter()
            .map(|d| &docs[d])
            .collect();
        filter_candidates(q, &candidates, citations, config, self.exec)
    }

    pub fn analyze(&self, q: &QueryText) -> Result<Analysis> {
        self.analyze_with(q, &CitationKeys::from_query(q))
    }

    pub fn analyze_with(&self, q: &QueryText, citations: &CitationKeys) -> Result<Analysis> {
        let cfg = &self.config;
        let index = &self.bundle.exact;

        let dedup = match &cfg.dedup {
            Some(d) => Some(self.dedup(q, citations, d)?),
            None => None,
        };
        let excluded = dedup
            .as_ref()
            .map(|o| o.mask(index.doc_ids()))
            .unwrap_or_default();

        let bm25_candidates: Vec<usize> = self
            .bundle
            .bm25
            .top_k_ordinals(&self.content_tokens(q), &cfg.bm25_params(), &excluded)
            .into_iter()
            .map(|(d, _)| d)
            .collect();

        let semantic = match (cfg.analysis.semantic_enabled, self.embeddings) {
            (true, Some(table)) => Some(SemanticContext::new(
                &q.tokens,
                &bm25_candidates,
                index,
                table,
                self.stop_words,
                cfg.semantic_config(),
                self.exec,
            )),
            _ => None,
        };
        let mut oracle = CorpusOracle::exact(index, cfg.analysis.l_min)
            .with_exclusions(&excluded)
            .with_source_cap(cfg.source_cap);
        if let Some(ctx) = &semantic {
            oracle = oracle.with_semantic(ctx);
        }
        let match_map = dj_search(q, &oracle, cfg.analysis.l_min)?;
        let curve = uniqueness_curve(&match_map, &cfg.analysis)?;
        let ci = creativity_index(&curve)?;

        let report = Report {
            id: q.id.clone(),
            n_tokens: q.len(),
            tokens: q.tokens.clone(),
            l_uniqueness: curve.values.clone(),
            creativity_index: ci,
            spans: SpanRecord::from_map(&match_map),
            config: cfg.echo(),
            oracle_stats: oracle.stats(),
            candidates: CandidateInfo {
                bm25_candidates: bm25_candidates
                    .iter()
                    .map(|&d| index.doc_id(d).to_string())
                    .collect(),
            },
            dedup: dedup.as_ref().map(|o| DedupSummary {
                excluded: o.excluded.iter().cloned().collect(),
                review: o
                    .verdicts
                    .iter()
                    .filter(|v| v.decision == Decision::Review)
                    .map(|v| v.doc_id.clone())
                    .collect(),
            }),
        };
        Ok(Analysis {
            report,
            match_map,
            curve,
            bm25_candidates,
            excluded,
            dedup,
        })
    }

    pub fn doc_coverage(&self, q: &QueryText, analysis: &Analysis) -> DocCoverage {
        attribute_spans(
            &q.tokens,
            &analysis.match_map,
            &self.bundle.exact,
            &analysis.bm25_candidates,
            &analysis.excluded,
            self.config.analysis.l_min,
            self.exec,
        )
    }

    pub fn coverage(&self, q: &QueryText, analysis: &Analysis, top_n: usize, theta: f64) -> Result<CoverageReport> {
        if top_n == 0 {
            return Err(Error::invalid("top-n must be at least 1"));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::invalid(format!("theta must lie in [0, 1], got {theta}")));
        }
        let cov = self.doc_coverage(q, analysis);
        let sel = greedy_top_n(&cov, top_n, q.len());
        Ok(CoverageReport {
            id: q.id.clone(),
            selected: sel.selected,
            residual_uniqueness_by_k: sel.residual_by_k,
            min_docs_for_theta: min_docs_for_threshold(&cov, theta, q.len()),
            theta,
            l: self.config.analysis.l_min,
            candidate_pool: cov.len(),
        })
    }
}

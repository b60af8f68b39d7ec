//! The occurrence test `f`: exact lookup in the suffix array first, then a
//! semantic search over the BM25 candidates when that fails.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_index::SuffixArrayIndex;
use crate::semantic::SemanticContext;

/// Default cap on the number of source documents reported for an exact match.
pub const DEFAULT_SOURCE_CAP: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    None,
    Exact,
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub kind: MatchKind,
    pub source_docs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span_in_source: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
}

impl MatchResult {
    pub fn none() -> Self {
        MatchResult {
            kind: MatchKind::None,
            source_docs: Vec::new(),
            span_in_source: None,
            distance: None,
        }
    }

    pub fn exact(source_docs: Vec<String>) -> Self {
        MatchResult {
            kind: MatchKind::Exact,
            source_docs,
            span_in_source: None,
            distance: None,
        }
    }

    pub fn semantic(doc: String, span: (usize, usize), distance: f64) -> Self {
        MatchResult {
            kind: MatchKind::Semantic,
            source_docs: vec![doc],
            span_in_source: Some(span),
            distance: Some(distance),
        }
    }

    pub fn is_match(&self) -> bool {
        self.kind != MatchKind::None
    }
}

/// Counters since construction. `call_count` includes memoized calls;
/// the hit counters only count computed (non-memoized) results.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    pub call_count: u64,
    pub exact_hits: u64,
    pub semantic_hits: u64,
    pub cache_hits: u64,
}

pub trait NgramOracle: Sync {
    fn occurs(&self, ngram: &[String]) -> Result<MatchResult>;
    fn stats(&self) -> OracleStats;
}

#[derive(Debug, Default)]
struct Counters {
    calls: AtomicU64,
    exact: AtomicU64,
    semantic: AtomicU64,
    cache: AtomicU64,
}

impl Counters {
    fn snapshot(&self) -> OracleStats {
        OracleStats {
            call_count: self.calls.load(Ordering::Relaxed),
            exact_hits: self.exact.load(Ordering::Relaxed),
            semantic_hits: self.semantic.load(Ordering::Relaxed),
            cache_hits: self.cache.load(Ordering::Relaxed),
        }
    }
}

/// Oracle backed by the corpus indexes. Memoizes per instance, so build one
/// per analysis run.
pub struct CorpusOracle<'a> {
    index: &'a SuffixArrayIndex,
    excluded: &'a [bool],
    semantic: Option<&'a SemanticContext<'a>>,
    l_min: usize,
    source_cap: usize,
    memo: Mutex<HashMap<Vec<String>, MatchResult>>,
    counters: Counters,
}

impl<'a> CorpusOracle<'a> {
    pub fn exact(index: &'a SuffixArrayIndex, l_min: usize) -> Self {
        CorpusOracle {
            index,
            excluded: &[],
            semantic: None,
            l_min,
            source_cap: DEFAULT_SOURCE_CAP,
            memo: Mutex::new(HashMap::new()),
            counters: Counters::default(),
        }
    }

    /// Treat occurrences inside flagged documents (by corpus ordinal) as absent.
    pub fn with_exclusions(mut self, excluded: &'a [bool]) -> Self {
        self.excluded = excluded;
        self
    }

    pub fn with_semantic(mut self, ctx: &'a SemanticContext<'a>) -> Self {
        self.semantic = Some(ctx);
        self
    }

    pub fn with_source_cap(mut self, cap: usize) -> Self {
        self.source_cap = cap;
        self
    }

    fn compute(&self, ngram: &[String]) -> Result<MatchResult> {
        if let Some(ids) = self.index.encode(ngram) {
            if self.index.contains_ids_excluding(&ids, self.excluded) {
                self.counters.exact.fetch_add(1, Ordering::Relaxed);
                return Ok(MatchResult::exact(
                    self.index.locate_ids(&ids, self.source_cap, self.excluded),
                ));
            }
        }
        if let Some(ctx) = self.semantic {
            match ctx.find(ngram) {
                Ok(Some((doc, span))) => {
                    self.counters.semantic.fetch_add(1, Ordering::Relaxed);
                    return Ok(MatchResult::semantic(
                        self.index.doc_id(doc).to_string(),
                        (span.start, span.end),
                        span.distance,
                    ));
                }
                Ok(None) | Err(Error::NoContentWords) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(MatchResult::none())
    }
}

impl NgramOracle for CorpusOracle<'_> {
    fn occurs(&self, ngram: &[String]) -> Result<MatchResult> {
        if ngram.len() < self.l_min {
            return Err(Error::invalid(format!(
                "n-gram of length {} is shorter than L_min = {}",
                ngram.len(),
                self.l_min
            )));
        }
        self.counters.calls.fetch_add(1, Ordering::Relaxed);
        if let Some(hit) = self.memo.lock().expect("memo poisoned").get(ngram) {
            self.counters.cache.fetch_add(1, Ordering::Relaxed);
            return Ok(hit.clone());
        }
        // computed outside the lock; concurrent duplicates are identical
        let result = self.compute(ngram)?;
        self.memo
            .lock()
            .expect("memo poisoned")
            .insert(ngram.to_vec(), result.clone());
        Ok(result)
    }

    fn stats(&self) -> OracleStats {
        self.counters.snapshot()
    }
}

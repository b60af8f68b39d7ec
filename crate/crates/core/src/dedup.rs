//! Excluding reference documents that copy, quote or cite the analyzed text.
//!
//! Overlap is the word-level LCS length normalized by the query length.
//! Documents at or above `alpha` are excluded outright; documents between
//! `beta` and `alpha` go to a quotation judge when one is configured and are
//! flagged for review otherwise. A document that contains the query's author
//! name or title is excluded regardless of overlap.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Document, QueryText};
use crate::error::{Error, Result};
use crate::par::Execution;

/// Word-level LCS length, two-row dynamic programme.
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev = vec![0usize; short.len() + 1];
    let mut cur = vec![0usize; short.len() + 1];
    for x in long {
        for (j, y) in short.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// Length of the longest common contiguous run.
pub fn longest_common_run<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    let mut best = 0;
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { 0 };
            best = best.max(cur[j + 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// `|LCS(x, d)| / |x|`.
pub fn overlap_score<T: PartialEq>(x: &[T], d: &[T]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::invalid("overlap score needs a nonempty query"));
    }
    Ok(lcs_length(x, d) as f64 / x.len() as f64)
}

/// Decides whether a document copies or quotes the query text.
pub trait QuotationJudge: Send + Sync {
    fn name(&self) -> &str;
    fn contains_quotation(&self, document: &Document, query: &QueryText) -> bool;
}

/// Flags a quotation when the two texts share a contiguous run of at least
/// `min_run` words.
#[derive(Debug, Clone, Copy)]
pub struct RunLengthJudge {
    pub min_run: usize,
}

impl Default for RunLengthJudge {
    fn default() -> Self {
        RunLengthJudge { min_run: 20 }
    }
}

impl QuotationJudge for RunLengthJudge {
    fn name(&self) -> &str {
        "run-length"
    }

    fn contains_quotation(&self, document: &Document, query: &QueryText) -> bool {
        longest_common_run(&document.tokens, &query.tokens) >= self.min_run
    }
}

#[derive(Clone)]
pub struct DedupConfig {
    pub alpha: f64,
    pub beta: f64,
    pub judge: Option<Arc<dyn QuotationJudge>>,
}

impl Default for DedupConfig {
    fn default() -> Self {
        DedupConfig {
            alpha: 0.9,
            beta: 0.3,
            judge: None,
        }
    }
}

impl std::fmt::Debug for DedupConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DedupConfig")
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("judge", &self.judge.as_ref().map(|j| j.name()))
            .finish()
    }
}

impl DedupConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.beta && self.beta <= self.alpha && self.alpha <= 1.0) {
            return Err(Error::invalid(format!(
                "need 0 <= beta <= alpha <= 1, got alpha = {}, beta = {}",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    pub fn judge_name(&self) -> Option<&str> {
        self.judge.as_ref().map(|j| j.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Keep,
    Exclude,
    Review,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    HighLcs,
    JudgePositive,
    /// In the judge band and the judge said no.
    JudgeNegative,
    /// In the judge band with no judge configured.
    ModerateLcs,
    CitationMetadata,
    Low,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapVerdict {
    pub doc_id: String,
    pub score: f64,
    pub decision: Decision,
    pub reason: Reason,
}

pub fn classify_overlap(
    score: f64,
    config: &DedupConfig,
    metadata_hit: bool,
    judge_result: Option<bool>,
) -> (Decision, Reason) {
    if metadata_hit {
        return (Decision::Exclude, Reason::CitationMetadata);
    }
    if score >= config.alpha {
        (Decision::Exclude, Reason::HighLcs)
    } else if score >= config.beta {
        match judge_result {
            Some(true) => (Decision::Exclude, Reason::JudgePositive),
            Some(false) => (Decision::Keep, Reason::JudgeNegative),
            None => (Decision::Review, Reason::ModerateLcs),
        }
    } else {
        (Decision::Keep, Reason::Low)
    }
}

/// Author and title of the analyzed text, as token sequences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CitationKeys {
    pub author: Vec<String>,
    pub title: Vec<String>,
}

impl CitationKeys {
    pub fn new(author: Option<&str>, title: Option<&str>) -> Self {
        CitationKeys {
            author: author.map(tokenize).unwrap_or_default(),
            title: title.map(tokenize).unwrap_or_default(),
        }
    }

    pub fn from_query(q: &QueryText) -> Self {
        let meta = q.meta.as_ref();
        Self::new(
            meta.and_then(|m| m.author.as_deref()),
            meta.and_then(|m| m.title.as_deref()),
        )
    }

    pub fn is_empty(&self) -> bool {
        self.author.is_empty() && self.title.is_empty()
    }

    /// Whether the author or title appears as a contiguous token run in `doc`.
    pub fn cited_in(&self, doc: &[String]) -> bool {
        [&self.author, &self.title]
            .into_iter()
            .filter(|k| !k.is_empty())
            .any(|k| doc.windows(k.len()).any(|w| w == k.as_slice()))
    }

    pub fn keys(&self) -> impl Iterator<Item = &[String]> {
        [&self.author, &self.title]
            .into_iter()
            .filter(|k| !k.is_empty())
            .map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DedupOutcome {
    pub excluded: BTreeSet<String>,
    pub verdicts: Vec<OverlapVerdict>,
}

impl DedupOutcome {
    /// Exclusion flags by corpus ordinal.
    pub fn mask(&self, doc_ids: &[String]) -> Vec<bool> {
        doc_ids.iter().map(|id| self.excluded.contains(id)).collect()
    }
}

/// Verdicts for the given candidate documents.
pub fn filter_candidates(
    query: &QueryText,
    candidates: &[&Document],
    citations: &CitationKeys,
    config: &DedupConfig,
    exec: Execution,
) -> Result<DedupOutcome> {
    config.validate()?;
    if query.is_empty() {
        return Ok(DedupOutcome::default());
    }
    let verdicts = exec.map(candidates, |doc| {
        let score = lcs_length(&query.tokens, &doc.tokens) as f64 / query.len() as f64;
        let cited = citations.cited_in(&doc.tokens);
        let judged = match &config.judge {
            Some(judge) if !cited && score >= config.beta && score < config.alpha => {
                Some(judge.contains_quotation(doc, query))
            }
            _ => None,
        };
        let (decision, reason) = classify_overlap(score, config, cited, judged);
        OverlapVerdict {
            doc_id: doc.id.clone(),
            score,
            decision,
            reason,
        }
    });
    let excluded = verdicts
        .iter()
        .filter(|v| v.decision == Decision::Exclude)
        .map(|v| v.doc_id.clone())
        .collect();
    Ok(DedupOutcome { excluded, verdicts })
}

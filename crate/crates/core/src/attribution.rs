//! Which documents the matched n-grams come from, and how few of them are
//! needed to explain most of the text (greedy maximum coverage).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::dj_search::MatchMap;
use crate::exact_index::{SuffixArrayIndex, TokenId};
use crate::oracle::MatchKind;
use crate::par::Execution;

/// Covered query positions per document id.
pub type DocCoverage = BTreeMap<String, BTreeSet<usize>>;

/// Per-document coverage of the query over a candidate set.
///
/// Candidates are the documents reported by exact matches plus `extra`
/// (corpus ordinals, typically the BM25 top-k). For each candidate, the
/// longest match starting at every query position inside that document is
/// recomputed and kept when at least `l_min` long. Semantic matches count
/// only toward the document they were found in.
pub fn attribute_spans(
    query_tokens: &[String],
    map: &MatchMap,
    index: &SuffixArrayIndex,
    extra: &[usize],
    excluded: &[bool],
    l_min: usize,
    exec: Execution,
) -> DocCoverage {
    let ordinal_of: HashMap<&str, usize> = index
        .doc_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let is_excluded = |d: usize| excluded.get(d).copied().unwrap_or(false);
    let mut candidates: BTreeSet<usize> = extra.iter().copied().collect();
    for m in &map.matches {
        if m.result.kind == MatchKind::Exact {
            candidates.extend(m.result.source_docs.iter().filter_map(|id| ordinal_of.get(id.as_str())));
        }
    }
    let candidates: Vec<usize> = candidates.into_iter().filter(|&d| !is_excluded(d)).collect();
    let encoded: Vec<Option<TokenId>> = query_tokens.iter().map(|t| index.vocab().id(t)).collect();

    let per_doc = exec.map(&candidates, |&d| {
        (d, longest_matches_in_doc(&encoded, index.doc_tokens(d), l_min))
    });
    let mut coverage = DocCoverage::new();
    for (d, positions) in per_doc {
        if !positions.is_empty() {
            coverage.insert(index.doc_id(d).to_string(), positions);
        }
    }
    for m in &map.matches {
        if m.result.kind != MatchKind::Semantic || m.length < l_min {
            continue;
        }
        if let Some(id) = m.result.source_docs.first() {
            if ordinal_of.get(id.as_str()).is_some_and(|&d| !is_excluded(d)) {
                coverage.entry(id.clone()).or_default().extend(m.start..m.end());
            }
        }
    }
    coverage
}

/// Query positions covered by the longest in-document match at each start,
/// for matches of length at least `l_min`.
fn longest_matches_in_doc(query: &[Option<TokenId>], doc: &[TokenId], l_min: usize) -> BTreeSet<usize> {
    let mut covered = BTreeSet::new();
    if l_min == 0 || doc.len() < l_min || query.len() < l_min {
        return covered;
    }
    let mut seeds: HashMap<&[TokenId], Vec<usize>> = HashMap::new();
    for (p, w) in doc.windows(l_min).enumerate() {
        seeds.entry(w).or_default().push(p);
    }
    let mut reach = 0;
    for i in 0..=query.len() - l_min {
        let Some(key) = query[i..i + l_min].iter().copied().collect::<Option<Vec<TokenId>>>() else {
            continue;
        };
        let Some(starts) = seeds.get(key.as_slice()) else { continue };
        let best = starts
            .iter()
            .map(|&p| {
                let mut len = l_min;
                while i + len < query.len()
                    && p + len < doc.len()
                    && query[i + len] == Some(doc[p + len])
                {
                    len += 1;
                }
                len
            })
            .max()
            .unwrap_or(0);
        let end = i + best;
        if end > reach {
            covered.extend(i.max(reach)..end);
            reach = end;
        }
    }
    covered
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedySelection {
    /// Document ids in pick order.
    pub selected: Vec<String>,
    /// `residual_by_k[k]` is the uniqueness left after `k` picks.
    pub residual_by_k: Vec<f64>,
}

impl GreedySelection {
    pub fn residual(&self) -> f64 {
        *self.residual_by_k.last().unwrap_or(&1.0)
    }
}

fn residual(covered: usize, x_len: usize) -> f64 {
    if x_len == 0 {
        1.0
    } else {
        1.0 - covered as f64 / x_len as f64
    }
}

/// Greedy maximum coverage: up to `n` picks, each adding the most uncovered
/// positions. Ties go to the smallest document id; stops early on zero gain.
pub fn greedy_top_n(coverage: &DocCoverage, n: usize, x_len: usize) -> GreedySelection {
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    let mut used: BTreeSet<&str> = BTreeSet::new();
    let mut sel = GreedySelection {
        selected: Vec::new(),
        residual_by_k: vec![residual(0, x_len)],
    };
    while sel.selected.len() < n {
        let mut best: Option<(&str, usize)> = None;
        for (id, positions) in coverage {
            if used.contains(id.as_str()) {
                continue;
            }
            let gain = positions.iter().filter(|p| !covered.contains(p)).count();
            if gain > best.map_or(0, |b| b.1) {
                best = Some((id, gain));
            }
        }
        let Some((id, _)) = best else { break };
        used.insert(id);
        covered.extend(coverage[id].iter().copied());
        sel.selected.push(id.to_string());
        sel.residual_by_k.push(residual(covered.len(), x_len));
    }
    sel
}

/// Number of greedy picks needed for residual uniqueness to drop below
/// `theta`; `None` when no selection gets there.
pub fn min_docs_for_threshold(coverage: &DocCoverage, theta: f64, x_len: usize) -> Option<usize> {
    greedy_top_n(coverage, coverage.len(), x_len)
        .residual_by_k
        .iter()
        .position(|&r| r < theta)
}

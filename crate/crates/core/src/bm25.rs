//! BM25 candidate retrieval.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
    pub top_k: usize,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params {
            k1: 1.2,
            b: 0.75,
            top_k: 100,
        }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0) {
            return Err(Error::invalid(format!("bm25 k1 must be positive, got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::invalid(format!("bm25 b must lie in [0, 1], got {}", self.b)));
        }
        if self.top_k == 0 {
            return Err(Error::invalid("top_k must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    /// Corpus ordinal of the document.
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    pub postings: BTreeMap<String, Vec<Posting>>,
    pub doc_lengths: Vec<u32>,
    pub doc_ids: Vec<String>,
    pub avg_doc_length: f64,
}

impl InvertedIndex {
    pub fn build(corpus: &Corpus) -> Self {
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lengths = Vec::with_capacity(corpus.len());
        for (ordinal, doc) in corpus.documents().iter().enumerate() {
            doc_lengths.push(doc.tokens.len() as u32);
            let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
            for t in &doc.tokens {
                *tf.entry(t).or_default() += 1;
            }
            for (term, tf) in tf {
                postings.entry(term.to_string()).or_default().push(Posting {
                    doc: ordinal as u32,
                    tf,
                });
            }
        }
        let total: u64 = doc_lengths.iter().map(|&l| l as u64).sum();
        let avg_doc_length = if doc_lengths.is_empty() {
            0.0
        } else {
            total as f64 / doc_lengths.len() as f64
        };
        InvertedIndex {
            postings,
            doc_lengths,
            doc_ids: corpus.documents().iter().map(|d| d.id.clone()).collect(),
            avg_doc_length,
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_lengths.len()
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.doc_count() as f64;
        let df = self.postings.get(term).map_or(0, Vec::len) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Ranked `(ordinal, score)` pairs, best first, excluding flagged documents.
    ///
    /// Query terms are deduplicated, so query-side term frequency plays no part.
    /// Documents with no query term are never returned.
    pub fn top_k_ordinals<S: AsRef<str>>(
        &self,
        query: &[S],
        params: &Bm25Params,
        excluded: &[bool],
    ) -> Vec<(usize, f64)> {
        let terms: BTreeSet<&str> = query.iter().map(AsRef::as_ref).collect();
        let mut scores: Vec<Option<f64>> = vec![None; self.doc_count()];
        let avg = if self.avg_doc_length > 0.0 { self.avg_doc_length } else { 1.0 };
        for term in terms {
            let Some(list) = self.postings.get(term) else { continue };
            let idf = self.idf(term);
            for p in list {
                let tf = p.tf as f64;
                let len = self.doc_lengths[p.doc as usize] as f64;
                let norm = params.k1 * (1.0 - params.b + params.b * len / avg);
                let s = idf * tf * (params.k1 + 1.0) / (tf + norm);
                *scores[p.doc as usize].get_or_insert(0.0) += s;
            }
        }
        let mut ranked: Vec<(usize, f64)> = scores
            .into_iter()
            .enumerate()
            .filter_map(|(d, s)| s.map(|s| (d, s)))
            .filter(|&(d, s)| s > 0.0 && !excluded.get(d).copied().unwrap_or(false))
            .collect();
        ranked.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.doc_ids[a.0].cmp(&self.doc_ids[b.0]))
        });
        ranked.truncate(params.top_k);
        ranked
    }

    pub fn top_k_documents<S: AsRef<str>>(&self, query: &[S], params: &Bm25Params) -> Vec<(String, f64)> {
        self.top_k_ordinals(query, params, &[])
            .into_iter()
            .map(|(d, s)| (self.doc_ids[d].clone(), s))
            .collect()
    }
}

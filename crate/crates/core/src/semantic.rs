//! Relaxed Word Mover's Distance between n-grams and the span search that
//! finds a near-verbatim occurrence of an n-gram inside one document.
//!
//! The distance from `w` to `v` is one minus the mean, over the content words
//! of `w`, of the best cosine similarity to any content word of `v`. The
//! symmetric form is the larger of the two directions.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_index::{SuffixArrayIndex, TokenId};
use crate::par::Execution;
use crate::stopwords::StopWordList;

/// Word vectors, unit-normalized on load.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    dimension: usize,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Self {
        EmbeddingTable {
            dimension,
            ..Default::default()
        }
    }

    /// Insert a vector. Returns `false` for duplicates (first entry wins) and zero vectors.
    pub fn insert(&mut self, word: &str, vector: &[f64]) -> Result<bool> {
        if vector.len() != self.dimension {
            return Err(Error::invalid(format!(
                "vector for {word:?} has dimension {}, expected {}",
                vector.len(),
                self.dimension
            )));
        }
        if self.index.contains_key(word) {
            return Ok(false);
        }
        let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Ok(false);
        }
        self.index.insert(word.to_string(), self.index.len());
        self.data.extend(vector.iter().map(|x| x / norm));
        Ok(true)
    }

    /// Load a whitespace-separated text table (GloVe / word2vec text layout).
    /// An optional first line `vocab_size dimension` is recognised and skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut table: Option<EmbeddingTable> = None;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message,
            };
            if line_no == 1 && fields.len() == 2 {
                if let (Ok(_), Ok(dim)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                    if dim == 0 {
                        return Err(parse_err("header declares dimension 0".into()));
                    }
                    table = Some(EmbeddingTable::new(dim));
                    continue;
                }
            }
            let word = fields[0];
            let vector = fields[1..]
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| parse_err(format!("bad float: {e}")))?;
            let table = table.get_or_insert_with(|| EmbeddingTable::new(vector.len()));
            if table.dimension == 0 || vector.len() != table.dimension {
                return Err(parse_err(format!(
                    "expected {} components, found {}",
                    table.dimension,
                    vector.len()
                )));
            }
            if table.index.contains_key(word) {
                log::warn!("{}:{line_no}: duplicate word {word:?} ignored", path.display());
            } else if !table.insert(word, &vector)? {
                log::warn!("{}:{line_no}: zero vector for {word:?} rejected", path.display());
            }
        }
        Ok(table.unwrap_or_default())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&i| &self.data[i * self.dimension..(i + 1) * self.dimension])
    }

    /// Cosine similarity with the vocabulary-gap rule: identical strings are
    /// 1.0 whether or not they have a vector; any other pair lacking a vector is 0.0.
    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        if a == b {
            return 1.0;
        }
        match (self.vector(a), self.vector(b)) {
            (Some(x), Some(y)) => dot(x, y).clamp(-1.0, 1.0),
            _ => 0.0,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticMatchConfig {
    /// Distance threshold; a span matches when its symmetric distance is strictly below it.
    pub delta: f64,
    /// Minimum span length in document tokens.
    pub min_span: usize,
}

impl Default for SemanticMatchConfig {
    fn default() -> Self {
        SemanticMatchConfig {
            delta: 0.05,
            min_span: 5,
        }
    }
}

impl SemanticMatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.delta) {
            return Err(Error::invalid(format!("delta must lie in [0, 2], got {}", self.delta)));
        }
        if self.min_span == 0 {
            return Err(Error::invalid("min_span must be at least 1"));
        }
        Ok(())
    }
}

pub fn directional_wmd<S: AsRef<str>>(w: &[S], v: &[S], table: &EmbeddingTable) -> Result<f64> {
    if w.is_empty() || v.is_empty() {
        return Err(Error::UndefinedDistance("empty word sequence"));
    }
    let total: f64 = w
        .iter()
        .map(|wi| {
            v.iter()
                .map(|vj| table.similarity(wi.as_ref(), vj.as_ref()))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum();
    Ok(1.0 - total / w.len() as f64)
}

pub fn symmetric_wmd<S: AsRef<str>>(w: &[S], v: &[S], table: &EmbeddingTable) -> Result<f64> {
    Ok(directional_wmd(w, v, table)?.max(directional_wmd(v, w, table)?))
}

/// A near-verbatim occurrence: document span `[start, end)` and its distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanMatch {
    pub start: usize,
    pub end: usize,
    pub distance: f64,
}

/// First document span (by start, then end) whose symmetric distance to `w`,
/// over content words, is below `config.delta`.
pub fn find_semantic_match<S: AsRef<str>, T: AsRef<str>>(
    w: &[S],
    doc_tokens: &[T],
    config: &SemanticMatchConfig,
    table: &EmbeddingTable,
    stop_words: &StopWordList,
) -> Result<Option<SpanMatch>> {
    if w.len() < config.min_span {
        return Err(Error::invalid(format!(
            "n-gram of length {} is shorter than the minimum span {}",
            w.len(),
            config.min_span
        )));
    }
    let content: Vec<&str> = w
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| stop_words.is_content(t))
        .collect();
    if content.is_empty() {
        return Err(Error::NoContentWords);
    }
    let wc = content.len();
    let mut sims = SpanScanner::new(wc, doc_tokens.len());
    for (j, tok) in doc_tokens.iter().enumerate() {
        let tok = tok.as_ref();
        if stop_words.is_content(tok) {
            sims.set_row(j, content.iter().map(|q| table.similarity(q, tok)));
        }
    }
    Ok(sims.scan(config))
}

/// Token-similarity matrix between the content words of an n-gram and the
/// tokens of one document, plus the span scan over it.
struct SpanScanner {
    wc: usize,
    /// `rows[j * wc + i]` = similarity of n-gram word `i` and document token `j`.
    rows: Vec<f64>,
    content: Vec<bool>,
}

impl SpanScanner {
    fn new(wc: usize, doc_len: usize) -> Self {
        SpanScanner {
            wc,
            rows: vec![0.0; wc * doc_len],
            content: vec![false; doc_len],
        }
    }

    fn set_row(&mut self, j: usize, values: impl Iterator<Item = f64>) {
        self.content[j] = true;
        for (slot, v) in self.rows[j * self.wc..(j + 1) * self.wc].iter_mut().zip(values) {
            *slot = v;
        }
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.rows[j * self.wc..(j + 1) * self.wc]
    }

    /// Prefix sums of per-token row maxima and of content-token counts, plus
    /// the largest row maximum.
    fn prefix_sums(&self) -> (Vec<f64>, Vec<usize>, f64) {
        let n = self.content.len();
        let mut doc_prefix = vec![0.0; n + 1];
        let mut count_prefix = vec![0usize; n + 1];
        let mut best_row_max = f64::NEG_INFINITY;
        for j in 0..n {
            let (add, cnt) = if self.content[j] {
                let m = self.row(j).iter().copied().fold(f64::NEG_INFINITY, f64::max);
                best_row_max = best_row_max.max(m);
                (m, 1)
            } else {
                (0.0, 0)
            };
            doc_prefix[j + 1] = doc_prefix[j] + add;
            count_prefix[j + 1] = count_prefix[j] + cnt;
        }
        (doc_prefix, count_prefix, best_row_max)
    }

    fn scan(&self, config: &SemanticMatchConfig) -> Option<SpanMatch> {
        let n = self.content.len();
        let wc = self.wc;
        let delta = config.delta;
        let min_span = config.min_span;
        if n < min_span {
            return None;
        }
        // Each term of the n-gram side is at most 1, so a word whose best
        // similarity over the remaining document is at most 1 - wc*delta
        // rules out every span. The margin absorbs rounding.
        const MARGIN: f64 = 1e-12;
        let need = wc as f64 * (1.0 - delta) - MARGIN;

        let (doc_prefix, count_prefix, best_row_max) = self.prefix_sums();
        // the document side is a mean of row maxima
        if best_row_max <= 1.0 - delta - MARGIN {
            return None;
        }

        // suffix_max[a * wc + i] = best similarity of word i within [a, n)
        let mut suffix_max = vec![f64::NEG_INFINITY; (n + 1) * wc];
        for a in (0..n).rev() {
            for i in 0..wc {
                let here = if self.content[a] { self.rows[a * wc + i] } else { f64::NEG_INFINITY };
                suffix_max[a * wc + i] = here.max(suffix_max[(a + 1) * wc + i]);
            }
        }

        let mut col_max = vec![f64::NEG_INFINITY; wc];
        for a in 0..=n - min_span {
            let reachable: f64 = suffix_max[a * wc..(a + 1) * wc].iter().sum();
            if !(reachable > need) {
                // spans starting later see a subset of these tokens
                return None;
            }
            col_max.iter_mut().for_each(|c| *c = f64::NEG_INFINITY);
            for b in a + 1..=n {
                let j = b - 1;
                if self.content[j] {
                    for (c, &s) in col_max.iter_mut().zip(self.row(j)) {
                        *c = c.max(s);
                    }
                }
                if b - a < min_span {
                    continue;
                }
                let cnt = count_prefix[b] - count_prefix[a];
                if cnt == 0 {
                    continue;
                }
                let doc_side = 1.0 - (doc_prefix[b] - doc_prefix[a]) / cnt as f64;
                let w_side = 1.0 - col_max.iter().sum::<f64>() / wc as f64;
                let distance = doc_side.max(w_side);
                if distance < delta {
                    return Some(SpanMatch {
                        start: a,
                        end: b,
                        distance,
                    });
                }
            }
        }
        None
    }
}

/// Similarities between the content words of one query text and the content
/// words of its candidate documents, computed once per analysis run.
pub struct SemanticContext<'a> {
    config: SemanticMatchConfig,
    stop_words: &'a StopWordList,
    exec: Execution,
    query_words: HashMap<String, usize>,
    candidates: Vec<CandidateDoc>,
    /// `sims[q * doc_vocab + d]`
    sims: Vec<f64>,
    doc_vocab: usize,
}

struct CandidateDoc {
    ordinal: usize,
    /// Local doc-vocabulary index per token, `None` for stop words.
    words: Vec<Option<u32>>,
    /// Best similarity of each query word anywhere in the document.
    best: Vec<f64>,
}

impl<'a> SemanticContext<'a> {
    /// `candidates` are corpus ordinals in visiting order.
    pub fn new<S: AsRef<str>>(
        query_tokens: &[S],
        candidates: &[usize],
        index: &'a SuffixArrayIndex,
        table: &EmbeddingTable,
        stop_words: &'a StopWordList,
        config: SemanticMatchConfig,
        exec: Execution,
    ) -> Self {
        let mut query_words: HashMap<String, usize> = HashMap::new();
        let mut query_list: Vec<&str> = Vec::new();
        for t in query_tokens.iter().map(AsRef::as_ref) {
            if stop_words.is_content(t) && !query_words.contains_key(t) {
                query_words.insert(t.to_string(), query_list.len());
                query_list.push(t);
            }
        }
        let mut local: HashMap<TokenId, u32> = HashMap::new();
        let mut doc_words: Vec<&str> = Vec::new();
        let mut docs: Vec<CandidateDoc> = candidates
            .iter()
            .map(|&ordinal| {
                let words = index
                    .doc_tokens(ordinal)
                    .iter()
                    .map(|&id| {
                        let word = index.vocab().word(id).unwrap_or("");
                        if !stop_words.is_content(word) {
                            return None;
                        }
                        Some(*local.entry(id).or_insert_with(|| {
                            doc_words.push(word);
                            (doc_words.len() - 1) as u32
                        }))
                    })
                    .collect();
                CandidateDoc {
                    ordinal,
                    words,
                    best: Vec::new(),
                }
            })
            .collect();
        let doc_vocab = doc_words.len();
        let sims: Vec<f64> = exec
            .map(&query_list, |q| {
                doc_words.iter().map(|d| table.similarity(q, d)).collect::<Vec<f64>>()
            })
            .into_iter()
            .flatten()
            .collect();
        let q_len = query_list.len();
        let bests = exec.map(&docs, |doc| {
            let mut best = vec![f64::NEG_INFINITY; q_len];
            for d in doc.words.iter().flatten() {
                for (q, b) in best.iter_mut().enumerate() {
                    *b = b.max(sims[q * doc_vocab + *d as usize]);
                }
            }
            best
        });
        for (doc, best) in docs.iter_mut().zip(bests) {
            doc.best = best;
        }
        SemanticContext {
            config,
            stop_words,
            exec,
            query_words,
            candidates: docs,
            sims,
            doc_vocab,
        }
    }

    pub fn config(&self) -> &SemanticMatchConfig {
        &self.config
    }

    pub fn candidate_ordinals(&self) -> impl Iterator<Item = usize> + '_ {
        self.candidates.iter().map(|c| c.ordinal)
    }

    /// First candidate (in visiting order) holding a semantic match for `w`,
    /// as `(corpus ordinal, span)`. `Ok(None)` when nothing matches.
    pub fn find<S: AsRef<str>>(&self, w: &[S]) -> Result<Option<(usize, SpanMatch)>> {
        if w.len() < self.config.min_span {
            return Err(Error::invalid(format!(
                "n-gram of length {} is shorter than the minimum span {}",
                w.len(),
                self.config.min_span
            )));
        }
        let mut qs = Vec::with_capacity(w.len());
        for t in w.iter().map(AsRef::as_ref) {
            if self.stop_words.is_content(t) {
                match self.query_words.get(t) {
                    Some(&q) => qs.push(q),
                    None => {
                        return Err(Error::invalid(format!(
                            "word {t:?} is not part of the query this context was built for"
                        )))
                    }
                }
            }
        }
        if qs.is_empty() {
            return Err(Error::NoContentWords);
        }
        let wc = qs.len();
        let floor = 1.0 - wc as f64 * self.config.delta - 1e-12;
        let hit = self.exec.find_first(self.candidates.len(), |c| {
            let doc = &self.candidates[c];
            if qs.iter().any(|&q| doc.best[q] <= floor) {
                return None;
            }
            let mut scanner = SpanScanner::new(wc, doc.words.len());
            for (j, word) in doc.words.iter().enumerate() {
                if let Some(d) = word {
                    let d = *d as usize;
                    scanner.set_row(j, qs.iter().map(|&q| self.sims[q * self.doc_vocab + d]));
                }
            }
            scanner.scan(&self.config)
        });
        Ok(hit.map(|(c, span)| (self.candidates[c].ordinal, span)))
    }
}

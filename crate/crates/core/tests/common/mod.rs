//! Fixtures and independent reference implementations shared by the
//! integration and acceptance suites. Nothing here calls into the code paths
//! it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use remixtrace_core::corpus::Corpus;
use remixtrace_core::oracle::{MatchKind, MatchResult, NgramOracle, OracleStats};
use remixtrace_core::Result;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

/// Up to `max_docs` documents of up to `max_len` tokens over a small vocabulary.
pub fn random_docs(rng: &mut impl Rng, max_docs: usize, max_len: usize, vocab: usize) -> Vec<Vec<String>> {
    let n = rng.gen_range(1..=max_docs);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(0..=max_len);
            (0..len).map(|_| format!("w{}", rng.gen_range(0..vocab))).collect()
        })
        .collect()
}

pub fn corpus_of(docs: &[Vec<String>]) -> Corpus {
    Corpus::from_texts(docs.iter().enumerate().map(|(i, d)| (format!("d{i:02}"), d.join(" ")))).unwrap()
}

/// A query stitched from corpus pieces and random words, so that it has
/// matches of assorted lengths.
pub fn random_query(rng: &mut impl Rng, docs: &[Vec<String>], max_len: usize, vocab: usize) -> Vec<String> {
    let target = rng.gen_range(0..=max_len);
    let mut q = Vec::new();
    while q.len() < target {
        let doc = docs.choose(rng).unwrap();
        if rng.gen_bool(0.6) && !doc.is_empty() {
            let a = rng.gen_range(0..doc.len());
            let b = (a + rng.gen_range(1..12)).min(doc.len());
            q.extend_from_slice(&doc[a..b]);
        } else {
            q.push(format!("w{}", rng.gen_range(0..vocab + 2)));
        }
    }
    q.truncate(target);
    q
}

/// Exact occurrence test by linear scan over every document.
pub struct ScanOracle {
    docs: Vec<(String, Vec<String>)>,
    l_min: usize,
    calls: AtomicU64,
    hits: AtomicU64,
}

impl ScanOracle {
    pub fn new(corpus: &Corpus, l_min: usize) -> Self {
        ScanOracle {
            docs: corpus.documents().iter().map(|d| (d.id.clone(), d.tokens.clone())).collect(),
            l_min,
            calls: AtomicU64::new(0),
            hits: AtomicU64::new(0),
        }
    }

    pub fn count(&self, ngram: &[String]) -> usize {
        self.docs
            .iter()
            .map(|(_, t)| t.windows(ngram.len()).filter(|w| *w == ngram).count())
            .sum()
    }

    pub fn sources(&self, ngram: &[String]) -> Vec<String> {
        let mut ids: Vec<String> = self
            .docs
            .iter()
            .filter(|(_, t)| t.windows(ngram.len()).any(|w| w == ngram))
            .map(|(id, _)| id.clone())
            .collect();
        ids.sort();
        ids
    }
}

impl NgramOracle for ScanOracle {
    fn occurs(&self, ngram: &[String]) -> Result<MatchResult> {
        assert!(ngram.len() >= self.l_min);
        self.calls.fetch_add(1, Ordering::Relaxed);
        let src = self.sources(ngram);
        if src.is_empty() {
            Ok(MatchResult::none())
        } else {
            self.hits.fetch_add(1, Ordering::Relaxed);
            Ok(MatchResult::exact(src))
        }
    }

    fn stats(&self) -> OracleStats {
        OracleStats {
            call_count: self.calls.load(Ordering::Relaxed),
            exact_hits: self.hits.load(Ordering::Relaxed),
            semantic_hits: 0,
            cache_hits: 0,
        }
    }
}

/// Deterministic pseudo-random occurrence test: no monotonicity at all.
pub struct HashOracle {
    pub seed: u64,
    pub rate: u64,
    calls: AtomicU64,
}

impl HashOracle {
    pub fn new(seed: u64, rate_percent: u64) -> Self {
        HashOracle { seed, rate: rate_percent, calls: AtomicU64::new(0) }
    }

    pub fn truth(&self, ngram: &[String]) -> bool {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.seed.hash(&mut h);
        ngram.hash(&mut h);
        h.finish() % 100 < self.rate
    }
}

impl NgramOracle for HashOracle {
    fn occurs(&self, ngram: &[String]) -> Result<MatchResult> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(if self.truth(ngram) {
            MatchResult::semantic("h".into(), (0, ngram.len()), 0.0)
        } else {
            MatchResult::none()
        })
    }

    fn stats(&self) -> OracleStats {
        OracleStats { call_count: self.calls.load(Ordering::Relaxed), ..Default::default() }
    }
}

pub fn covered_positions(n: usize, spans: impl IntoIterator<Item = (usize, usize)>) -> BTreeSet<usize> {
    let mut set = BTreeSet::new();
    for (s, e) in spans {
        assert!(e <= n);
        set.extend(s..e);
    }
    set
}

// ---------------------------------------------------------------- semantic

/// Raw (unnormalized) word vectors: a few clusters of near-synonyms, a few
/// isolated words, and some words deliberately left without a vector.
pub struct VectorFixture {
    pub vectors: HashMap<String, Vec<f64>>,
    pub clusters: Vec<Vec<String>>,
    pub oov: Vec<String>,
    pub stop: Vec<String>,
}

impl VectorFixture {
    pub fn new(rng: &mut impl Rng, dim: usize, n_clusters: usize, per_cluster: usize, noise: f64) -> Self {
        let mut vectors = HashMap::new();
        let mut clusters = Vec::new();
        for c in 0..n_clusters {
            let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut members = Vec::new();
            for m in 0..per_cluster {
                let word = format!("c{c}m{m}");
                let v: Vec<f64> = center.iter().map(|x| x + rng.gen_range(-noise..noise)).collect();
                vectors.insert(word.clone(), v);
                members.push(word);
            }
            clusters.push(members);
        }
        VectorFixture {
            vectors,
            clusters,
            oov: vec!["oova".into(), "oovb".into()],
            stop: vec!["the".into(), "a".into(), "of".into(), "on".into()],
        }
    }

    pub fn content_vocab(&self) -> Vec<String> {
        let mut v: Vec<String> = self.clusters.iter().flatten().cloned().collect();
        v.extend(self.oov.iter().cloned());
        v
    }

    pub fn random_word(&self, rng: &mut impl Rng) -> String {
        if rng.gen_bool(0.15) {
            self.stop.choose(rng).unwrap().clone()
        } else {
            self.content_vocab().choose(rng).unwrap().clone()
        }
    }

    /// Same-cluster substitute (or the word itself).
    pub fn synonym(&self, rng: &mut impl Rng, word: &str) -> String {
        self.clusters
            .iter()
            .find(|c| c.iter().any(|w| w == word))
            .map(|c| c.choose(rng).unwrap().clone())
            .unwrap_or_else(|| word.to_string())
    }

    /// Cosine from the raw vectors with the vocabulary-gap rule.
    pub fn cosine(&self, a: &str, b: &str) -> f64 {
        if a == b {
            return 1.0;
        }
        match (self.vectors.get(a), self.vectors.get(b)) {
            (Some(x), Some(y)) => {
                let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
                let nx = x.iter().map(|p| p * p).sum::<f64>().sqrt();
                let ny = y.iter().map(|p| p * p).sum::<f64>().sqrt();
                (dot / (nx * ny)).clamp(-1.0, 1.0)
            }
            _ => 0.0,
        }
    }

    pub fn table(&self) -> remixtrace_core::semantic::EmbeddingTable {
        let dim = self.vectors.values().next().unwrap().len();
        let mut t = remixtrace_core::semantic::EmbeddingTable::new(dim);
        let mut keys: Vec<&String> = self.vectors.keys().collect();
        keys.sort();
        for k in keys {
            t.insert(k, &self.vectors[k]).unwrap();
        }
        t
    }
}

/// Directional distance from `w` to `v`, straight from the definition.
pub fn ref_directional(fx: &VectorFixture, w: &[String], v: &[String]) -> f64 {
    let sum: f64 = w
        .iter()
        .map(|a| v.iter().map(|b| fx.cosine(a, b)).fold(f64::NEG_INFINITY, f64::max))
        .sum();
    1.0 - sum / w.len() as f64
}

/// Conceptual span search: every span, both directions recomputed from scratch.
pub fn ref_span_search(
    fx: &VectorFixture,
    w: &[String],
    doc: &[String],
    min_span: usize,
    delta: f64,
    stop: &HashSet<String>,
) -> Option<(usize, usize, f64)> {
    let wc: Vec<String> = w.iter().filter(|t| !stop.contains(*t)).cloned().collect();
    assert!(!wc.is_empty());
    for a in 0..doc.len() {
        for b in a + min_span..=doc.len() {
            let span: Vec<String> = doc[a..b].iter().filter(|t| !stop.contains(*t)).cloned().collect();
            if span.is_empty() {
                continue;
            }
            let d = ref_directional(fx, &span, &wc).max(ref_directional(fx, &wc, &span));
            if d < delta {
                return Some((a, b, d));
            }
        }
    }
    None
}

// ---------------------------------------------------------------- coverage

/// Best coverage achievable with `n` sets, by exhaustive subset enumeration.
pub fn brute_force_max_cover(sets: &[BTreeSet<usize>], n: usize) -> usize {
    let k = sets.len();
    let mut best = 0;
    for mask in 0u32..(1 << k) {
        if mask.count_ones() as usize > n {
            continue;
        }
        let mut u = BTreeSet::new();
        for (i, s) in sets.iter().enumerate() {
            if mask & (1 << i) != 0 {
                u.extend(s.iter().copied());
            }
        }
        best = best.max(u.len());
    }
    best
}

// ---------------------------------------------------------------- detection

pub fn pairwise_auroc(h: &[f64], m: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &a in h {
        for &b in m {
            if a > b {
                wins += 1.0;
            } else if a == b {
                wins += 0.5;
            }
        }
    }
    wins / (h.len() * m.len()) as f64
}

// ---------------------------------------------------------------- desk-scale corpora

/// Zipf-distributed synthetic corpus: `n_docs` documents of `doc_len` words
/// over `vocab` word types.
pub struct SyntheticCorpus {
    pub docs: Vec<Vec<String>>,
    pub vocab: Vec<String>,
    pub unigram: WeightedIndex<f64>,
}

impl SyntheticCorpus {
    pub fn generate(rng: &mut impl Rng, target_bytes: usize, doc_len: usize, vocab: usize) -> Self {
        let vocab_words: Vec<String> = (0..vocab).map(|i| synthetic_word(i)).collect();
        let weights: Vec<f64> = (1..=vocab).map(|r| 1.0 / r as f64).collect();
        let unigram = WeightedIndex::new(&weights).unwrap();
        let mut docs = Vec::new();
        let mut bytes = 0;
        while bytes < target_bytes {
            let doc: Vec<String> = (0..doc_len).map(|_| vocab_words[unigram.sample(rng)].clone()).collect();
            bytes += doc.iter().map(|w| w.len() + 1).sum::<usize>();
            docs.push(doc);
        }
        SyntheticCorpus { docs, vocab: vocab_words, unigram }
    }

    pub fn corpus(&self) -> Corpus {
        corpus_of(&self.docs)
    }

    pub fn bytes(&self) -> usize {
        self.docs.iter().flatten().map(|w| w.len() + 1).sum()
    }

    /// Concatenation of random corpus `piece`-grams.
    pub fn stitched(&self, rng: &mut impl Rng, len: usize, piece: usize) -> Vec<String> {
        let mut out = Vec::with_capacity(len + piece);
        while out.len() < len {
            let d = self.docs.choose(rng).unwrap();
            let a = rng.gen_range(0..=d.len() - piece);
            out.extend_from_slice(&d[a..a + piece]);
        }
        out.truncate(len);
        out
    }

    /// Novel word sequence with the corpus unigram distribution.
    pub fn novel(&self, rng: &mut impl Rng, len: usize) -> Vec<String> {
        (0..len).map(|_| self.vocab[self.unigram.sample(rng)].clone()).collect()
    }
}

/// Pronounceable, distinct, alphabetic word for rank `i`.
pub fn synthetic_word(mut i: usize) -> String {
    const C: &[u8] = b"bcdfghjklmnprstvz";
    const V: &[u8] = b"aeiou";
    let mut s = String::new();
    loop {
        s.push(C[i % C.len()] as char);
        i /= C.len();
        s.push(V[i % V.len()] as char);
        i /= V.len();
        if i == 0 {
            break;
        }
        i -= 1;
    }
    s
}

pub fn is_match(kind: MatchKind) -> bool {
    kind != MatchKind::None
}

//! Suffix array over the concatenated corpus token stream.
//!
//! Documents are laid out back to back with a boundary sentinel between
//! neighbours. Query n-grams never contain the sentinel, so an occurrence can
//! never straddle two documents.

use std::collections::HashMap;
use std::ops::Range;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::par::Execution;

pub type TokenId = u32;

/// Token id reserved for document boundaries. Never assigned to a word.
pub const SENTINEL: TokenId = TokenId::MAX;

#[derive(Debug, Clone, Default)]
pub struct Vocab {
    words: Vec<String>,
    ids: HashMap<String, TokenId>,
}

impl Vocab {
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        let mut ids = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if ids.insert(w.clone(), i as TokenId).is_some() {
                return Err(Error::Integrity(format!("duplicate vocabulary entry {w:?}")));
            }
        }
        Ok(Vocab { words, ids })
    }

    fn intern(&mut self, word: &str) -> TokenId {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = self.words.len() as TokenId;
        self.words.push(word.to_string());
        self.ids.insert(word.to_string(), id);
        id
    }

    pub fn id(&self, word: &str) -> Option<TokenId> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: TokenId) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuffixArrayIndex {
    pub(crate) vocab: Vocab,
    pub(crate) token_ids: Vec<TokenId>,
    pub(crate) suffix_array: Vec<u64>,
    /// Start offset of each document in `token_ids`, in corpus order.
    pub(crate) doc_offsets: Vec<u64>,
    pub(crate) doc_lens: Vec<u64>,
    pub(crate) doc_ids: Vec<String>,
}

impl SuffixArrayIndex {
    pub fn build(corpus: &Corpus) -> Result<Self> {
        Self::build_with(corpus, Execution::default())
    }

    pub fn build_with(corpus: &Corpus, exec: Execution) -> Result<Self> {
        let docs = corpus.documents();
        let stream_len = corpus.total_tokens() + docs.len().saturating_sub(1);
        if stream_len >= u32::MAX as usize {
            return Err(Error::Resource(format!(
                "token stream of {stream_len} tokens exceeds the 32-bit rank space"
            )));
        }
        let mut vocab = Vocab::default();
        let mut token_ids = Vec::new();
        token_ids
            .try_reserve_exact(stream_len)
            .map_err(|e| Error::Resource(e.to_string()))?;
        let mut doc_offsets = Vec::with_capacity(docs.len());
        let mut doc_lens = Vec::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            if i > 0 {
                token_ids.push(SENTINEL);
            }
            doc_offsets.push(token_ids.len() as u64);
            doc_lens.push(doc.tokens.len() as u64);
            token_ids.extend(doc.tokens.iter().map(|t| vocab.intern(t)));
        }
        let suffix_array = build_suffix_array(&token_ids, exec);
        Ok(SuffixArrayIndex {
            vocab,
            token_ids,
            suffix_array,
            doc_offsets,
            doc_lens,
            doc_ids: docs.iter().map(|d| d.id.clone()).collect(),
        })
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn stream_len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn token_ids(&self) -> &[TokenId] {
        &self.token_ids
    }

    pub fn suffix_array(&self) -> &[u64] {
        &self.suffix_array
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_id(&self, ordinal: usize) -> &str {
        &self.doc_ids[ordinal]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_tokens(&self, ordinal: usize) -> &[TokenId] {
        let start = self.doc_offsets[ordinal] as usize;
        &self.token_ids[start..start + self.doc_lens[ordinal] as usize]
    }

    /// Document ordinal owning a stream position, `None` for sentinels.
    pub fn doc_at(&self, pos: usize) -> Option<usize> {
        let d = self.doc_offsets.partition_point(|&o| o as usize <= pos);
        if d == 0 {
            return None;
        }
        let d = d - 1;
        (pos < (self.doc_offsets[d] + self.doc_lens[d]) as usize).then_some(d)
    }

    /// Map words to ids; `None` if any word is out of vocabulary.
    pub fn encode<S: AsRef<str>>(&self, ngram: &[S]) -> Option<Vec<TokenId>> {
        ngram.iter().map(|w| self.vocab.id(w.as_ref())).collect()
    }

    /// Range of suffix-array slots whose suffixes start with `ids`.
    pub fn sa_range(&self, ids: &[TokenId]) -> Range<usize> {
        let m = ids.len();
        let prefix = |p: u64| {
            let p = p as usize;
            &self.token_ids[p..(p + m).min(self.token_ids.len())]
        };
        let lo = self.suffix_array.partition_point(|&p| prefix(p) < ids);
        let hi = lo + self.suffix_array[lo..].partition_point(|&p| prefix(p) <= ids);
        lo..hi
    }

    pub fn count_ids(&self, ids: &[TokenId]) -> usize {
        self.sa_range(ids).len()
    }

    pub fn count_ngram<S: AsRef<str>>(&self, ngram: &[S]) -> Result<usize> {
        if ngram.is_empty() {
            return Err(Error::invalid("n-gram must be nonempty"));
        }
        Ok(self.encode(ngram).map_or(0, |ids| self.count_ids(&ids)))
    }

    pub fn contains_ngram<S: AsRef<str>>(&self, ngram: &[S]) -> Result<bool> {
        Ok(self.count_ngram(ngram)? > 0)
    }

    /// Whether `ids` occurs in any document for which `excluded` is false.
    pub fn contains_ids_excluding(&self, ids: &[TokenId], excluded: &[bool]) -> bool {
        let range = self.sa_range(ids);
        if excluded.is_empty() {
            return !range.is_empty();
        }
        self.suffix_array[range].iter().any(|&p| {
            self.doc_at(p as usize)
                .is_some_and(|d| !excluded.get(d).copied().unwrap_or(false))
        })
    }

    /// Ordinals of documents containing `ids`, ascending by ordinal, no excluded ones.
    pub fn doc_ordinals_with(&self, ids: &[TokenId], excluded: &[bool]) -> Vec<usize> {
        let mut docs: Vec<usize> = self.suffix_array[self.sa_range(ids)]
            .iter()
            .filter_map(|&p| self.doc_at(p as usize))
            .filter(|&d| !excluded.get(d).copied().unwrap_or(false))
            .collect();
        docs.sort_unstable();
        docs.dedup();
        docs
    }

    /// Ids of documents containing the n-gram, ascending by id, at most `cap`.
    pub fn locate_documents<S: AsRef<str>>(&self, ngram: &[S], cap: usize) -> Result<Vec<String>> {
        if ngram.is_empty() {
            return Err(Error::invalid("n-gram must be nonempty"));
        }
        Ok(match self.encode(ngram) {
            Some(ids) => self.locate_ids(&ids, cap, &[]),
            None => Vec::new(),
        })
    }

    pub fn locate_ids(&self, ids: &[TokenId], cap: usize, excluded: &[bool]) -> Vec<String> {
        let mut found: Vec<&str> = self
            .doc_ordinals_with(ids, excluded)
            .into_iter()
            .map(|d| self.doc_ids[d].as_str())
            .collect();
        found.sort_unstable();
        found.truncate(cap);
        found.into_iter().map(str::to_string).collect()
    }
}

/// Prefix-doubling suffix sort over token ids.
///
/// Ranks are refined on `(rank[i], rank[i + k])` pairs until all are distinct.
/// Suffixes that run off the end rank below every token.
pub(crate) fn build_suffix_array(tokens: &[TokenId], exec: Execution) -> Vec<u64> {
    let n = tokens.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sa: Vec<u32> = (0..n as u32).collect();
    exec.sort_unstable_by(&mut sa, |&a, &b| {
        tokens[a as usize].cmp(&tokens[b as usize]).then(a.cmp(&b))
    });
    // ranks start at 1; 0 is the past-the-end rank
    let mut rank = vec![0u32; n];
    let mut r = 0u32;
    for (k, &p) in sa.iter().enumerate() {
        if k == 0 || tokens[p as usize] != tokens[sa[k - 1] as usize] {
            r += 1;
        }
        rank[p as usize] = r;
    }
    let mut k = 1usize;
    let mut keyed: Vec<(u64, u32)> = Vec::with_capacity(n);
    while (r as usize) < n && k < n {
        keyed.clear();
        keyed.extend((0..n).map(|i| {
            let second = if i + k < n { rank[i + k] } else { 0 };
            (((rank[i] as u64) << 32) | second as u64, i as u32)
        }));
        exec.sort_unstable_by(&mut keyed, |a, b| a.cmp(b));
        r = 0;
        for j in 0..n {
            if j == 0 || keyed[j].0 != keyed[j - 1].0 {
                r += 1;
            }
            rank[keyed[j].1 as usize] = r;
        }
        for (slot, &(_, p)) in sa.iter_mut().zip(keyed.iter()) {
            *slot = p;
        }
        k *= 2;
    }
    sa.into_iter().map(u64::from).collect()
}

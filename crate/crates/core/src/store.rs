//! Built indexes and their on-disk layout.
//!
//! An index directory holds:
//!
//! - `manifest.json`: format version, token count, document count and a
//!   SHA-256 of the corpus content (document ids and tokens)
//! - `vocab.txt`: one token per line, line number (from 0) = token id
//! - `tokens.u32le`: the token stream, sentinels included
//! - `suffix_array.u64le`: suffix array positions
//! - `documents.jsonl`: per document `id`, `offset`, `length`, `text`, `meta`
//! - `bm25.json`: the inverted index
//!
//! Loading recomputes the content hash from both the token stream and the
//! stored texts and refuses a mismatch.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bm25::InvertedIndex;
use crate::corpus::{Corpus, Document, DocumentMeta};
use crate::error::{Error, Result};
use crate::exact_index::{SuffixArrayIndex, Vocab, SENTINEL};
use crate::par::Execution;

pub const FORMAT_VERSION: u32 = 1;

const MANIFEST: &str = "manifest.json";
const VOCAB: &str = "vocab.txt";
const TOKENS: &str = "tokens.u32le";
const SUFFIXES: &str = "suffix_array.u64le";
const DOCUMENTS: &str = "documents.jsonl";
const BM25: &str = "bm25.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub token_count: u64,
    pub doc_count: u64,
    pub vocab_size: u64,
    pub content_hash: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct DocEntry {
    id: String,
    offset: u64,
    length: u64,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<DocumentMeta>,
}

/// Corpus plus both indexes over it.
#[derive(Debug, Clone, Default)]
pub struct IndexBundle {
    pub corpus: Corpus,
    pub exact: SuffixArrayIndex,
    pub bm25: InvertedIndex,
}

impl IndexBundle {
    pub fn build(corpus: Corpus, exec: Execution) -> Result<Self> {
        let exact = SuffixArrayIndex::build_with(&corpus, exec)?;
        let bm25 = InvertedIndex::build(&corpus);
        Ok(IndexBundle { corpus, exact, bm25 })
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            version: FORMAT_VERSION,
            token_count: self.exact.stream_len() as u64,
            doc_count: self.corpus.len() as u64,
            vocab_size: self.exact.vocab().len() as u64,
            content_hash: corpus_hash(&self.corpus),
        }
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        write_with(&dir.join(VOCAB), |w| {
            for word in self.exact.vocab().words() {
                writeln!(w, "{word}")?;
            }
            Ok(())
        })?;
        write_with(&dir.join(TOKENS), |w| {
            for t in self.exact.token_ids() {
                w.write_all(&t.to_le_bytes())?;
            }
            Ok(())
        })?;
        write_with(&dir.join(SUFFIXES), |w| {
            for p in self.exact.suffix_array() {
                w.write_all(&p.to_le_bytes())?;
            }
            Ok(())
        })?;
        write_with(&dir.join(DOCUMENTS), |w| {
            for (i, doc) in self.corpus.documents().iter().enumerate() {
                let entry = DocEntry {
                    id: doc.id.clone(),
                    offset: self.exact.doc_offsets[i],
                    length: self.exact.doc_lens[i],
                    text: doc.text.clone(),
                    meta: doc.meta.clone(),
                };
                serde_json::to_writer(&mut *w, &entry)?;
                w.write_all(b"\n")?;
            }
            Ok(())
        })?;
        write_with(&dir.join(BM25), |w| Ok(serde_json::to_writer(w, &self.bm25)?))?;
        write_with(&dir.join(MANIFEST), |w| {
            serde_json::to_writer_pretty(&mut *w, &self.manifest())?;
            Ok(w.write_all(b"\n")?)
        })
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: Manifest = serde_json::from_slice(&read_file(&dir.join(MANIFEST))?)?;
        if manifest.version != FORMAT_VERSION {
            return Err(Error::Integrity(format!(
                "index format version {} is not supported (expected {FORMAT_VERSION})",
                manifest.version
            )));
        }

        let vocab_path = dir.join(VOCAB);
        let file = File::open(&vocab_path).map_err(|e| Error::io(&vocab_path, e))?;
        let words = BufReader::new(file)
            .lines()
            .collect::<std::io::Result<Vec<String>>>()
            .map_err(|e| Error::io(&vocab_path, e))?;
        let vocab = Vocab::from_words(words)?;

        let token_ids: Vec<u32> = read_file(&dir.join(TOKENS))?
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let suffix_array: Vec<u64> = read_file(&dir.join(SUFFIXES))?
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if token_ids.len() as u64 != manifest.token_count || suffix_array.len() != token_ids.len() {
            return Err(Error::Integrity(format!(
                "manifest declares {} tokens, found {} tokens and {} suffixes",
                manifest.token_count,
                token_ids.len(),
                suffix_array.len()
            )));
        }
        let mut seen = vec![false; token_ids.len()];
        for &p in &suffix_array {
            match seen.get_mut(p as usize) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::Integrity("suffix array is not a permutation".into())),
            }
        }
        if token_ids
            .iter()
            .any(|&t| t != SENTINEL && t as usize >= vocab.len())
        {
            return Err(Error::Integrity("token id outside the vocabulary".into()));
        }

        let docs_path = dir.join(DOCUMENTS);
        let file = File::open(&docs_path).map_err(|e| Error::io(&docs_path, e))?;
        let mut documents = Vec::new();
        let (mut doc_offsets, mut doc_lens, mut doc_ids) = (Vec::new(), Vec::new(), Vec::new());
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(&docs_path, e))?;
            let entry: DocEntry = serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: docs_path.clone(),
                line: i + 1,
                message: e.to_string(),
            })?;
            if entry.offset + entry.length > token_ids.len() as u64 {
                return Err(Error::Integrity(format!("document {:?} lies outside the token stream", entry.id)));
            }
            doc_offsets.push(entry.offset);
            doc_lens.push(entry.length);
            doc_ids.push(entry.id.clone());
            let mut doc = Document::new(entry.id, entry.text);
            doc.meta = entry.meta;
            documents.push(doc);
        }
        let corpus = Corpus::from_documents(documents)?;
        let exact = SuffixArrayIndex {
            vocab,
            token_ids,
            suffix_array,
            doc_offsets,
            doc_lens,
            doc_ids,
        };
        let text_hash = corpus_hash(&corpus);
        let stream_hash = stream_hash(&exact);
        if text_hash != manifest.content_hash || stream_hash != manifest.content_hash {
            return Err(Error::Integrity(format!(
                "content hash mismatch: manifest {}, documents {text_hash}, token stream {stream_hash}",
                manifest.content_hash
            )));
        }
        let bm25: InvertedIndex = serde_json::from_slice(&read_file(&dir.join(BM25))?)?;
        if bm25.doc_count() != corpus.len() {
            return Err(Error::Integrity("bm25 index does not match the corpus".into()));
        }
        Ok(IndexBundle { corpus, exact, bm25 })
    }
}

fn hash_docs<'a, I, T>(docs: I) -> String
where
    I: Iterator<Item = (&'a str, T)>,
    T: Iterator<Item = &'a str>,
{
    let mut h = Sha256::new();
    for (id, tokens) in docs {
        h.update(id.as_bytes());
        h.update([0u8]);
        for t in tokens {
            h.update(t.as_bytes());
            h.update([b' ']);
        }
        h.update([0xffu8]);
    }
    hex::encode(h.finalize())
}

pub fn corpus_hash(corpus: &Corpus) -> String {
    hash_docs(
        corpus
            .documents()
            .iter()
            .map(|d| (d.id.as_str(), d.tokens.iter().map(String::as_str))),
    )
}

fn stream_hash(index: &SuffixArrayIndex) -> String {
    hash_docs((0..index.doc_count()).map(|d| {
        (
            index.doc_id(d),
            index
                .doc_tokens(d)
                .iter()
                .map(move |&t| index.vocab().word(t).unwrap_or("\u{0}")),
        )
    }))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

fn write_with<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::io("<stream>", e)
    }
}

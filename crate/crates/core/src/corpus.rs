//! Reference corpus and query text ingestion.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default per-document token cap.
pub const DEFAULT_MAX_DOC_TOKENS: usize = 1_000_000;

/// Lowercase maximal runs of alphanumeric characters. Everything else separates.
///
/// Lowercasing can expand a character into several (e.g. `İ`); only the
/// alphanumeric part of the expansion is kept so the output is a fixed point.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase().filter(|c| c.is_alphanumeric()));
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
    /// Any other keys, kept as-is.
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl DocumentMeta {
    pub fn is_empty(&self) -> bool {
        self.author.is_none() && self.title.is_none() && self.date.is_none() && self.extra.is_empty()
    }
}

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<DocumentMeta>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub meta: Option<DocumentMeta>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        Document {
            id: id.into(),
            tokens: tokenize(&text),
            text,
            meta: None,
        }
    }

    pub fn with_meta(mut self, meta: DocumentMeta) -> Self {
        self.meta = Some(meta);
        self
    }
}

/// An immutable, ordered set of documents with unique ids.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    by_id: HashMap<String, usize>,
    total_tokens: usize,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from documents, rejecting duplicate ids and over-long documents.
    pub fn from_documents(docs: impl IntoIterator<Item = Document>) -> Result<Self> {
        let mut corpus = Corpus::new();
        for doc in docs {
            corpus.push(doc, DEFAULT_MAX_DOC_TOKENS)?;
        }
        Ok(corpus)
    }

    /// Convenience for tests and fixtures: `(id, text)` pairs.
    pub fn from_texts<I, S, T>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        Self::from_documents(pairs.into_iter().map(|(id, text)| Document::new(id, text)))
    }

    fn push(&mut self, doc: Document, max_tokens: usize) -> Result<()> {
        if doc.tokens.len() > max_tokens {
            return Err(Error::DocumentTooLong {
                id: doc.id,
                tokens: doc.tokens.len(),
                cap: max_tokens,
            });
        }
        if self.by_id.contains_key(&doc.id) {
            return Err(Error::DuplicateId(doc.id));
        }
        self.by_id.insert(doc.id.clone(), self.documents.len());
        self.total_tokens += doc.tokens.len();
        self.documents.push(doc);
        Ok(())
    }

    pub fn ingest_jsonl(path: impl AsRef<Path>) -> Result<Self> {
        Self::ingest_jsonl_with_cap(path, DEFAULT_MAX_DOC_TOKENS)
    }

    pub fn ingest_jsonl_with_cap(path: impl AsRef<Path>, max_doc_tokens: usize) -> Result<Self> {
        let path = path.as_ref();
        let mut corpus = Corpus::new();
        for record in read_records(path)? {
            let (line, record) = record?;
            let doc = Document {
                id: record.id,
                tokens: tokenize(&record.text),
                text: record.text,
                meta: record.meta,
            };
            corpus.push(doc, max_doc_tokens).map_err(|e| match e {
                Error::DuplicateId(id) => Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("duplicate document id {id:?}"),
                },
                other => other,
            })?;
        }
        Ok(corpus)
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn total_tokens(&self) -> usize {
        self.total_tokens
    }

    pub fn get_document(&self, id: &str) -> Result<&Document> {
        self.position(id)
            .map(|i| &self.documents[i])
            .ok_or_else(|| Error::NotFound(id.to_string()))
    }

    /// Ordinal of a document id within the corpus.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }
}

/// Iterate the records of a JSON-lines file with their 1-based line numbers.
/// Blank lines are skipped.
pub fn read_records(
    path: &Path,
) -> Result<impl Iterator<Item = Result<(usize, Record)>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let path = path.to_path_buf();
    Ok(reader
        .split(b'\n')
        .enumerate()
        .filter_map(move |(i, bytes)| {
            let line_no = i + 1;
            let bytes = match bytes {
                Ok(b) => b,
                Err(e) => return Some(Err(Error::io(&path, e))),
            };
            let parse_err = |message: String| Error::Parse {
                path: path.clone(),
                line: line_no,
                message,
            };
            let line = match std::str::from_utf8(&bytes) {
                Ok(s) => s.trim_end_matches('\r'),
                Err(e) => return Some(Err(parse_err(format!("invalid UTF-8: {e}")))),
            };
            if line.trim().is_empty() {
                return None;
            }
            Some(
                serde_json::from_str::<Record>(line)
                    .map(|r| (line_no, r))
                    .map_err(|e| parse_err(e.to_string())),
            )
        }))
}

/// A text under analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryText {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub meta: Option<DocumentMeta>,
}

impl QueryText {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        QueryText {
            id: id.into(),
            tokens: tokenize(&text),
            text,
            meta: None,
        }
    }

    pub fn from_tokens(id: impl Into<String>, tokens: Vec<String>) -> Self {
        QueryText {
            id: id.into(),
            text: tokens.join(" "),
            tokens,
            meta: None,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Load query texts from a file: `.jsonl`/`.json` files hold corpus-style
    /// records, anything else is one plain-text query named after the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Vec<QueryText>> {
        let path = path.as_ref();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if matches!(ext, "jsonl" | "json") {
            read_records(path)?
                .map(|r| {
                    r.map(|(_, rec)| QueryText {
                        id: rec.id,
                        tokens: tokenize(&rec.text),
                        text: rec.text,
                        meta: rec.meta,
                    })
                })
                .collect()
        } else {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let text = String::from_utf8(bytes).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("invalid UTF-8: {e}"),
            })?;
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("query")
                .to_string();
            Ok(vec![QueryText::new(id, text)])
        }
    }
}

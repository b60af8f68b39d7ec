//! Reconstructs a text from verbatim and near-verbatim snippets of a
//! reference corpus and scores how much of it is left unexplained.
//!
//! The pieces, bottom up:
//!
//! - [`corpus`]: documents, query texts, tokenization
//! - [`exact_index`]: suffix array for exact n-gram lookups
//! - [`bm25`]: candidate retrieval for the semantic search
//! - [`semantic`]: relaxed Word Mover's Distance and span search
//! - [`oracle`]: the occurrence test combining both
//! - [`dj_search`]: longest match per start position in linear oracle calls
//! - [`metric`]: L-uniqueness curve and Creativity Index
//! - [`attribution`]: per-document coverage and greedy top-N selection
//! - [`dedup`]: excluding documents that copy or cite the query
//! - [`detection`]: AUROC and Mann-Whitney U over score sets
//! - [`report`], [`pipeline`], [`store`]: orchestration and I/O

pub mod attribution;
pub mod bm25;
pub mod corpus;
pub mod dedup;
pub mod detection;
pub mod dj_search;
pub mod error;
pub mod exact_index;
pub mod metric;
pub mod oracle;
pub mod par;
pub mod pipeline;
pub mod report;
pub mod semantic;
pub mod stopwords;
pub mod store;

pub use corpus::{tokenize, Corpus, Document, DocumentMeta, QueryText};
pub use error::{Error, Result};
pub use par::Execution;

//! Analysis report: the JSON document written per input text, and a static
//! HTML rendering with matched spans highlighted.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dj_search::MatchMap;
use crate::error::{Error, Result};
use crate::oracle::{MatchKind, OracleStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanRecord {
    pub start: usize,
    pub end: usize,
    pub kind: MatchKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    pub source_docs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_span: Option<(usize, usize)>,
}

impl SpanRecord {
    pub fn from_map(map: &MatchMap) -> Vec<SpanRecord> {
        map.matches
            .iter()
            .map(|m| SpanRecord {
                start: m.start,
                end: m.end(),
                kind: m.result.kind,
                distance: m.result.distance,
                source_docs: m.result.source_docs.clone(),
                source_span: m.result.span_in_source,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupEcho {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge: Option<String>,
}

/// Every setting that influenced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub l_min: usize,
    pub l_max: usize,
    pub semantic_enabled: bool,
    /// Distance threshold as configured.
    pub delta: f64,
    pub top_k: usize,
    pub bm25_k1: f64,
    pub bm25_b: f64,
    pub exact_source_cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dedup: Option<DedupEcho>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateInfo {
    /// BM25 documents searched for semantic matches, in rank order.
    pub bm25_candidates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupSummary {
    pub excluded: Vec<String>,
    pub review: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub n_tokens: usize,
    pub tokens: Vec<String>,
    pub l_uniqueness: BTreeMap<usize, f64>,
    pub creativity_index: f64,
    pub spans: Vec<SpanRecord>,
    pub config: ConfigEcho,
    pub oracle_stats: OracleStats,
    pub candidates: CandidateInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dedup: Option<DedupSummary>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `<sanitized id>-<12 hex digits of the text's SHA-256>`.
pub fn report_file_stem(id: &str, text: &str) -> String {
    let safe: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .take(80)
        .collect();
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    format!("{}-{}", if safe.is_empty() { "query" } else { &safe }, &digest[..12])
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn strength(kind: MatchKind) -> u8 {
    match kind {
        MatchKind::Exact => 2,
        MatchKind::Semantic => 1,
        MatchKind::None => 0,
    }
}

const STYLE: &str = "body{font-family:Georgia,serif;max-width:52em;margin:2em auto;line-height:1.7}\
mark{padding:0 .1em;border-radius:3px}mark a{color:inherit;text-decoration:none}\
mark.exact{background:#f7c6c6}mark.semantic{background:#c6daf7}\
table{border-collapse:collapse}td,th{border:1px solid #ccc;padding:.2em .6em;text-align:right}\
.sources li{margin:.3em 0}";

/// Self-contained HTML page for a report. Each token is one `span.t`; runs
/// covered by the same match are wrapped in a `mark` classed by the
/// strongest covering kind (exact over semantic).
pub fn render_html(report: &Report) -> Result<String> {
    if report.tokens.len() != report.n_tokens {
        return Err(Error::invalid(format!(
            "report lists {} tokens but n_tokens is {}",
            report.tokens.len(),
            report.n_tokens
        )));
    }
    for s in &report.spans {
        if s.start >= s.end || s.end > report.n_tokens || s.kind == MatchKind::None {
            return Err(Error::invalid(format!("malformed span [{}, {})", s.start, s.end)));
        }
    }
    // owning span per token: strongest kind, earliest span on ties
    let mut owner: Vec<Option<usize>> = vec![None; report.n_tokens];
    for (k, s) in report.spans.iter().enumerate() {
        for slot in &mut owner[s.start..s.end] {
            let better = match *slot {
                None => true,
                Some(cur) => strength(s.kind) > strength(report.spans[cur].kind),
            };
            if better {
                *slot = Some(k);
            }
        }
    }

    let mut body = String::new();
    let mut i = 0;
    while i < report.n_tokens {
        let run_owner = owner[i];
        let mut j = i;
        while j < report.n_tokens && owner[j] == run_owner {
            j += 1;
        }
        let words: Vec<String> = report.tokens[i..j]
            .iter()
            .map(|t| format!("<span class=\"t\">{}</span>", escape(t)))
            .collect();
        match run_owner {
            Some(k) => {
                let s = &report.spans[k];
                let class = if s.kind == MatchKind::Exact { "exact" } else { "semantic" };
                let _ = write!(
                    body,
                    "<mark class=\"{class}\" title=\"{}\"><a href=\"#src-{k}\">{}</a></mark> ",
                    escape(&s.source_docs.join(", ")),
                    words.join(" ")
                );
            }
            None => {
                body.push_str(&words.join(" "));
                body.push(' ');
            }
        }
        i = j;
    }

    let mut curve = String::from("<table><tr><th>L</th><th>L-uniqueness</th></tr>");
    for (l, u) in &report.l_uniqueness {
        let _ = write!(curve, "<tr><td>{l}</td><td>{u:.4}</td></tr>");
    }
    curve.push_str("</table>");

    let mut sources = String::from("<ol class=\"sources\" start=\"0\">");
    for (k, s) in report.spans.iter().enumerate() {
        let kind = if s.kind == MatchKind::Exact { "exact" } else { "semantic" };
        let dist = s.distance.map(|d| format!(", distance {d:.4}")).unwrap_or_default();
        let _ = write!(
            sources,
            "<li id=\"src-{k}\">[{}, {}) {kind}{dist}: {}</li>",
            s.start,
            s.end,
            escape(&s.source_docs.join(", "))
        );
    }
    sources.push_str("</ol>");

    Ok(format!(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>{title}</title><style>{STYLE}</style></head>\n<body>\n<h1>{title}</h1>\n<p>Creativity Index: <strong>{ci:.4}</strong> over L = {lmin}..{lmax}, {n} words.</p>\n<p class=\"text\">{body}</p>\n<h2>L-uniqueness</h2>\n{curve}\n<h2>Sources</h2>\n{sources}\n</body></html>\n",
        title = escape(&report.id),
        ci = report.creativity_index,
        lmin = report.config.l_min,
        lmax = report.config.l_max,
        n = report.n_tokens,
        body = body.trim_end(),
    ))
}

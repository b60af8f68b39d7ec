//! Longest corpus-matching n-gram per start position.
//!
//! [`dj_search`] is the two-pointer scan: it never probes a span that starts
//! and ends no later than one already probed, which bounds the oracle calls
//! by `2 * |x|`. [`naive_search`] probes every span and is kept as the
//! reference for testing.
//!
//! Both return only matches that are maximal in both directions: a match
//! whose end does not exceed the end of an earlier recorded match is
//! implied by it and is dropped.

use serde::{Deserialize, Serialize};

use crate::corpus::QueryText;
use crate::error::{Error, Result};
use crate::oracle::{MatchResult, NgramOracle, OracleStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalMatch {
    pub start: usize,
    pub length: usize,
    pub result: MatchResult,
}

impl MaximalMatch {
    pub fn end(&self) -> usize {
        self.start + self.length
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchMap {
    pub query_id: String,
    pub query_length: usize,
    pub l_min: usize,
    pub matches: Vec<MaximalMatch>,
    pub oracle_stats: OracleStats,
}

impl MatchMap {
    fn empty(x: &QueryText, l_min: usize) -> Self {
        MatchMap {
            query_id: x.id.clone(),
            query_length: x.len(),
            l_min,
            matches: Vec::new(),
            oracle_stats: OracleStats::default(),
        }
    }

    /// Positions covered by matches of length at least `l`.
    pub fn covered(&self, l: usize) -> Vec<bool> {
        let mut cov = vec![false; self.query_length];
        for m in self.matches.iter().filter(|m| m.length >= l) {
            cov[m.start..m.end()].iter_mut().for_each(|c| *c = true);
        }
        cov
    }
}

fn check_l_min(l_min: usize) -> Result<()> {
    if l_min == 0 {
        return Err(Error::invalid("L_min must be at least 1"));
    }
    Ok(())
}

pub fn dj_search<O: NgramOracle + ?Sized>(x: &QueryText, oracle: &O, l_min: usize) -> Result<MatchMap> {
    check_l_min(l_min)?;
    let mut map = MatchMap::empty(x, l_min);
    let n = x.len();
    if n < l_min {
        map.oracle_stats = oracle.stats();
        return Ok(map);
    }
    let tokens = &x.tokens;
    let (mut i, mut j) = (0, l_min);
    // last successful probe for the current start, ending at j - 1
    let mut current: Option<MatchResult> = None;
    while j <= n {
        let r = oracle.occurs(&tokens[i..j])?;
        if r.is_match() {
            current = Some(r);
            j += 1;
        } else {
            if let Some(result) = current.take() {
                map.matches.push(MaximalMatch {
                    start: i,
                    length: j - 1 - i,
                    result,
                });
            }
            i += 1;
            j = j.max(i + l_min);
        }
    }
    if let Some(result) = current {
        map.matches.push(MaximalMatch {
            start: i,
            length: n - i,
            result,
        });
    }
    map.oracle_stats = oracle.stats();
    Ok(map)
}

/// Probes every span of length at least `l_min` and keeps, per start, the
/// longest match, dropping those contained in an earlier kept match.
pub fn naive_search<O: NgramOracle + ?Sized>(x: &QueryText, oracle: &O, l_min: usize) -> Result<MatchMap> {
    check_l_min(l_min)?;
    let mut map = MatchMap::empty(x, l_min);
    let n = x.len();
    let tokens = &x.tokens;
    let mut kept_end = 0;
    for i in 0..(n + 1).saturating_sub(l_min) {
        let mut best: Option<(usize, MatchResult)> = None;
        for j in i + l_min..=n {
            let r = oracle.occurs(&tokens[i..j])?;
            if r.is_match() {
                best = Some((j, r));
            }
        }
        if let Some((end, result)) = best {
            if end > kept_end {
                kept_end = end;
                map.matches.push(MaximalMatch {
                    start: i,
                    length: end - i,
                    result,
                });
            }
        }
    }
    map.oracle_stats = oracle.stats();
    Ok(map)
}

//! L-uniqueness and the Creativity Index.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dj_search::MatchMap;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub l_min: usize,
    pub l_max: usize,
    pub semantic_enabled: bool,
    pub delta: f64,
    pub top_k: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            l_min: 5,
            l_max: 12,
            semantic_enabled: false,
            delta: 0.05,
            top_k: 100,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l_min < 1 || self.l_min > self.l_max {
            return Err(Error::invalid(format!(
                "need 1 <= l_min <= l_max, got l_min = {}, l_max = {}",
                self.l_min, self.l_max
            )));
        }
        Ok(())
    }
}

/// `uniq(x, L)` for each `L` in `[l_min, l_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessCurve {
    pub l_min: usize,
    pub l_max: usize,
    pub values: BTreeMap<usize, f64>,
}

impl UniquenessCurve {
    pub fn get(&self, l: usize) -> Option<f64> {
        self.values.get(&l).copied()
    }

    pub fn is_monotone(&self) -> bool {
        self.values.values().zip(self.values.values().skip(1)).all(|(a, b)| a <= b)
    }
}

/// Fraction of words not covered by any matched n-gram of length `>= L`.
/// An empty text is fully unique.
pub fn uniqueness_curve(map: &MatchMap, config: &AnalysisConfig) -> Result<UniquenessCurve> {
    config.validate()?;
    if map.l_min != config.l_min {
        return Err(Error::invalid(format!(
            "match map was built with L_min = {} but the curve starts at {}",
            map.l_min, config.l_min
        )));
    }
    let n = map.query_length;
    let values = (config.l_min..=config.l_max)
        .map(|l| {
            let u = if n == 0 {
                1.0
            } else {
                let covered = map.covered(l).into_iter().filter(|&c| c).count();
                1.0 - covered as f64 / n as f64
            };
            (l, u)
        })
        .collect();
    Ok(UniquenessCurve {
        l_min: config.l_min,
        l_max: config.l_max,
        values,
    })
}

/// Unit-width sum of the curve over its full range.
pub fn creativity_index(curve: &UniquenessCurve) -> Result<f64> {
    (curve.l_min..=curve.l_max)
        .map(|l| {
            curve
                .get(l)
                .ok_or_else(|| Error::invalid(format!("uniqueness curve is missing L = {l}")))
        })
        .sum()
}

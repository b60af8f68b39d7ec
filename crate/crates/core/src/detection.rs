//! Creativity Index as a zero-shot detector: AUROC and the Mann-Whitney U test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Human,
    Machine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub label: Label,
    pub scores: Vec<f64>,
}

impl ScoreSet {
    pub fn new(label: Label, scores: Vec<f64>) -> Self {
        ScoreSet { label, scores }
    }
}

/// Midranks (1-based, ties averaged) of `a` followed by `b`, and the tie
/// group sizes.
fn midranks(a: &[f64], b: &[f64]) -> Result<(Vec<f64>, Vec<usize>)> {
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    if all.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("scores must not be NaN"));
    }
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by(|&i, &j| all[i].total_cmp(&all[j]));
    let mut ranks = vec![0.0; all.len()];
    let mut ties = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let mut e = k;
        while e + 1 < order.len() && all[order[e + 1]] == all[order[k]] {
            e += 1;
        }
        // positions k..=e share the mean of ranks k+1..=e+1
        let rank = (k + e + 2) as f64 / 2.0;
        for &idx in &order[k..=e] {
            ranks[idx] = rank;
        }
        ties.push(e - k + 1);
        k = e + 1;
    }
    Ok((ranks, ties))
}

/// U statistic of `a` over `b`: pairs with `a > b` count 1, ties 0.5.
fn u_statistic(a: &[f64], b: &[f64]) -> Result<(f64, Vec<usize>)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("both score sets must be nonempty"));
    }
    let (ranks, ties) = midranks(a, b)?;
    let rank_sum: f64 = ranks[..a.len()].iter().sum();
    let n = a.len() as f64;
    Ok((rank_sum - n * (n + 1.0) / 2.0, ties))
}

/// Probability that a random human score outranks a random machine score.
pub fn auroc(human: &ScoreSet, machine: &ScoreSet) -> Result<f64> {
    let (u, _) = u_statistic(&human.scores, &machine.scores)?;
    Ok(u / (human.scores.len() as f64 * machine.scores.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    pub u: f64,
    /// Two-sided p-value, normal approximation with tie and continuity correction.
    pub p: f64,
    /// Set when fewer than 8 observations make the approximation unreliable.
    pub approximate: bool,
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    let (u, ties) = u_statistic(a, b)?;
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let tie_term: f64 = ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum();
    let variance = if n > 1.0 {
        n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)))
    } else {
        0.0
    };
    let p = if variance <= 0.0 {
        1.0
    } else {
        let z = ((u - n1 * n2 / 2.0).abs() - 0.5).max(0.0) / variance.sqrt();
        statrs::function::erf::erfc(z / std::f64::consts::SQRT_2).min(1.0)
    };
    Ok(MannWhitney {
        u,
        p,
        approximate: a.len() + b.len() < 8,
    })
}

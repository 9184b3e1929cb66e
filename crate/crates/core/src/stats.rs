//! Benchmark statistics: solution stability, n-fold ratios, the
//! Mann-Whitney U test and correlation coefficients.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::StatsError;
use crate::network::EdgeKey;

/// Mean, sample standard deviation, minimum and maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// The standard deviation of a single value is 0.
    pub fn of(values: &[f64]) -> Result<Self, StatsError> {
        if values.is_empty() {
            return Err(StatsError::EmptySample);
        }
        let n = values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Summation can drift off a constant sample's value.
        let mean = if min == max { min } else { values.iter().sum::<f64>() / n };
        let std = if values.len() > 1 {
            libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
        } else {
            0.0
        };
        Ok(Summary { mean, std, min, max })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityScore {
    pub per_run: Vec<f64>,
    pub model: f64,
}

/// How often each run's edges recur in the other runs.
///
/// Run `i` scores `sum_{e in E_i} #{j != i : e in E_j} / ((R - 1) |E_i|)`;
/// a run without edges scores 0. The model score is the mean over runs.
/// Edges are compared by node-pair key, duplicates within a run ignored.
pub fn stability(runs: &[Vec<EdgeKey>]) -> Result<StabilityScore, StatsError> {
    if runs.len() < 2 {
        return Err(StatsError::SingleRun);
    }
    let sets: Vec<BTreeSet<EdgeKey>> =
        runs.iter().map(|r| r.iter().map(|&(u, v)| if u <= v { (u, v) } else { (v, u) }).collect()).collect();
    let others = (sets.len() - 1) as f64;
    let per_run: Vec<f64> = sets
        .iter()
        .enumerate()
        .map(|(i, set)| {
            if set.is_empty() {
                return 0.0;
            }
            let hits: usize =
                set.iter().map(|e| sets.iter().enumerate().filter(|&(j, s)| j != i && s.contains(e)).count()).sum();
            hits as f64 / (others * set.len() as f64)
        })
        .collect();
    let model = per_run.iter().sum::<f64>() / per_run.len() as f64;
    Ok(StabilityScore { per_run, model })
}

/// Baseline over improved metric, `p0 / pi`.
pub fn n_fold(p0: f64, pi: f64) -> Result<f64, StatsError> {
    if !(pi > 0.0) {
        return Err(StatsError::DivisionByZero(pi));
    }
    Ok(p0 / pi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MannWhitney {
    /// `min(U_a, U_b)`.
    pub u: f64,
    /// Statistic of the first sample: its rank sum minus `n (n + 1) / 2`.
    pub u_a: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub reject: bool,
    pub method: PValueMethod,
}

/// Largest number of rank assignments for which the exact null
/// distribution is used.
pub const EXACT_LIMIT: u64 = 20_000;

/// Mid-ranks (1-based) of `values`, ties sharing their average rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let mid = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            out[k] = mid;
        }
        i = j;
    }
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut c: u64 = 1;
    for i in 0..k {
        c = c.saturating_mul(n - i) / (i + 1);
        if c == u64::MAX {
            break;
        }
    }
    c
}

/// Number of rank assignments giving each value of `U` for samples of
/// sizes `n` and `m` without ties, indexed by `U`.
pub fn exact_u_counts(n: usize, m: usize) -> Vec<f64> {
    // f[i][j][u] = f[i-1][j][u-j] + f[i][j-1][u]: the largest rank belongs
    // either to the first sample (beating all j of the second) or not.
    let max_u = n * m;
    let mut prev: Vec<Vec<f64>> = vec![vec![0.0; max_u + 1]; m + 1];
    for row in prev.iter_mut() {
        row[0] = 1.0;
    }
    for _i in 1..=n {
        let mut cur: Vec<Vec<f64>> = vec![vec![0.0; max_u + 1]; m + 1];
        cur[0][0] = 1.0;
        for j in 1..=m {
            for u in 0..=max_u {
                let take = if u >= j { prev[j][u - j] } else { 0.0 };
                cur[j][u] = take + cur[j - 1][u];
            }
        }
        prev = cur;
    }
    prev.swap_remove(m)
}

/// Two-sided Mann-Whitney U test at level `alpha`.
///
/// Uses the exact null distribution when there are no ties and
/// `C(n + m, n) <= 20000`, otherwise the normal approximation with tie and
/// continuity corrections.
pub fn mann_whitney_u(a: &[f64], b: &[f64], alpha: f64) -> Result<MannWhitney, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let (n, m) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let r = ranks(&pooled);
    let rank_sum_a: f64 = r[..n].iter().sum();
    let u_a = rank_sum_a - (n * (n + 1)) as f64 / 2.0;
    let nm = (n * m) as f64;
    let u = u_a.min(nm - u_a);

    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }

    let exact = tie_term == 0.0 && binomial((n + m) as u64, n as u64) <= EXACT_LIMIT;
    let (p_value, method) = if exact {
        let counts = exact_u_counts(n, m);
        let total: f64 = counts.iter().sum();
        // u is an integer here since there are no ties.
        let k = libm::round(u) as usize;
        let tail: f64 = counts[..=k].iter().sum();
        ((2.0 * tail / total).min(1.0), PValueMethod::Exact)
    } else {
        let big_n = (n + m) as f64;
        let var = nm / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
        let p = if var <= 0.0 {
            1.0
        } else {
            let z = ((u_a - nm / 2.0).abs() - 0.5).max(0.0) / libm::sqrt(var);
            libm::erfc(z / core::f64::consts::SQRT_2).min(1.0)
        };
        (p, PValueMethod::Normal)
    };
    Ok(MannWhitney { u, u_a, p_value, reject: p_value < alpha, method })
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::EmptySample);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(sxy / libm::sqrt(sxx * syy))
}

/// Spearman rank correlation: Pearson on mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    pearson(&ranks(x), &ranks(y))
}

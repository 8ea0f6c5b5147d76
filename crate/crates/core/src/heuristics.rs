//! Closed-form heuristic predictions for prime consecutive sums and the
//! empirical statistics they are compared against.
//!
//! Products of many factors close to 1 are evaluated as the exponential of
//! a compensated sum of `ln_1p` terms.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::search::MinLenRecord;

pub const DEFAULT_MODEL: &str = "cramer";

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `1 / ln(k p)`: heuristic chance that `S_k(p)` is prime.
pub fn heuristic_prime_probability(k: u64, p_n: f64) -> f64 {
    1.0 / (k as f64 * p_n).ln()
}

/// Natural log of the no-solution product; stays finite where the
/// product itself underflows (small `p`, large `m`).
pub fn cramer_log_no_solution_probability(p_n: f64, m: u64) -> f64 {
    let mut acc = CompensatedSum::default();
    for j in 1..=m {
        acc.add((-heuristic_prime_probability(2 * j + 1, p_n)).ln_1p());
    }
    acc.value()
}

/// Probability under independent trials that none of the sums for
/// `k = 3, 5, ..., 2m + 1` is prime. `m = 0` gives the empty product.
pub fn cramer_no_solution_probability(p_n: f64, m: u64) -> f64 {
    cramer_log_no_solution_probability(p_n, m).exp()
}

/// Log of the no-solution product after each of `m = 1..=max_m` odd lengths.
pub fn cramer_log_no_solution_table(p_n: f64, max_m: u64) -> Vec<f64> {
    let mut acc = CompensatedSum::default();
    (1..=max_m)
        .map(|j| {
            acc.add((-heuristic_prime_probability(2 * j + 1, p_n)).ln_1p());
            acc.value()
        })
        .collect()
}

/// The no-solution product after each of `m = 1..=max_m` odd lengths.
pub fn cramer_no_solution_table(p_n: f64, max_m: u64) -> Vec<f64> {
    cramer_log_no_solution_table(p_n, max_m)
        .into_iter()
        .map(f64::exp)
        .collect()
}

/// `sum_{j=1}^{m} 1/ln((2j+1) p)`, the exponent of the product's
/// exponential approximation.
pub fn cramer_exponent(p_n: f64, m: u64) -> f64 {
    let mut acc = CompensatedSum::default();
    for j in 1..=m {
        acc.add(heuristic_prime_probability(2 * j + 1, p_n));
    }
    acc.value()
}

/// Partial sum of `1/ln(k p)` over odd `3 <= k <= k_max`.
pub fn odd_length_probability_sum(p_n: f64, k_max: u64) -> f64 {
    let mut acc = CompensatedSum::default();
    for k in (3..=k_max).step_by(2) {
        acc.add(heuristic_prime_probability(k, p_n));
    }
    acc.value()
}

/// Smallest odd `K <= k_limit` whose partial sum exceeds `bound`.
pub fn divergence_witness(p_n: f64, bound: f64, k_limit: u64) -> Option<u64> {
    let mut acc = CompensatedSum::default();
    for k in (3..=k_limit).step_by(2) {
        acc.add(heuristic_prime_probability(k, p_n));
        if acc.value() > bound {
            return Some(k);
        }
    }
    None
}

/// Predicted mean and variance of `k_min` as functions of `ln p`.
pub trait MinLengthModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn expected(&self, ln_p: f64) -> f64;
    fn variance(&self, ln_p: f64) -> f64;
}

/// Geometric trials with success probability `1/ln p` over odd lengths:
/// mean `2 ln p`, variance `4 (ln p)^2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CramerModel;

impl MinLengthModel for CramerModel {
    fn name(&self) -> &'static str {
        "cramer"
    }
    fn expected(&self, ln_p: f64) -> f64 {
        2.0 * ln_p
    }
    fn variance(&self, ln_p: f64) -> f64 {
        4.0 * ln_p * ln_p
    }
}

/// Same trials with the success probability doubled because every sum is
/// odd: mean `ln p`, variance `(ln p)^2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParityModel;

impl MinLengthModel for ParityModel {
    fn name(&self) -> &'static str {
        "parity"
    }
    fn expected(&self, ln_p: f64) -> f64 {
        ln_p
    }
    fn variance(&self, ln_p: f64) -> f64 {
        ln_p * ln_p
    }
}

pub fn model_registry() -> Registry<dyn MinLengthModel> {
    let mut reg: Registry<dyn MinLengthModel> = Registry::new("min-length model");
    reg.register("cramer", Arc::new(CramerModel));
    reg.register("parity", Arc::new(ParityModel));
    reg
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeuristicReport {
    pub p_n: f64,
    pub expected_k_min: f64,
    pub variance_k_min: f64,
    /// Entry `m - 1` holds the no-solution product after `m` odd lengths.
    pub no_solution_probs: Vec<f64>,
    /// Natural logs of `no_solution_probs`, exact where those underflow.
    pub ln_no_solution_probs: Vec<f64>,
}

pub fn heuristic_min_length_stats(p_n: f64, max_m: u64) -> Result<HeuristicReport> {
    if p_n.is_nan() || p_n < 3.0 || p_n.is_infinite() {
        return Err(Error::domain(format!("starting prime must be at least 3, got {p_n}")));
    }
    let ln_p = p_n.ln();
    let ln_no_solution_probs = cramer_log_no_solution_table(p_n, max_m);
    Ok(HeuristicReport {
        p_n,
        expected_k_min: CramerModel.expected(ln_p),
        variance_k_min: CramerModel.variance(ln_p),
        no_solution_probs: ln_no_solution_probs.iter().map(|v| v.exp()).collect(),
        ln_no_solution_probs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalStats {
    pub count: usize,
    pub mean_k_min: f64,
    /// Sample variance (`count - 1` denominator; 0 for a single record).
    pub variance_k_min: f64,
    /// Mean of `ln p_n`, i.e. the log of the geometric mean prime.
    pub ln_mean_p: f64,
    pub ratio_mean: f64,
    pub ratio_variance: f64,
    /// `sqrt(variance) / mean`.
    pub dispersion: f64,
    /// Total-variation distance between the empirical law of
    /// `(k_min - 1) / 2` and a geometric law on `{1, 2, ...}` with the
    /// same mean.
    pub geometric_tv: f64,
}

pub fn empirical_min_length_stats(records: &[MinLenRecord]) -> Result<EmpiricalStats> {
    if records.is_empty() {
        return Err(Error::domain("empirical statistics need at least one record"));
    }
    let count = records.len();
    let mut k_sum = CompensatedSum::default();
    let mut ln_sum = CompensatedSum::default();
    for r in records {
        k_sum.add(r.k_min as f64);
        ln_sum.add((r.p_n as f64).ln());
    }
    let mean = k_sum.value() / count as f64;
    let ln_mean_p = ln_sum.value() / count as f64;
    let variance = if count > 1 {
        let mut sq = CompensatedSum::default();
        for r in records {
            let d = r.k_min as f64 - mean;
            sq.add(d * d);
        }
        sq.value() / (count - 1) as f64
    } else {
        0.0
    };
    Ok(EmpiricalStats {
        count,
        mean_k_min: mean,
        variance_k_min: variance,
        ln_mean_p,
        ratio_mean: mean / ln_mean_p,
        ratio_variance: variance / (ln_mean_p * ln_mean_p),
        dispersion: variance.sqrt() / mean,
        geometric_tv: geometric_tv_distance(records),
    })
}

fn geometric_tv_distance(records: &[MinLenRecord]) -> f64 {
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for r in records {
        *hist.entry((r.k_min.max(1) - 1) / 2).or_default() += 1;
    }
    let total = records.len() as f64;
    let mean = hist.iter().map(|(&x, &c)| x as f64 * c as f64).sum::<f64>() / total;
    if mean < 1.0 {
        return 1.0;
    }
    let q = 1.0 / mean;
    let max_x = *hist.keys().next_back().unwrap_or(&1);
    let mut dist = 0.0;
    let mut geo = q;
    for x in 1..=max_x {
        let emp = hist.get(&x).copied().unwrap_or(0) as f64 / total;
        dist += (emp - geo).abs();
        geo *= 1.0 - q;
    }
    // geometric mass beyond the largest observation
    dist += (1.0 - q).powi(max_x as i32);
    0.5 * dist
}

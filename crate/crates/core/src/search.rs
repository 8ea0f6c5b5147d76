//! Minimal odd length per starting prime and admissible-length enumeration.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primality::{MillerRabin, PrimalityTest};
use crate::primes::PrimeTable;
use crate::sums::{check_odd, check_span};

/// Largest odd length tested when no cap is given.
pub const DEFAULT_K_CAP: usize = 10_001;
/// Largest odd length at most 1000.
pub const DEFAULT_WINDOW: usize = 999;

/// Smallest admissible odd length for one starting prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinLenRecord {
    pub n: usize,
    #[serde(rename = "p")]
    pub p_n: u64,
    pub k_min: usize,
    pub sum: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinLenOutcome {
    Found(MinLenRecord),
    /// No odd `k <= k_cap` gives a prime sum.
    Exhausted {
        n: usize,
        p_n: u64,
        k_cap: usize,
    },
}

impl MinLenOutcome {
    pub fn record(&self) -> Option<&MinLenRecord> {
        match self {
            MinLenOutcome::Found(r) => Some(r),
            MinLenOutcome::Exhausted { .. } => None,
        }
    }
}

/// Every odd `k` in `[3, window]` whose sum is prime, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleLengths {
    pub n: usize,
    #[serde(rename = "p")]
    pub p_n: u64,
    pub window: usize,
    pub lengths: Vec<usize>,
}

pub(crate) fn check_start(n: usize) -> Result<()> {
    match n {
        0 => Err(Error::domain("starting index n must be at least 1")),
        1 => Err(Error::ParityObstruction),
        _ => Ok(()),
    }
}

pub(crate) fn check_length_bound(name: &str, value: usize) -> Result<()> {
    check_odd(name, value)?;
    if value < 3 {
        return Err(Error::domain(format!("{name} must be at least 3, got {value}")));
    }
    Ok(())
}

/// Search routines bound to a table and a primality backend.
#[derive(Clone)]
pub struct Searcher<'a> {
    table: &'a PrimeTable,
    test: Arc<dyn PrimalityTest>,
}

impl<'a> Searcher<'a> {
    pub fn new(table: &'a PrimeTable) -> Self {
        Searcher::with_test(table, Arc::new(MillerRabin))
    }

    pub fn with_test(table: &'a PrimeTable, test: Arc<dyn PrimalityTest>) -> Self {
        Searcher { table, test }
    }

    pub fn table(&self) -> &'a PrimeTable {
        self.table
    }

    pub fn test(&self) -> &dyn PrimalityTest {
        self.test.as_ref()
    }

    /// Tests `k = 3, 5, 7, ...` in order and stops at the first prime sum.
    pub fn minimal_odd_length(&self, n: usize, k_cap: usize) -> Result<MinLenOutcome> {
        check_start(n)?;
        check_length_bound("k_cap", k_cap)?;
        check_span(self.table, n, k_cap)?;
        Ok(self.minimal_unchecked(n, k_cap))
    }

    /// Caller guarantees `n >= 2`, odd `k_cap >= 3`, and the span fits.
    pub(crate) fn minimal_unchecked(&self, n: usize, k_cap: usize) -> MinLenOutcome {
        let t = self.table;
        let mut sum = t.p(n) + t.p(n + 1) + t.p(n + 2);
        let mut k = 3;
        loop {
            if self.test.is_prime(sum) {
                return MinLenOutcome::Found(MinLenRecord {
                    n,
                    p_n: t.p(n),
                    k_min: k,
                    sum,
                });
            }
            if k + 2 > k_cap {
                return MinLenOutcome::Exhausted { n, p_n: t.p(n), k_cap };
            }
            sum += t.p(n + k) + t.p(n + k + 1);
            k += 2;
        }
    }

    pub fn admissible_lengths(&self, n: usize, window: usize) -> Result<AdmissibleLengths> {
        check_start(n)?;
        check_length_bound("window", window)?;
        check_span(self.table, n, window)?;
        let lengths = crate::sums::odd_sums_window(self.table, n, window)?
            .filter(|&(_, s)| self.test.is_prime(s))
            .map(|(k, _)| k)
            .collect();
        Ok(AdmissibleLengths {
            n,
            p_n: self.table.p(n),
            window,
            lengths,
        })
    }
}

pub fn minimal_odd_length(table: &PrimeTable, n: usize, k_cap: usize) -> Result<MinLenOutcome> {
    Searcher::new(table).minimal_odd_length(n, k_cap)
}

pub fn admissible_lengths(table: &PrimeTable, n: usize, window: usize) -> Result<AdmissibleLengths> {
    Searcher::new(table).admissible_lengths(n, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primality::TrialDivision;
    use crate::primes::build_table;

    fn naive_min(primes: &[u64], n: usize, k_cap: usize) -> Option<(usize, u64)> {
        (3..=k_cap).step_by(2).find_map(|k| {
            let s: u64 = primes[n - 1..n - 1 + k].iter().sum();
            TrialDivision.is_prime(s).then_some((k, s))
        })
    }

    #[test]
    fn small_minimal_lengths() {
        let t = build_table(2000, 0).unwrap();
        let r = minimal_odd_length(&t, 2, 101).unwrap();
        assert_eq!(
            r,
            MinLenOutcome::Found(MinLenRecord {
                n: 2,
                p_n: 3,
                k_min: 9,
                sum: 127
            })
        );
        let r = minimal_odd_length(&t, 3, 101).unwrap();
        assert_eq!(r.record().unwrap().k_min, 3);
        assert_eq!(r.record().unwrap().sum, 23);
    }

    #[test]
    fn matches_naive_search() {
        let t = build_table(3000, 0).unwrap();
        for n in 2..=2000 {
            let got = minimal_odd_length(&t, n, 999).unwrap();
            let want = naive_min(t.primes(), n, 999);
            assert_eq!(got.record().map(|r| (r.k_min, r.sum)), want, "n = {n}");
        }
    }

    #[test]
    fn exhaustion_and_errors() {
        let t = build_table(100, 0).unwrap();
        assert_eq!(
            minimal_odd_length(&t, 2, 7).unwrap(),
            MinLenOutcome::Exhausted { n: 2, p_n: 3, k_cap: 7 }
        );
        assert!(matches!(minimal_odd_length(&t, 1, 7), Err(Error::ParityObstruction)));
        assert!(matches!(minimal_odd_length(&t, 0, 7), Err(Error::Domain(_))));
        assert!(matches!(minimal_odd_length(&t, 2, 8), Err(Error::Domain(_))));
        assert!(matches!(minimal_odd_length(&t, 2, 1), Err(Error::Domain(_))));
        assert!(matches!(minimal_odd_length(&t, 95, 7), Err(Error::Range { .. })));
        assert!(matches!(admissible_lengths(&t, 1, 9), Err(Error::ParityObstruction)));
    }

    #[test]
    fn small_k_sets() {
        let t = build_table(1100, 0).unwrap();
        let k = admissible_lengths(&t, 2, 999).unwrap();
        assert_eq!(k.p_n, 3);
        assert_eq!(&k.lengths[..9], &[9, 15, 17, 53, 55, 61, 65, 71, 75]);
        assert_eq!(k.lengths.len(), 71);
        assert_eq!(*k.lengths.last().unwrap(), 977);
        let k = admissible_lengths(&t, 4, 999).unwrap();
        assert_eq!(&k.lengths[..9], &[3, 5, 11, 15, 21, 23, 25, 27, 33]);
        assert_eq!(k.lengths.len(), 99);
        assert_eq!(*k.lengths.last().unwrap(), 993);
        let k = admissible_lengths(&t, 3, 999).unwrap();
        assert_eq!(k.lengths.len(), 69);
        assert_eq!(*k.lengths.last().unwrap(), 997);
    }

    #[test]
    fn backends_interchangeable() {
        let t = build_table(600, 0).unwrap();
        let mr = Searcher::new(&t);
        let td = Searcher::with_test(&t, Arc::new(TrialDivision));
        for n in 2..100 {
            assert_eq!(
                mr.admissible_lengths(n, 499).unwrap(),
                td.admissible_lengths(n, 499).unwrap()
            );
        }
    }
}

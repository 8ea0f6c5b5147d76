//! Sums of consecutive primes `S_k(p_n) = p_n + p_{n+1} + ... + p_{n+k-1}`.

use crate::error::{Error, Result};
use crate::primes::PrimeTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SumQuery {
    /// 1-based index of the starting prime.
    pub n: usize,
    /// Number of consecutive primes summed.
    pub k: usize,
}

impl SumQuery {
    pub fn new(n: usize, k: usize) -> Self {
        SumQuery { n, k }
    }

    /// Checks `n >= 1`, `k >= 1` and `n + k - 1 <= count`.
    pub fn check(&self, table: &PrimeTable) -> Result<()> {
        check_span(table, self.n, self.k)
    }
}

pub(crate) fn check_span(table: &PrimeTable, n: usize, k: usize) -> Result<()> {
    let needed = n.checked_add(k).map(|v| v - 1);
    match needed {
        Some(needed) if n >= 1 && k >= 1 && needed <= table.count() => Ok(()),
        _ => Err(Error::Range {
            n,
            k,
            needed: needed.unwrap_or(usize::MAX),
            count: table.count(),
        }),
    }
}

/// Odd `k_max` (or a domain error).
pub(crate) fn check_odd(name: &str, value: usize) -> Result<()> {
    if value.is_multiple_of(2) {
        return Err(Error::domain(format!("{name} must be odd, got {value}")));
    }
    Ok(())
}

/// `S_k(p_n)` as a difference of prefix sums.
pub fn consecutive_sum(table: &PrimeTable, q: SumQuery) -> Result<u64> {
    q.check(table)?;
    Ok(span_sum(table, q.n, q.k))
}

#[inline]
pub(crate) fn span_sum(table: &PrimeTable, n: usize, k: usize) -> u64 {
    table.prefix_unchecked(n + k - 1) - table.prefix_unchecked(n - 1)
}

/// `(k, S_k(p_n))` for `k = 3, 5, ..., k_max`.
pub fn odd_sums_window(table: &PrimeTable, n: usize, k_max: usize) -> Result<OddSums<'_>> {
    check_odd("k_max", k_max)?;
    check_span(table, n, k_max)?;
    Ok(OddSums { table, n, k: 3, k_max })
}

/// Iterator over odd-length sums starting at a fixed prime.
#[derive(Debug, Clone)]
pub struct OddSums<'a> {
    table: &'a PrimeTable,
    n: usize,
    k: usize,
    k_max: usize,
}

impl Iterator for OddSums<'_> {
    type Item = (usize, u64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.k > self.k_max {
            return None;
        }
        let k = self.k;
        self.k += 2;
        Some((k, span_sum(self.table, self.n, k)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = if self.k > self.k_max {
            0
        } else {
            (self.k_max - self.k) / 2 + 1
        };
        (left, Some(left))
    }
}

impl ExactSizeIterator for OddSums<'_> {}

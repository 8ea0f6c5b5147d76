//! Prime generation, indexed access with prefix sums, and a deterministic
//! primality test for the whole `u64` range.
//!
//! The table is produced by a segmented odd-only sieve of Eratosthenes whose
//! upper limit comes from the Rosser bound `p_m < m (ln m + ln ln m)`, valid
//! for `m >= 6`. Prefix sums are accumulated with checked arithmetic so a
//! table can never silently wrap.

use crate::error::{Error, Result};

/// The 25 primes below 100, used both for trial division and as a fixed
/// reference list for the head of every table.
pub const SMALL_PRIMES: [u64; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Witness set for which the strong-pseudoprime test is exact on every
/// 64-bit input (Sinclair's seven bases).
const WITNESSES: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

/// Odd slots per sieve segment (128 KiB of flags).
const SEGMENT_ODDS: usize = 1 << 17;

/// Exact primality for any `u64`.
///
/// Trial division by the primes below 100 runs first; anything that
/// survives and is at least `101^2` goes through the strong-pseudoprime
/// rounds.
pub fn is_prime(v: u64) -> bool {
    if v < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if v == p {
            return true;
        }
        if v.is_multiple_of(p) {
            return false;
        }
    }
    if v < 101 * 101 {
        return true;
    }
    let d = (v - 1) >> (v - 1).trailing_zeros();
    let s = (v - 1).trailing_zeros();
    WITNESSES.iter().all(|&a| strong_probable_prime(v, d, s, a))
}

fn strong_probable_prime(n: u64, d: u64, s: u32, base: u64) -> bool {
    let a = base % n;
    if a == 0 {
        return true;
    }
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
        if x == 1 {
            return false;
        }
    }
    false
}

#[inline]
fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    if n <= u32::MAX as u64 {
        // both operands are already reduced below 2^32
        a * b % n
    } else {
        ((a as u128 * b as u128) % n as u128) as u64
    }
}

fn pow_mod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc = 1u64;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        exp >>= 1;
    }
    acc
}

/// Upper bound on the `m`-th prime used to size the sieve.
pub fn sieve_limit(m: usize) -> u64 {
    if m < 6 {
        return 15;
    }
    let m = m as f64;
    let bound = m * (m.ln() + m.ln().ln());
    bound.ceil() as u64 + 16
}

/// Plain sieve for the base primes up to `limit`.
fn small_sieve(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}

fn isqrt(v: u64) -> u64 {
    let mut r = (v as f64).sqrt() as u64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// Primes up to `limit`, stopping early once `want` have been collected.
pub fn segmented_sieve(limit: u64, want: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(want.min(1 << 24));
    if limit < 2 || want == 0 {
        return out;
    }
    out.push(2);
    let base = small_sieve(isqrt(limit));
    let mut flags = vec![true; SEGMENT_ODDS];
    let mut lo = 3u64;
    while lo <= limit && out.len() < want {
        let hi = (lo + 2 * SEGMENT_ODDS as u64).min(limit + 1);
        let len = (hi - lo).div_ceil(2) as usize;
        flags[..len].fill(true);
        for &p in base.iter().skip(1) {
            if p * p >= hi {
                break;
            }
            let mut start = (p * p).max(lo.div_ceil(p) * p);
            if start % 2 == 0 {
                start += p;
            }
            let mut j = ((start - lo) / 2) as usize;
            while j < len {
                flags[j] = false;
                j += p as usize;
            }
        }
        for (i, _) in flags[..len].iter().enumerate().filter(|(_, &f)| f) {
            out.push(lo + 2 * i as u64);
            if out.len() == want {
                break;
            }
        }
        lo = hi;
    }
    out
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<u64> {
    let mut limit = sieve_limit(count);
    loop {
        let primes = segmented_sieve(limit, count);
        if primes.len() >= count {
            return primes;
        }
        limit = limit.saturating_mul(2);
    }
}

/// The first primes with their cumulative sums.
///
/// Indexing is 1-based throughout the public API: `nth(1) == 2` and
/// `prefix(i)` is the sum of the first `i` primes, with `prefix(0) == 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    primes: Vec<u64>,
    prefix: Vec<u64>,
}

impl PrimeTable {
    /// Builds a table holding exactly `m + headroom` primes.
    pub fn build(m: usize, headroom: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("table size m must be at least 1"));
        }
        let count = m
            .checked_add(headroom)
            .ok_or_else(|| Error::domain("m + headroom overflows"))?;
        Self::from_primes(first_primes(count))
    }

    /// Wraps an explicit ascending prime list, computing checked prefix sums.
    pub fn from_primes(primes: Vec<u64>) -> Result<Self> {
        let mut prefix = Vec::with_capacity(primes.len() + 1);
        prefix.push(0u64);
        let mut acc = 0u64;
        for (i, &p) in primes.iter().enumerate() {
            acc = acc.checked_add(p).ok_or(Error::PrefixOverflow { index: i + 1 })?;
            prefix.push(acc);
        }
        Ok(PrimeTable { primes, prefix })
    }

    pub fn count(&self) -> usize {
        self.primes.len()
    }

    pub fn nth(&self, n: usize) -> Result<u64> {
        if n == 0 || n > self.primes.len() {
            return Err(Error::IndexOutOfRange {
                index: n,
                count: self.primes.len(),
            });
        }
        Ok(self.primes[n - 1])
    }

    /// Sum of the first `i` primes, `0 <= i <= count`.
    pub fn prefix(&self, i: usize) -> Result<u64> {
        self.prefix.get(i).copied().ok_or(Error::IndexOutOfRange {
            index: i,
            count: self.primes.len(),
        })
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Unchecked 1-based access for hot loops that already validated bounds.
    #[inline]
    pub(crate) fn p(&self, n: usize) -> u64 {
        self.primes[n - 1]
    }

    #[inline]
    pub(crate) fn prefix_unchecked(&self, i: usize) -> u64 {
        self.prefix[i]
    }
}

pub fn build_table(m: usize, headroom: usize) -> Result<PrimeTable> {
    PrimeTable::build(m, headroom)
}

pub fn nth_prime(table: &PrimeTable, n: usize) -> Result<u64> {
    table.nth(n)
}

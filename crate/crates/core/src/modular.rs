//! Residues of consecutive prime sums modulo small integers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::primes::{is_prime, PrimeTable};
use crate::search::{check_length_bound, check_start};
use crate::sums::check_span;

/// Largest modulus accepted; the histogram holds one counter per residue.
pub const MAX_MODULUS: u64 = 1 << 24;

/// Which lengths a histogram walks over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LengthParity {
    /// `k = 3, 5, ..., k_max`.
    Odd,
    /// `k = 2, 4, ..., k_max - 1`, for exploration only.
    Even,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModularHistogram {
    pub n: usize,
    pub q: u64,
    pub k_max: usize,
    pub parity: LengthParity,
    /// `counts[r]` is the number of lengths whose sum is `r` mod `q`.
    pub counts: Vec<u64>,
}

impl ModularHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Largest over smallest count among nonempty residues.
    pub fn spread(&self) -> Option<f64> {
        let nonempty = self.counts.iter().copied().filter(|&c| c > 0);
        let max = nonempty.clone().max()?;
        let min = nonempty.min()?;
        Some(max as f64 / min as f64)
    }
}

pub fn modular_histogram(table: &PrimeTable, n: usize, q: u64, k_max: usize) -> Result<ModularHistogram> {
    modular_histogram_with(table, n, q, k_max, LengthParity::Odd)
}

/// Builds the histogram incrementally: each step adds two primes mod `q`.
pub fn modular_histogram_with(
    table: &PrimeTable,
    n: usize,
    q: u64,
    k_max: usize,
    parity: LengthParity,
) -> Result<ModularHistogram> {
    if !(2..=MAX_MODULUS).contains(&q) {
        return Err(Error::domain(format!("modulus must lie in 2..={MAX_MODULUS}, got {q}")));
    }
    check_start(n)?;
    check_length_bound("k_max", k_max)?;
    check_span(table, n, k_max)?;

    let mut counts = vec![0u64; q as usize];
    let (mut k, last) = match parity {
        LengthParity::Odd => (3, k_max),
        LengthParity::Even => (2, k_max - 1),
    };
    let mut residue = (n..n + k).fold(0, |acc, i| (acc + table.p(i) % q) % q);
    loop {
        counts[residue as usize] += 1;
        if k + 2 > last {
            break;
        }
        residue = (residue + table.p(n + k) % q + table.p(n + k + 1) % q) % q;
        k += 2;
    }
    Ok(ModularHistogram {
        n,
        q,
        k_max,
        parity,
        counts,
    })
}

/// Fraction of odd lengths `k <= k_max` for which `l` divides the sum.
pub fn divisibility_frequency(table: &PrimeTable, n: usize, l: u64, k_max: usize) -> Result<f64> {
    if l == 2 {
        return Err(Error::domain(
            "l = 2 is degenerate: odd-length sums from n >= 2 are always odd",
        ));
    }
    if !is_prime(l) {
        return Err(Error::domain(format!("l must be an odd prime, got {l}")));
    }
    let h = modular_histogram(table, n, l, k_max)?;
    Ok(h.counts[0] as f64 / h.total() as f64)
}

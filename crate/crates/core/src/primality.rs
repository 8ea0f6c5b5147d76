//! Primality backends selectable by name.

use std::sync::Arc;

use crate::primes;
use crate::registry::Registry;

pub const DEFAULT_PRIMALITY: &str = "miller-rabin";

pub trait PrimalityTest: Send + Sync {
    fn name(&self) -> &'static str;
    fn is_prime(&self, v: u64) -> bool;
}

/// Small-prime trial division followed by deterministic strong-pseudoprime
/// rounds. Exact for every `u64`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MillerRabin;

impl PrimalityTest for MillerRabin {
    fn name(&self) -> &'static str {
        "miller-rabin"
    }

    fn is_prime(&self, v: u64) -> bool {
        primes::is_prime(v)
    }
}

/// Odd trial division up to the square root. Slow, but shares no code with
/// the strong-pseudoprime path, so it serves as a cross-check backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrialDivision;

impl PrimalityTest for TrialDivision {
    fn name(&self) -> &'static str {
        "trial-division"
    }

    fn is_prime(&self, v: u64) -> bool {
        if v < 4 {
            return v >= 2;
        }
        if v.is_multiple_of(2) {
            return false;
        }
        let mut d = 3u64;
        while d <= v / d {
            if v.is_multiple_of(d) {
                return false;
            }
            d += 2;
        }
        true
    }
}

pub fn primality_registry() -> Registry<dyn PrimalityTest> {
    let mut reg: Registry<dyn PrimalityTest> = Registry::new("primality test");
    reg.register("miller-rabin", Arc::new(MillerRabin));
    reg.register("trial-division", Arc::new(TrialDivision));
    reg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registered_backends_agree() {
        let reg = primality_registry();
        assert_eq!(reg.names(), vec!["miller-rabin", "trial-division"]);
        let mr = reg.get("miller-rabin").unwrap();
        let td = reg.get("trial-division").unwrap();
        assert_eq!(td.name(), "trial-division");
        for v in (0..200_000u64).chain(3_417_024_700..3_417_024_900) {
            assert_eq!(mr.is_prime(v), td.is_prime(v), "v = {v}");
        }
        assert!(reg.get("aks").is_err());
    }
}

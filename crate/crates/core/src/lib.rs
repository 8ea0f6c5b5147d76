//! Search, verification and heuristic analysis for prime sums of
//! consecutive primes `S_k(p_n) = p_n + ... + p_{n+k-1}` with odd `k >= 3`.

pub mod cli;
pub mod error;
pub mod heuristics;
pub mod modular;
pub mod primality;
pub mod primes;
pub mod registry;
pub mod report;
pub mod search;
pub mod sums;
pub mod verify;

pub use error::{Error, Result};
pub use primes::{build_table, is_prime, nth_prime, PrimeTable};
pub use search::{admissible_lengths, minimal_odd_length, AdmissibleLengths, MinLenOutcome, MinLenRecord, Searcher};
pub use sums::{consecutive_sum, odd_sums_window, SumQuery};
pub use verify::{verify_range, VerifyOptions, VerifyParams, VerifyReport};

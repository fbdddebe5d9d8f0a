//! Statistics of prime factors of shifted pairs `(n, n + a)`.
//!
//! The [`arith`] module sieves windows of integers; the other modules build
//! empirical laws, model laws, exact counts and integral identities on top
//! of it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod erdos_mirsky;
pub mod error;
pub mod joint;
pub mod kubilius;
pub mod quadrature;
pub mod report;
pub mod sieve_counts;

pub use arith::{
    primes_up_to, sieve_window, ArithRecord, ArithTable, Engine, EngineConfig, PrimeSet, Window,
};
pub use error::{Error, Result};
pub use joint::{Normalization, PairFilter, PairSample, PairStat};
pub use kubilius::{DensityTable, DiscreteLaw2D};
pub use report::ExperimentReport;

//! Differential testing between the batch engine and the bundle runtime.
//!
//! A pipeline is fitted with the engine, exported, reloaded by the runtime
//! and both backends transform the same synthetic rows; every output cell
//! is compared.

pub mod check;
pub mod corpus;
pub mod ltr;
pub mod oracles;
pub mod sweep;

pub use check::{
    check_fitted, check_parity, check_parity_with, floats_match, values_match, Fault, Mismatch, ParityReport,
    FLOAT_TOLERANCE,
};
pub use corpus::{generate_corpus, CorpusSpec, Hint};
pub use ltr::{ltr_corpus, ltr_spec};
pub use oracles::{oracle_mean, oracle_median, oracle_moments, oracle_string_index};
pub use sweep::{random_case, run_sweep, sweep_cases, SweepCase};

//! Shapley value attribution for facts in Boolean lineage expressions.
//!
//! A query answer over a database can be explained by its *lineage*: a Boolean
//! expression over the facts of the database that is true exactly when the
//! answer holds. Splitting the facts into an endogenous part (the players) and
//! an exogenous part (fixed context), the Shapley value of each endogenous
//! fact measures its contribution to the answer.
//!
//! The crate provides:
//!
//! * a data model for facts, databases and DNF lineage ([`lineage`]), with
//!   brute-force oracles for small instances,
//! * Boolean circuits and their transformations ([`circuit`]),
//! * Tseytin encoding to CNF ([`cnf`]),
//! * an internal exhaustive-search compiler from CNF to deterministic
//!   decomposable NNF plus NNF file I/O ([`ddnnf`], [`compile`]),
//! * exact Shapley computation on d-DNNF circuits via stratified model
//!   counting ([`shapley`]),
//! * an alternative exact route through probabilistic query evaluation and a
//!   Vandermonde solve ([`pqe`]),
//! * inexact methods: a CNF proxy score, Monte Carlo permutation sampling and
//!   a KernelSHAP-style regression estimator ([`inexact`]),
//! * ranking-quality metrics and instance generation for benchmarks
//!   ([`metrics`], [`bench`]),
//! * report assembly with CSV/JSON serialization ([`report`]).

pub mod bench;
pub mod circuit;
pub mod cnf;
mod combinatorics;
pub mod compile;
pub mod ddnnf;
mod error;
pub mod inexact;
pub mod limits;
pub mod lineage;
pub mod metrics;
pub mod pqe;
pub mod report;
pub mod shapley;
#[cfg(test)]
pub(crate) mod testutil;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Exact rational number used for all exact values.
pub type Rational = num::BigRational;

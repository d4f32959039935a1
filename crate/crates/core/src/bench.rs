//! The exact-with-fallback ("hybrid") strategy and a reproducible synthetic
//! instance generator for desk-scale benchmarking.

use std::collections::BTreeSet;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::circuit::BooleanCircuit;
use crate::cnf::{tseytin, CnfFormula};
use crate::compile::compile;
use crate::inexact::cnf_proxy;
use crate::limits::Limits;
use crate::lineage::{Database, DnfLineage, Fact, FactId};
use crate::report::ShapleyReport;
use crate::shapley::shapley_all;
use crate::{Error, Result};

/// Wall-clock budget applied when the caller does not choose one.
pub const DEFAULT_HYBRID_TIMEOUT: Duration = Duration::from_millis(2500);

/// Runs the exact pipeline (encode, compile, purge, count) under `limits`;
/// when the deadline or the compilation node budget runs out, falls back to
/// the clause-structure heuristic on the same encoding instead of failing.
///
/// A fallback report carries [`Method::Proxy`](crate::report::Method) and a
/// `fallback_reason`; its values rank the facts but are not on the Shapley
/// scale. Every other error (malformed circuit, fact bookkeeping) still
/// propagates.
pub fn hybrid(circuit: &BooleanCircuit, limits: &Limits) -> Result<ShapleyReport> {
    hybrid_cnf(&tseytin(circuit)?, limits)
}

/// [`hybrid`] starting from an already-encoded CNF.
pub fn hybrid_cnf(cnf: &CnfFormula, limits: &Limits) -> Result<ShapleyReport> {
    let exact = compile(cnf, limits)
        .map(|d| d.purge_tseytin())
        .and_then(|d| shapley_all(&d, limits));
    match exact {
        Ok(report) => Ok(report),
        Err(err @ (Error::DeadlineExceeded | Error::BudgetExhausted { .. })) => Ok(cnf_proxy(
            cnf,
        )?
        .into_report()
        .with_fallback_reason(err.to_string())),
        Err(other) => Err(other),
    }
}

/// Shape of one synthetic monotone-DNF instance.
///
/// Instances are drawn over endogenous facts `1..=n_facts` labelled
/// `f1..fN`; every monomial picks exactly `monomial_width` distinct facts.
/// Facts may end up in no monomial at all — null players are part of the
/// intended distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub n_facts: u32,
    /// Number of monomials; 0 yields the constant-false lineage.
    pub n_monomials: usize,
    /// Exact number of distinct facts per monomial; must not exceed
    /// `n_facts`.
    pub monomial_width: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Deterministically generates the instance this spec describes.
    pub fn generate(&self) -> DnfLineage {
        assert!(self.n_facts >= 1, "an instance needs at least one fact");
        assert!(
            self.monomial_width as u32 <= self.n_facts,
            "monomial width {} exceeds fact count {}",
            self.monomial_width,
            self.n_facts
        );
        let facts: Vec<Fact> = (1..=self.n_facts)
            .map(|i| Fact::endo(i, format!("f{i}")))
            .collect();
        let database = Database::new(facts).expect("distinct nonzero ids");
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        let monomials: Vec<BTreeSet<FactId>> = (0..self.n_monomials)
            .map(|_| {
                rand::seq::index::sample(&mut rng, self.n_facts as usize, self.monomial_width)
                    .into_iter()
                    .map(|i| FactId(i as u32 + 1))
                    .collect()
            })
            .collect();
        DnfLineage::new(database, monomials).expect("generated ids are in range")
    }

    /// `count` instances with seeds `seed`, `seed + 1`, … and otherwise this
    /// spec's shape.
    pub fn corpus(&self, count: usize) -> Vec<DnfLineage> {
        (0..count)
            .map(|i| {
                GeneratorSpec {
                    seed: self.seed + i as u64,
                    ..*self
                }
                .generate()
            })
            .collect()
    }
}

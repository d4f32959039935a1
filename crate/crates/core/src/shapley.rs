//! Exact Shapley values on d-DNNF circuits via stratified model counting.
//!
//! For a Boolean game `q` over `n` endogenous facts, the Shapley value of a
//! fact `f` can be written as a sum over coalition sizes `k`:
//!
//! ```text
//! shap(f) = sum_k  k! (n-k-1)! / n!  *  (#slices(f->1, k) - #slices(f->0, k))
//! ```
//!
//! where `#slices(f->v, k)` counts the size-`k` subsets of the other facts
//! that satisfy the lineage with `f` pinned to `v`. On a deterministic
//! decomposable circuit these stratified model counts follow simple
//! recurrences over fan-in-2 nodes, computed bottom-up by
//! [`compute_all_satk`]:
//!
//! * a positive literal counts `[0, 1]`, a negative one `[1, 0]`;
//! * an And convolves its children's counts (variables are disjoint);
//! * an Or adds its children's counts, each padded by binomials over the
//!   variables the other child mentions (determinism makes the models
//!   disjoint).
//!
//! [`shapley_ddnnf`] completes the circuit over the full endogenous fact set
//! (so facts absent from the lineage participate as null players), pins the
//! queried fact both ways, and combines the two root count vectors.

use num::bigint::BigInt;
use num::{BigUint, Zero};
use rayon::prelude::*;

use crate::cnf::VarId;
use crate::combinatorics::{binomial_table, shapley_coefficients};
use crate::ddnnf::{Ddnnf, DdnnfNode, NodeId};
use crate::lineage::FactId;
use crate::limits::Limits;
use crate::report::{Method, ReportEntry, ShapleyReport};
use crate::{Error, Rational, Result};

/// Per-node stratified model counts: entry `k` of a node's row is the number
/// of weight-`k` assignments to the node's own variables satisfying it.
#[derive(Debug, Clone)]
pub struct SatKTable {
    rows: Vec<Vec<BigUint>>,
    root: NodeId,
}

impl SatKTable {
    pub fn row(&self, node: NodeId) -> &[BigUint] {
        &self.rows[node.0]
    }

    /// Counts for the whole circuit, indexed by assignment weight.
    pub fn root_row(&self) -> &[BigUint] {
        &self.rows[self.root.0]
    }
}

/// Computes stratified model counts for every node of a circuit whose And/Or
/// nodes have fan-in 0 or 2 (see [`Ddnnf::normalize_fanin2`]).
pub fn compute_all_satk(ddnnf: &Ddnnf, limits: &Limits) -> Result<SatKTable> {
    let vars = ddnnf.compute_vars();
    let max_vars = (0..ddnnf.len())
        .map(|i| vars.get(NodeId(i)).len())
        .max()
        .unwrap_or(0);
    let binomials = binomial_table(max_vars);

    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(ddnnf.len());
    for (i, node) in ddnnf.nodes().iter().enumerate() {
        if i % 64 == 0 {
            limits.check_deadline()?;
        }
        let row = match node {
            DdnnfNode::True => vec![BigUint::from(1u32)],
            DdnnfNode::False => vec![BigUint::zero()],
            DdnnfNode::Lit(lit) => {
                if lit.positive {
                    vec![BigUint::zero(), BigUint::from(1u32)]
                } else {
                    vec![BigUint::from(1u32), BigUint::zero()]
                }
            }
            DdnnfNode::And(cs) => match cs.as_slice() {
                [] => vec![BigUint::from(1u32)],
                [a, b] => {
                    let (na, nb) = (vars.get(*a).len(), vars.get(*b).len());
                    let (ra, rb) = (&rows[a.0], &rows[b.0]);
                    (0..=na + nb)
                        .map(|l| {
                            let mut total = BigUint::zero();
                            for i in l.saturating_sub(nb)..=l.min(na) {
                                total += &ra[i] * &rb[l - i];
                            }
                            total
                        })
                        .collect()
                }
                _ => return Err(fanin_error(NodeId(i), cs.len())),
            },
            DdnnfNode::Or(cs) => match cs.as_slice() {
                [] => vec![BigUint::zero()],
                [a, b] => {
                    let union = vars.get(NodeId(i)).len();
                    let (na, nb) = (vars.get(*a).len(), vars.get(*b).len());
                    // Variables one child mentions but the other does not;
                    // the other child's models are free over them.
                    let (s1, s2) = (union - na, union - nb);
                    let (ra, rb) = (&rows[a.0], &rows[b.0]);
                    (0..=union)
                        .map(|l| {
                            let mut total = BigUint::zero();
                            for i in l.saturating_sub(s1)..=l.min(na) {
                                total += &ra[i] * &binomials[s1][l - i];
                            }
                            for j in l.saturating_sub(s2)..=l.min(nb) {
                                total += &rb[j] * &binomials[s2][l - j];
                            }
                            total
                        })
                        .collect()
                }
                _ => return Err(fanin_error(NodeId(i), cs.len())),
            },
        };
        rows.push(row);
    }
    Ok(SatKTable {
        rows,
        root: ddnnf.root(),
    })
}

fn fanin_error(node: NodeId, fanin: usize) -> Error {
    Error::InvalidCircuit(format!(
        "node {node} has fan-in {fanin}; stratified counting needs fan-in 0 or 2"
    ))
}

/// Errors unless every variable of the circuit is an endogenous fact
/// variable (auxiliary encoding variables must be purged first).
fn ensure_purged(ddnnf: &Ddnnf) -> Result<()> {
    let vars = ddnnf.compute_vars();
    for v in vars.get(ddnnf.root()) {
        if !ddnnf.var_map().is_endogenous(*v) {
            return Err(Error::InvalidCircuit(format!(
                "auxiliary variable {v} remains; purge the encoding first"
            )));
        }
    }
    Ok(())
}

/// Exact Shapley value of one endogenous fact.
pub fn shapley_ddnnf(ddnnf: &Ddnnf, fact: FactId, limits: &Limits) -> Result<Rational> {
    ensure_purged(ddnnf)?;
    let universe: Vec<VarId> = ddnnf.var_map().endo_vars();
    let completed = ddnnf.complete_vars(&universe)?;
    shapley_of_completed(&completed, fact, limits)
}

fn shapley_of_completed(completed: &Ddnnf, fact: FactId, limits: &Limits) -> Result<Rational> {
    let var = completed
        .var_map()
        .var_of(fact)
        .ok_or(Error::NotEndogenous(fact))?;
    let n = completed.var_map().endo_vars().len();
    let coefficients = shapley_coefficients(n);

    let gained = compute_all_satk(&completed.substitute(var, true).normalize_fanin2(), limits)?;
    let lost = compute_all_satk(&completed.substitute(var, false).normalize_fanin2(), limits)?;
    let gained = pad(gained.root_row(), n);
    let lost = pad(lost.root_row(), n);

    let mut total = Rational::zero();
    for k in 0..n {
        let diff = BigInt::from(gained[k].clone()) - BigInt::from(lost[k].clone());
        if !diff.is_zero() {
            total += &coefficients[k] * Rational::from(diff);
        }
    }
    Ok(total)
}

/// Root rows always have `n` entries after completion, except for constant
/// circuits over an empty variable set; pad those with zero counts.
fn pad(row: &[BigUint], n: usize) -> Vec<BigUint> {
    let mut out = row.to_vec();
    out.resize(n.max(1), BigUint::zero());
    out
}

/// Exact Shapley values of every endogenous fact, in parallel.
pub fn shapley_all(ddnnf: &Ddnnf, limits: &Limits) -> Result<ShapleyReport> {
    ensure_purged(ddnnf)?;
    let universe: Vec<VarId> = ddnnf.var_map().endo_vars();
    if universe.is_empty() {
        return Ok(ShapleyReport::new(Method::ExactDdnnf, Vec::new()));
    }
    let completed = ddnnf.complete_vars(&universe)?;
    let entries: Vec<ReportEntry> = universe
        .par_iter()
        .map(|&v| {
            let fact = FactId(v.0);
            let value = shapley_of_completed(&completed, fact, limits)?;
            Ok(ReportEntry {
                fact,
                label: completed.var_map().label(v).unwrap_or_default().to_string(),
                value,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ShapleyReport::new(Method::ExactDdnnf, entries))
}

//! Shapley values through probabilistic query evaluation.
//!
//! Under independent fact probabilities, the probability that a d-DNNF is
//! satisfied follows the circuit structure directly: products at And nodes
//! (disjoint variables) and sums at Or nodes (disjoint models). Giving every
//! one of the `n` endogenous facts the probability `z / (1 + z)` ties the
//! result to the stratified model counts:
//!
//! ```text
//! (1 + z)^n * Pr(q) = sum_k #slices(k) * z^k
//! ```
//!
//! The right-hand side is a degree-`n` polynomial in `z`, so evaluating the
//! circuit at `z = 1, …, n+1` and interpolating recovers every `#slices(k)`
//! exactly — probabilistic evaluation alone suffices to drive the same
//! size-stratified Shapley formula as direct counting. The interpolation is
//! an exact rational Lagrange solve of the underlying Vandermonde system;
//! any non-integer or out-of-range count indicates a broken circuit and is
//! reported instead of silently rounded.

use std::collections::BTreeMap;

use num::bigint::{BigInt, ToBigInt};
use num::{BigUint, One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial_table, shapley_coefficients};
use crate::ddnnf::{Ddnnf, DdnnfNode};
use crate::lineage::{FactId, SetFunction, MAX_BRUTE_FORCE_FACTS};
use crate::report::{Method, ReportEntry, ShapleyReport};
use crate::{Error, Rational, Result};

/// Independent success probability per fact.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProbabilityMap {
    probs: BTreeMap<FactId, Rational>,
}

impl ProbabilityMap {
    /// Validates that every probability lies in `[0, 1]`.
    pub fn new(probs: BTreeMap<FactId, Rational>) -> Result<Self> {
        for (&fact, p) in &probs {
            if p.is_negative() || p > &Rational::one() {
                return Err(Error::InvalidProbability(fact));
            }
        }
        Ok(ProbabilityMap { probs })
    }

    /// The same probability for every listed fact.
    pub fn uniform(facts: &[FactId], p: Rational) -> Result<Self> {
        Self::new(facts.iter().map(|&f| (f, p.clone())).collect())
    }

    pub fn get(&self, fact: FactId) -> Option<&Rational> {
        self.probs.get(&fact)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Parses a two-column text file: `fact_id probability` per line, where
    /// the probability is a decimal (`0.25`) or a fraction (`1/4`). Blank
    /// lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let mut parts = line.split_whitespace();
            let (Some(id), Some(p), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad(format!("expected `fact_id probability`, got `{line}`")));
            };
            let id: u32 = id
                .parse()
                .map_err(|_| bad(format!("invalid fact id `{id}`")))?;
            let p = parse_rational(p).ok_or_else(|| bad(format!("invalid probability `{p}`")))?;
            if probs.insert(FactId(id), p).is_some() {
                return Err(Error::DuplicateFact(FactId(id)));
            }
        }
        Self::new(probs)
    }
}

/// Parses `p/q` fractions and decimal literals into exact rationals.
fn parse_rational(text: &str) -> Option<Rational> {
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.parse().ok()?;
        let den: BigInt = den.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().ok()?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(Rational::new(num, den))
}

/// Satisfaction probability of a purged d-DNNF under independent fact
/// probabilities.
pub fn prob_ddnnf(ddnnf: &Ddnnf, probs: &ProbabilityMap) -> Result<Rational> {
    let mut values: Vec<Rational> = Vec::with_capacity(ddnnf.len());
    for node in ddnnf.nodes() {
        let v = match node {
            DdnnfNode::True => Rational::one(),
            DdnnfNode::False => Rational::zero(),
            DdnnfNode::Lit(lit) => {
                if !ddnnf.var_map().is_endogenous(lit.var) {
                    return Err(Error::InvalidCircuit(format!(
                        "auxiliary variable {} remains; purge the encoding first",
                        lit.var
                    )));
                }
                let fact = FactId(lit.var.0);
                let p = probs.get(fact).ok_or(Error::MissingProbability(fact))?;
                if lit.positive {
                    p.clone()
                } else {
                    Rational::one() - p
                }
            }
            // Decomposability makes children independent.
            DdnnfNode::And(cs) => cs.iter().map(|c| values[c.0].clone()).product(),
            // Determinism makes children's models disjoint.
            DdnnfNode::Or(cs) => cs.iter().map(|c| values[c.0].clone()).sum(),
        };
        values.push(v);
    }
    Ok(values[ddnnf.root().0].clone())
}

/// Stratified model counts over the endogenous facts, indexed by size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlicesVector {
    counts: Vec<BigUint>,
}

impl SlicesVector {
    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    /// Number of endogenous facts the counts range over.
    pub fn universe_size(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn to_json(&self) -> String {
        let doc = SlicesJson {
            universe_size: self.universe_size(),
            counts: self.counts.iter().map(|c| c.to_string()).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("slices serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct SlicesJson {
    universe_size: usize,
    counts: Vec<String>,
}

/// Recovers the stratified model counts of a purged d-DNNF purely from
/// probabilistic evaluations, via exact polynomial interpolation.
pub fn slices_via_vandermonde(ddnnf: &Ddnnf) -> Result<SlicesVector> {
    let universe: Vec<FactId> = ddnnf
        .var_map()
        .endo_vars()
        .into_iter()
        .map(|v| FactId(v.0))
        .collect();
    let n = universe.len();

    // Evaluate (1+z)^n * Pr(q) at z = 1..=n+1.
    let mut points: Vec<(Rational, Rational)> = Vec::with_capacity(n + 1);
    for z in 1..=(n as u64 + 1) {
        let z = Rational::from(BigInt::from(z));
        let p = z.clone() / (Rational::one() + z.clone());
        let probs = ProbabilityMap::uniform(&universe, p)?;
        let scale = num::pow::pow(Rational::one() + z.clone(), n);
        let value = scale * prob_ddnnf(ddnnf, &probs)?;
        points.push((z, value));
    }

    let coefficients = interpolate(&points);
    debug_assert_eq!(coefficients.len(), n + 1);

    let binomials = binomial_table(n);
    let mut counts = Vec::with_capacity(n + 1);
    for (k, c) in coefficients.iter().enumerate() {
        let invalid = || Error::NonIntegerSliceCount {
            k,
            value: c.to_string(),
        };
        if !c.is_integer() || c.is_negative() {
            return Err(invalid());
        }
        let count = c
            .to_integer()
            .to_bigint()
            .and_then(|b| b.to_biguint())
            .ok_or_else(invalid)?;
        if count > binomials[n][k] {
            return Err(invalid());
        }
        counts.push(count);
    }
    Ok(SlicesVector { counts })
}

/// Lagrange interpolation: the unique polynomial of degree below the number
/// of points passing through all of them, as a coefficient vector.
fn interpolate(points: &[(Rational, Rational)]) -> Vec<Rational> {
    // full(x) = prod_j (x - z_j)
    let mut full = vec![Rational::one()];
    for (z, _) in points {
        full = mul_linear(&full, z);
    }
    let mut result = vec![Rational::zero(); points.len()];
    for (j, (zj, bj)) in points.iter().enumerate() {
        // basis_j(x) = full(x) / (x - z_j), scaled to 1 at z_j.
        let basis = div_linear(&full, zj);
        let mut denom = Rational::one();
        for (m, (zm, _)) in points.iter().enumerate() {
            if m != j {
                denom *= zj - zm;
            }
        }
        let scale = bj / denom;
        for (r, b) in result.iter_mut().zip(&basis) {
            *r += &scale * b;
        }
    }
    result
}

/// Multiplies a coefficient vector by `(x - root)`.
fn mul_linear(poly: &[Rational], root: &Rational) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); poly.len() + 1];
    for (i, c) in poly.iter().enumerate() {
        out[i + 1] += c;
        out[i] -= root * c;
    }
    out
}

/// Divides by `(x - root)` with synthetic division; the remainder must be
/// zero because `root` is a root of the polynomial.
fn div_linear(poly: &[Rational], root: &Rational) -> Vec<Rational> {
    let d = poly.len() - 1;
    let mut quotient = vec![Rational::zero(); d];
    let mut carry = Rational::zero();
    for i in (0..d).rev() {
        carry = &poly[i + 1] + root * &carry;
        quotient[i] = carry.clone();
    }
    debug_assert!((&poly[0] + root * &carry).is_zero());
    quotient
}

/// Exact Shapley value of one fact, entirely through probabilistic
/// evaluation of the two pinned circuits.
pub fn shapley_via_pqe(ddnnf: &Ddnnf, fact: FactId) -> Result<Rational> {
    let var = ddnnf
        .var_map()
        .var_of(fact)
        .ok_or(Error::NotEndogenous(fact))?;
    let n = ddnnf.var_map().endo_vars().len();
    let coefficients = shapley_coefficients(n);

    let gained = slices_via_vandermonde(&ddnnf.substitute(var, true))?;
    let lost = slices_via_vandermonde(&ddnnf.substitute(var, false))?;

    let mut total = Rational::zero();
    for (k, coefficient) in coefficients.iter().enumerate().take(n) {
        let diff = BigInt::from(gained.counts()[k].clone()) - BigInt::from(lost.counts()[k].clone());
        if !diff.is_zero() {
            total += coefficient * Rational::from(diff);
        }
    }
    Ok(total)
}

/// Exact Shapley values of every endogenous fact via the probabilistic
/// route.
pub fn shapley_all_via_pqe(ddnnf: &Ddnnf) -> Result<ShapleyReport> {
    let universe = ddnnf.var_map().endo_vars();
    let entries: Vec<ReportEntry> = universe
        .par_iter()
        .map(|&v| {
            let fact = FactId(v.0);
            Ok(ReportEntry {
                fact,
                label: ddnnf.var_map().label(v).unwrap_or_default().to_string(),
                value: shapley_via_pqe(ddnnf, fact)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ShapleyReport::new(Method::ExactPqe, entries))
}

/// Reference probability computation by enumerating all coalitions.
pub fn brute_force_pqe(game: &impl SetFunction, probs: &ProbabilityMap) -> Result<Rational> {
    let players = game.players();
    if players.len() > MAX_BRUTE_FORCE_FACTS {
        return Err(Error::TooManyFactsForBruteForce {
            n: players.len(),
            max: MAX_BRUTE_FORCE_FACTS,
        });
    }
    let weights: Vec<&Rational> = players
        .iter()
        .map(|&f| probs.get(f).ok_or(Error::MissingProbability(f)))
        .collect::<Result<_>>()?;

    fn go(
        game: &impl SetFunction,
        weights: &[&Rational],
        idx: usize,
        mask: u128,
        acc: Rational,
        total: &mut Rational,
    ) {
        if acc.is_zero() {
            return;
        }
        if idx == weights.len() {
            if game.eval(mask) {
                *total += acc;
            }
            return;
        }
        let p = weights[idx];
        go(game, weights, idx + 1, mask | (1 << idx), acc.clone() * p, total);
        go(
            game,
            weights,
            idx + 1,
            mask,
            acc * (Rational::one() - p),
            total,
        );
    }

    let mut total = Rational::zero();
    go(game, &weights, 0, 0, Rational::one(), &mut total);
    Ok(total)
}

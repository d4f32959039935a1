//! Ranking-quality metrics comparing an estimated Shapley report against an
//! exact one: normalized discounted cumulative gain, precision at a cutoff,
//! and mean absolute / squared error.
//!
//! All metrics share the same deterministic tie rule: entries are ranked by
//! descending value, ties broken by ascending fact id (the rule implemented
//! by [`ShapleyReport::ranking`]).

use std::collections::{BTreeMap, BTreeSet};

use num::{Signed, Zero};

use crate::lineage::FactId;
use crate::report::{rational_to_f64, ShapleyReport};
use crate::{Error, Rational, Result};

/// Ranking cutoffs reported by [`RankingComparison`]; cutoffs larger than
/// the fact set are skipped.
pub const PRECISION_CUTOFFS: [usize; 4] = [1, 3, 5, 10];

fn check_comparable(truth: &ShapleyReport, estimate: &ShapleyReport) -> Result<()> {
    if truth.is_empty() && estimate.is_empty() {
        return Err(Error::EmptyFactSet);
    }
    let same = truth.len() == estimate.len()
        && truth
            .entries()
            .iter()
            .zip(estimate.entries())
            .all(|(t, e)| t.fact == e.fact);
    if !same {
        return Err(Error::MismatchedFactSets);
    }
    Ok(())
}

/// Normalized discounted cumulative gain of the estimate's ranking, with the
/// exact Shapley value as the gain of each fact and a `1/log2(rank + 1)`
/// discount. Assumes nonnegative truth values (monotone lineage). When every
/// ordering is ideal (all gains equal, in particular all zero) the score
/// is 1.
pub fn ndcg(truth: &ShapleyReport, estimate: &ShapleyReport) -> Result<f64> {
    check_comparable(truth, estimate)?;
    let gains: BTreeMap<FactId, f64> = truth
        .entries()
        .iter()
        .map(|e| (e.fact, rational_to_f64(&e.value)))
        .collect();
    let dcg: f64 = estimate
        .ranking()
        .iter()
        .enumerate()
        .map(|(i, fact)| gains[fact] / (i as f64 + 2.0).log2())
        .sum();
    let idcg: f64 = truth
        .ranking()
        .iter()
        .enumerate()
        .map(|(i, fact)| gains[fact] / (i as f64 + 2.0).log2())
        .sum();
    if idcg == 0.0 {
        return Ok(1.0);
    }
    Ok((dcg / idcg).min(1.0))
}

/// Fraction of the true top-`k` facts that also appear in the estimated
/// top-`k`, under the deterministic tie rule. `k` must lie in `1..=n`.
pub fn precision_at_k(
    truth: &ShapleyReport,
    estimate: &ShapleyReport,
    k: usize,
) -> Result<f64> {
    check_comparable(truth, estimate)?;
    let n = truth.len();
    if k == 0 || k > n {
        return Err(Error::PrecisionKOutOfRange { k, n });
    }
    let top = |report: &ShapleyReport| -> BTreeSet<FactId> {
        report.ranking().into_iter().take(k).collect()
    };
    let overlap = top(truth).intersection(&top(estimate)).count();
    Ok(overlap as f64 / k as f64)
}

/// Mean absolute error and mean squared error of the estimate's values,
/// averaged over the (shared) fact set. Exact rational arithmetic.
pub fn l1_l2(truth: &ShapleyReport, estimate: &ShapleyReport) -> Result<(Rational, Rational)> {
    check_comparable(truth, estimate)?;
    let mut l1 = Rational::zero();
    let mut l2 = Rational::zero();
    for (t, e) in truth.entries().iter().zip(estimate.entries()) {
        let diff = &e.value - &t.value;
        l1 += diff.abs();
        l2 += &diff * &diff;
    }
    let n = Rational::from_integer(truth.len().into());
    Ok((l1 / &n, l2 / n))
}

/// Every ranking metric of an estimate against the exact truth, computed in
/// one pass: nDCG, precision at each applicable cutoff from
/// [`PRECISION_CUTOFFS`], and mean absolute / squared error.
#[derive(Debug, Clone)]
pub struct RankingComparison {
    ndcg: f64,
    precision_at: Vec<(usize, f64)>,
    l1: Rational,
    l2: Rational,
}

impl RankingComparison {
    pub fn compare(truth: &ShapleyReport, estimate: &ShapleyReport) -> Result<Self> {
        let ndcg = ndcg(truth, estimate)?;
        let n = truth.len();
        let precision_at = PRECISION_CUTOFFS
            .iter()
            .copied()
            .filter(|&k| k <= n)
            .map(|k| Ok((k, precision_at_k(truth, estimate, k)?)))
            .collect::<Result<Vec<_>>>()?;
        let (l1, l2) = l1_l2(truth, estimate)?;
        Ok(RankingComparison {
            ndcg,
            precision_at,
            l1,
            l2,
        })
    }

    pub fn ndcg(&self) -> f64 {
        self.ndcg
    }

    /// `(k, precision@k)` pairs for every cutoff that fits the fact set.
    pub fn precision_at(&self) -> &[(usize, f64)] {
        &self.precision_at
    }

    /// Precision at one specific cutoff, if it was applicable.
    pub fn precision(&self, k: usize) -> Option<f64> {
        self.precision_at
            .iter()
            .find(|&&(cutoff, _)| cutoff == k)
            .map(|&(_, p)| p)
    }

    pub fn l1(&self) -> &Rational {
        &self.l1
    }

    pub fn l2(&self) -> &Rational {
        &self.l2
    }
}

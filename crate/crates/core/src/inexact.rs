//! Fast inexact scorers: the CNF clause-structure proxy, Monte Carlo
//! permutation sampling, and a KernelSHAP-style regression estimator.
//!
//! # CNF proxy
//!
//! Instead of the Shapley values of a CNF `φ = ψ_1 ∧ … ∧ ψ_n` (hard), the
//! proxy scores facts against the additive relaxation `h = (1/n) Σ ψ_i`.
//! Shapley values are linear in the game and have a closed form per clause:
//! a clause with `a` positive and `b` negative literals contributes
//! `+1/((a+b)·C(a+b-1, b))` to each of its positive variables and
//! `-1/((a+b)·C(a+b-1, a))` to each negative one. The resulting scores can
//! be far from the true values but tend to preserve their order, at linear
//! cost in the size of the encoding.
//!
//! # Sampling estimators
//!
//! [`monte_carlo`] averages marginal contributions over `r` random
//! permutations (one marginal per fact per permutation, so an `r·n` sample
//! budget). [`kernel_shap`] samples coalitions, weights them with the
//! Shapley kernel `(n-1)/(C(n,s)·s·(n-s))` and solves a weighted
//! least-squares fit whose efficiency constraint is eliminated by
//! substitution; over the full coalition space the fit recovers the exact
//! values, which [`kernel_shap_enumerated`] exploits for small games. Both
//! estimators draw from a seeded portable generator (ChaCha12), so results
//! are reproducible across platforms.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{Integer, One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::cnf::CnfFormula;
use crate::combinatorics::binomial_table;
use crate::lineage::{FactId, SetFunction, MAX_BRUTE_FORCE_FACTS};
use crate::report::{Method, ReportEntry, ShapleyReport};
use crate::{Error, Rational, Result};

/// Number of samples per endogenous fact plus the generator seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleBudget {
    pub samples_per_fact: usize,
    pub seed: u64,
}

impl SampleBudget {
    pub fn new(samples_per_fact: usize, seed: u64) -> Result<Self> {
        if samples_per_fact == 0 {
            return Err(Error::EmptySampleBudget);
        }
        Ok(SampleBudget {
            samples_per_fact,
            seed,
        })
    }
}

/// One clause's closed-form contribution to one fact, before the `1/n`
/// normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseContribution {
    pub clause: usize,
    pub fact: FactId,
    pub phi: Rational,
}

/// One literal's contribution, recorded compactly: the share magnitude is
/// `1/(len·C(len−1, opposing))` and is only materialized on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct TraceStep {
    clause: usize,
    fact: FactId,
    positive: bool,
    len: usize,
    opposing: usize,
}

/// Proxy scores for every endogenous fact, with a per-clause trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProxyScore {
    clause_count: usize,
    entries: Vec<ReportEntry>,
    steps: Vec<TraceStep>,
}

impl ProxyScore {
    pub fn clause_count(&self) -> usize {
        self.clause_count
    }

    pub fn value_of(&self, fact: FactId) -> Option<&Rational> {
        self.entries
            .iter()
            .find(|e| e.fact == fact)
            .map(|e| &e.value)
    }

    pub fn values(&self) -> BTreeMap<FactId, Rational> {
        self.entries
            .iter()
            .map(|e| (e.fact, e.value.clone()))
            .collect()
    }

    /// Per-clause contributions in clause order (normalization excluded).
    pub fn trace(&self) -> Vec<ClauseContribution> {
        let max_len = self.steps.iter().map(|s| s.len).max().unwrap_or(0);
        let binomials = binomial_table(max_len.saturating_sub(1));
        self.steps
            .iter()
            .map(|step| {
                let denom = BigInt::from(step.len as u64)
                    * BigInt::from(binomials[step.len - 1][step.opposing].clone());
                let share = Rational::new(BigInt::one(), denom);
                ClauseContribution {
                    clause: step.clause,
                    fact: step.fact,
                    phi: if step.positive { share } else { -share },
                }
            })
            .collect()
    }

    pub fn to_report(&self) -> ShapleyReport {
        ShapleyReport::new(Method::Proxy, self.entries.clone())
    }

    pub fn into_report(self) -> ShapleyReport {
        ShapleyReport::new(Method::Proxy, self.entries)
    }
}

/// Per-clause literal statistics, plus the interned slots of the two share
/// magnitudes the clause can contribute (`usize::MAX` when a polarity is
/// absent).
struct ClauseStats {
    len: usize,
    neg: usize,
    positive_slot: usize,
    negative_slot: usize,
}

/// Scores every endogenous fact of the formula against the additive clause
/// relaxation, in one pass over the clauses.
pub fn cnf_proxy(cnf: &CnfFormula) -> Result<ProxyScore> {
    let n = cnf.clauses().len();
    let max_len = cnf.clauses().iter().map(|c| c.len()).max().unwrap_or(0);
    let binomials = binomial_table(max_len.saturating_sub(1));

    // Variable ids are dense, so flat tables beat maps in the per-literal
    // loops below.
    let slots = cnf.num_vars() as usize + 1;
    let mut endo = vec![false; slots];
    for var in cnf.var_map().endo_vars() {
        endo[var.0 as usize] = true;
    }

    // One pass for validation and clause statistics. The magnitude of a
    // literal's contribution is the Shapley value of the variable within the
    // single-clause game — unmentioned players are dummies, so it is
    // unchanged by the rest of the variable set. Only a handful of distinct
    // magnitudes 1/(m·C(m-1,k)) occur; intern them so the scoring loop is
    // pure array indexing, and accumulate integer multiples of their common
    // denominator so each fact is reduced exactly once at the end.
    let mut seen = vec![false; slots];
    let mut key_slots: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut denoms: Vec<BigInt> = Vec::new();
    let mut stats: Vec<ClauseStats> = Vec::with_capacity(n);
    for (i, clause) in cnf.clauses().iter().enumerate() {
        let mut neg = 0;
        for lit in clause {
            if std::mem::replace(&mut seen[lit.var.0 as usize], true) {
                return Err(Error::RepeatedVariable {
                    clause: i,
                    var: lit.var,
                });
            }
            neg += usize::from(!lit.positive);
        }
        for lit in clause {
            seen[lit.var.0 as usize] = false;
        }
        let m = clause.len();
        let mut slot_of = |k: usize| {
            *key_slots.entry((m, k)).or_insert_with(|| {
                denoms.push(BigInt::from(m as u64) * BigInt::from(binomials[m - 1][k].clone()));
                denoms.len() - 1
            })
        };
        stats.push(ClauseStats {
            len: m,
            neg,
            positive_slot: if neg < m { slot_of(neg) } else { usize::MAX },
            negative_slot: if neg > 0 { slot_of(m - neg) } else { usize::MAX },
        });
    }
    let common: BigInt = denoms.iter().fold(BigInt::one(), |acc, d| acc.lcm(d));
    // Per interned slot: the share as an integer multiple of `1/common`.
    let weights: Vec<BigInt> = denoms.iter().map(|denom| &common / denom).collect();

    let mut sums = vec![BigInt::zero(); slots];
    let mut steps = Vec::new();
    for ((i, clause), stat) in cnf.clauses().iter().enumerate().zip(&stats) {
        for lit in clause {
            if !endo[lit.var.0 as usize] {
                continue;
            }
            let sum = &mut sums[lit.var.0 as usize];
            let opposing = if lit.positive {
                *sum += &weights[stat.positive_slot];
                stat.neg
            } else {
                *sum -= &weights[stat.negative_slot];
                stat.len - stat.neg
            };
            steps.push(TraceStep {
                clause: i,
                fact: FactId(lit.var.0),
                positive: lit.positive,
                len: stat.len,
                opposing,
            });
        }
    }

    let total_denom = BigInt::from(n.max(1) as u64) * &common;
    let small_denom = total_denom.to_u64();
    let entries = cnf
        .var_map()
        .endo_vars()
        .into_iter()
        .map(|var| {
            let sum = std::mem::take(&mut sums[var.0 as usize]);
            let value = match (sum.to_i64(), small_denom) {
                // Machine-word reduction covers every realistic formula; the
                // result is already in lowest terms, so skip the big-integer
                // normalization.
                (Some(s), Some(d)) => {
                    let g = s.unsigned_abs().gcd(&d);
                    Rational::new_raw(
                        BigInt::from(s as i128 / g as i128),
                        BigInt::from(d / g),
                    )
                }
                _ => Rational::new(sum, total_denom.clone()),
            };
            ReportEntry {
                fact: FactId(var.0),
                label: cnf.var_map().label(var).unwrap_or_default().to_string(),
                value,
            }
        })
        .collect();
    Ok(ProxyScore {
        clause_count: n,
        entries,
        steps,
    })
}

/// Estimates Shapley values by averaging marginal contributions over
/// `samples_per_fact` uniform permutations. Exactly reproducible for a
/// given seed; every estimate is an exact rational with denominator
/// `samples_per_fact`.
pub fn monte_carlo(
    game: &impl SetFunction,
    labels: impl Fn(FactId) -> String,
    budget: &SampleBudget,
) -> Result<ShapleyReport> {
    let r = budget.samples_per_fact;
    if r == 0 {
        return Err(Error::EmptySampleBudget);
    }
    let players = game.players();
    let n = players.len();
    let mut rng = ChaCha12Rng::seed_from_u64(budget.seed);
    let mut totals = vec![0i64; n];
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..r {
        order.shuffle(&mut rng);
        let mut mask = 0u128;
        let mut prev = game.eval(mask);
        for &p in &order {
            mask |= 1u128 << p;
            let cur = game.eval(mask);
            totals[p] += cur as i64 - prev as i64;
            prev = cur;
        }
    }
    let entries = players
        .iter()
        .enumerate()
        .map(|(i, &fact)| ReportEntry {
            fact,
            label: labels(fact),
            value: Rational::new(BigInt::from(totals[i]), BigInt::from(r as u64)),
        })
        .collect();
    Ok(ShapleyReport::new(Method::MonteCarlo, entries))
}

/// The Shapley kernel weight for a size-`s` coalition out of `n`.
fn kernel_weight(n: usize, s: usize, binomials: &[Vec<num::BigUint>]) -> f64 {
    let choose = binomials[n][s].to_f64().unwrap_or(f64::MAX);
    (n - 1) as f64 / (choose * (s * (n - s)) as f64)
}

/// Estimates Shapley values with a least-squares fit over
/// `samples_per_fact · n` coalitions sampled proportionally to the Shapley
/// kernel (sizes `1..n-1` drawn with mass `∝ 1/(s·(n-s))`, subsets uniform
/// within a size, so the kernel weight is absorbed into the sampling density
/// and every sample enters the fit with unit weight). The empty and full
/// coalitions enter through the efficiency constraint.
pub fn kernel_shap(
    game: &impl SetFunction,
    labels: impl Fn(FactId) -> String,
    budget: &SampleBudget,
) -> Result<ShapleyReport> {
    let n = game.players().len();
    if n < 2 {
        return Err(Error::TooFewFactsForKernelShap(n));
    }
    if budget.samples_per_fact == 0 {
        return Err(Error::EmptySampleBudget);
    }
    let samples = budget.samples_per_fact * n;
    // Per-size sampling mass: summing the kernel over the C(n,s) subsets of
    // one size leaves 1/(s·(n-s)) up to a constant factor.
    let masses: Vec<f64> = (1..n).map(|s| 1.0 / (s * (n - s)) as f64).collect();
    let total: f64 = masses.iter().sum();
    let mut rng = ChaCha12Rng::seed_from_u64(budget.seed);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut draw = || {
        let mut u = rng.gen::<f64>() * total;
        let mut s = n - 1;
        for (i, mass) in masses.iter().enumerate() {
            if u < *mass {
                s = i + 1;
                break;
            }
            u -= mass;
        }
        indices.shuffle(&mut rng);
        let mask = indices[..s]
            .iter()
            .fold(0u128, |mask, &i| mask | (1u128 << i));
        (mask, 1.0)
    };
    let coalitions: Vec<(u128, f64)> = (0..samples).map(|_| draw()).collect();
    solve_kernel_fit(game, labels, &coalitions)
}

/// The same fit over every coalition of size `1..n-1` exactly once, which
/// reproduces the exact Shapley values (up to the ridge term) without
/// sampling. Only feasible for small games.
pub fn kernel_shap_enumerated(
    game: &impl SetFunction,
    labels: impl Fn(FactId) -> String,
) -> Result<ShapleyReport> {
    let n = game.players().len();
    if n < 2 {
        return Err(Error::TooFewFactsForKernelShap(n));
    }
    if n > MAX_BRUTE_FORCE_FACTS {
        return Err(Error::TooManyFactsForBruteForce {
            n,
            max: MAX_BRUTE_FORCE_FACTS,
        });
    }
    let binomials = binomial_table(n);
    let full = (1u128 << n) - 1;
    let coalitions: Vec<(u128, f64)> = (1..full)
        .map(|mask| {
            let s = mask.count_ones() as usize;
            (mask, kernel_weight(n, s, &binomials))
        })
        .collect();
    solve_kernel_fit(game, labels, &coalitions)
}

fn solve_kernel_fit(
    game: &impl SetFunction,
    labels: impl Fn(FactId) -> String,
    coalitions: &[(u128, f64)],
) -> Result<ShapleyReport> {
    let players = game.players();
    let n = players.len();
    let d = n - 1;
    let full = (1u128 << n) - 1;
    let v0 = game.eval(0) as u8 as f64;
    let v1 = game.eval(full) as u8 as f64;

    // Efficiency (sum of coefficients = v1 - v0) is enforced by substituting
    // the last coefficient away: with reduced features x'_i = z_i - z_last
    // and target y' = y - v0 - z_last (v1 - v0), ordinary weighted least
    // squares on the remaining d coefficients is equivalent.
    let mut a = vec![vec![0.0f64; d]; d];
    let mut b = vec![0.0f64; d];
    let mut x = vec![0.0f64; d];
    for &(mask, w) in coalitions {
        let z_last = (mask >> (n - 1)) & 1;
        for (i, slot) in x.iter_mut().enumerate() {
            *slot = ((mask >> i) & 1) as f64 - z_last as f64;
        }
        let y = game.eval(mask) as u8 as f64 - v0 - z_last as f64 * (v1 - v0);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            let wxi = w * x[i];
            for j in 0..d {
                a[i][j] += wxi * x[j];
            }
            b[i] += wxi * y;
        }
    }
    // Ridge term: keeps the system solvable when sampling leaves the normal
    // matrix singular.
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += 1e-9;
    }
    let head = solve_linear(a, b);
    let tail = (v1 - v0) - head.iter().sum::<f64>();

    let entries = players
        .iter()
        .enumerate()
        .map(|(i, &fact)| {
            let coefficient = if i < d { head[i] } else { tail };
            ReportEntry {
                fact,
                label: labels(fact),
                value: Rational::from_float(coefficient)
                    .expect("ridge regularization keeps coefficients finite"),
            }
        })
        .collect();
    Ok(ShapleyReport::new(Method::KernelShap, entries))
}

/// Gaussian elimination with partial pivoting.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let d = b.len();
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty system");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        for row in col + 1..d {
            let factor = a[row][col] / diag;
            if factor == 0.0 {
                continue;
            }
            let (top, bottom) = a.split_at_mut(row);
            for (entry, &upper) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *entry -= factor * upper;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0f64; d];
    for col in (0..d).rev() {
        let mut acc = b[col];
        for k in col + 1..d {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    x
}

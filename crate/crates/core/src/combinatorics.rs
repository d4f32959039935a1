//! Cached factorials, binomial tables and Shapley coefficients.

use num::bigint::BigInt;
use num::BigUint;
use num::One;

use crate::Rational;

/// `0!, 1!, ..., n!`.
pub(crate) fn factorials(n: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = BigUint::one();
    out.push(acc.clone());
    for i in 1..=n {
        acc *= BigUint::from(i);
        out.push(acc.clone());
    }
    out
}

/// Pascal triangle up to row `n`: `table[m][k] = C(m, k)` for `k <= m`.
pub(crate) fn binomial_table(n: usize) -> Vec<Vec<BigUint>> {
    let mut table: Vec<Vec<BigUint>> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut row = Vec::with_capacity(m + 1);
        row.push(BigUint::one());
        for k in 1..m {
            let v = &table[m - 1][k - 1] + &table[m - 1][k];
            row.push(v);
        }
        if m > 0 {
            row.push(BigUint::one());
        }
        table.push(row);
    }
    table
}

/// Shapley permutation coefficients for `n` players:
/// `coeff[k] = k! (n - k - 1)! / n!` for `k = 0..n-1`.
pub(crate) fn shapley_coefficients(n: usize) -> Vec<Rational> {
    if n == 0 {
        return Vec::new();
    }
    let fact = factorials(n);
    (0..n)
        .map(|k| {
            Rational::new(
                BigInt::from(&fact[k] * &fact[n - k - 1]),
                BigInt::from(fact[n].clone()),
            )
        })
        .collect()
}

//! Log-space combinatorics.
//!
//! Factorials and binomials are evaluated through the log-gamma function so
//! that moment sums and bound formulas stay finite far beyond the point where
//! `k!` or `rho^k` overflow.

use statrs::function::gamma::ln_gamma;

use crate::scalar::Scalar;

/// `ln(n!)`, exact summation for small `n` and log-gamma beyond.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 32 {
        (2..=n).map(|i| (i as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Numerically stable `ln(sum(exp(terms)))`.
pub fn log_sum_exp<T: Scalar>(terms: impl IntoIterator<Item = T>) -> T {
    let terms: Vec<T> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    if max == T::infinity() {
        return max;
    }
    let sum = terms.iter().fold(T::zero(), |acc, &t| acc + (t - max).exp());
    max + sum.ln()
}

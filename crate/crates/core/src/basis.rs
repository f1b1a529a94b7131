//! The two polynomial basis families.
//!
//! * Normalized Hermite: `psi_k(x) = He_k(x / sqrt(t)) / sqrt(k!)`, orthonormal
//!   under the law of a standard Brownian motion at time `t`.
//! * Exponential martingale: `psi_k(S(t)) = exp(k W(t) - k^2 t / 2)`, evaluated
//!   from the geometric state `S(t) = exp(W(t) - t/2)` as `S^k exp(k(1-k)t/2)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::special::ln_factorial;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasisError {
    #[error("basis date must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("exponential-martingale basis needs a positive state, got {0}")]
    NonPositiveState(f64),
    #[error("expected {expected} coefficients, got {actual}")]
    Dimension { expected: usize, actual: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    HermiteNormalized,
    ExponentialMartingale,
}

/// Basis family with highest index `order` (so `order + 1` functions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    pub family: BasisFamily,
    pub order: usize,
}

impl BasisSpec {
    pub fn hermite(order: usize) -> Self {
        BasisSpec { family: BasisFamily::HermiteNormalized, order }
    }

    pub fn exponential_martingale(order: usize) -> Self {
        BasisSpec { family: BasisFamily::ExponentialMartingale, order }
    }

    pub fn size(&self) -> usize {
        self.order + 1
    }
}

/// Probabilists' Hermite polynomial by the three-term recurrence
/// `He_{n+1} = x He_n - n He_{n-1}`.
pub fn hermite<T: Scalar>(n: usize, x: T) -> T {
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = x;
    for k in 1..n {
        let next = x * cur - T::of_usize(k) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `He_n` from the explicit alternating sum
/// `sum_i (-1)^i n! x^{n-2i} / ((n-2i)! i! 2^i)`.
///
/// Cancels badly for large `n`; kept as an independent check on [`hermite`].
pub fn hermite_explicit<T: Scalar>(n: usize, x: T) -> T {
    let mut acc = T::zero();
    for i in 0..=n / 2 {
        let ln_coef = ln_factorial(n as u64)
            - ln_factorial((n - 2 * i) as u64)
            - ln_factorial(i as u64)
            - i as f64 * std::f64::consts::LN_2;
        let coef = T::of(ln_coef.exp().round());
        let term = coef * x.powi((n - 2 * i) as i32);
        acc = if i % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

fn check_time<T: Scalar>(t: T) -> Result<(), BasisError> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(BasisError::NonPositiveTime(t.as_f64()))
    }
}

/// Write `psi_0..psi_K` at `state` (date `t`) into `out`.
///
/// `out.len()` must equal `spec.size()`.
pub fn eval_basis_into<T: Scalar>(spec: BasisSpec, t: T, state: T, out: &mut [T]) -> Result<(), BasisError> {
    check_time(t)?;
    if out.len() != spec.size() {
        return Err(BasisError::Dimension { expected: spec.size(), actual: out.len() });
    }
    match spec.family {
        BasisFamily::HermiteNormalized => {
            // normalized recurrence: psi_{k+1} = (x psi_k - sqrt(k) psi_{k-1}) / sqrt(k+1)
            let x = state / t.sqrt();
            out[0] = T::one();
            if spec.order >= 1 {
                out[1] = x;
            }
            for k in 1..spec.order {
                let kk = T::of_usize(k);
                out[k + 1] = (x * out[k] - kk.sqrt() * out[k - 1]) / (kk + T::one()).sqrt();
            }
        }
        BasisFamily::ExponentialMartingale => {
            if !(state > T::zero()) {
                return Err(BasisError::NonPositiveState(state.as_f64()));
            }
            let half_t = t * T::of(0.5);
            let mut power = T::one();
            out[0] = T::one();
            for k in 1..=spec.order {
                power = power * state;
                let kk = T::of_usize(k);
                out[k] = if k == 1 { power } else { power * (kk * (T::one() - kk) * half_t).exp() };
            }
        }
    }
    Ok(())
}

/// `(psi_0(state), ..., psi_K(state))` at date `t`.
pub fn eval_basis<T: Scalar>(spec: BasisSpec, t: T, state: T) -> Result<Vec<T>, BasisError> {
    let mut out = vec![T::zero(); spec.size()];
    eval_basis_into(spec, t, state, &mut out)?;
    Ok(out)
}

/// `f_k(t)` making `f_k(t) psi_k(S(t))` a martingale: `t^{k/2}` for Hermite, 1 otherwise.
pub fn martingale_scale<T: Scalar>(spec: BasisSpec, k: usize, t: T) -> T {
    match spec.family {
        BasisFamily::HermiteNormalized => t.powf(T::of(k as f64 / 2.0)),
        BasisFamily::ExponentialMartingale => T::one(),
    }
}

/// `He_n(x)^2 = sum_i c_i He_{2i}(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareExpansion<T> {
    pub degree: usize,
    pub coefficients: Vec<T>,
}

impl<T: Scalar> SquareExpansion<T> {
    pub fn evaluate(&self, x: T) -> T {
        self.coefficients
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, &c)| acc + c * hermite(2 * i, x))
    }
}

/// Coefficients `c_i = (n!)^2 / ((i!)^2 (n-i)!)`.
pub fn hermite_square_expansion<T: Scalar>(n: usize) -> SquareExpansion<T> {
    let lf = |k: usize| ln_factorial(k as u64);
    let coefficients = (0..=n)
        .map(|i| T::of((2.0 * lf(n) - 2.0 * lf(i) - lf(n - i)).exp()))
        .collect();
    SquareExpansion { degree: n, coefficients }
}

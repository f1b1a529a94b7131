//! Closed-form moments of the two basis families, the dominant-summand index
//! `k*`, and the critical growth curves `K(N)`.
//!
//! Every combinatorial or exponential quantity is accumulated in log space and
//! exponentiated only when a value is returned; overflow then surfaces as
//! `+inf` rather than as an error.

mod bounds;
mod gram;

pub use bounds::{
    expected_continuation_error_closed_form, expected_mse_closed_form, theorem3_bound, worst_case_bounds_normal,
    BoundReport, MseSetting, MultiperiodSetting, Theorem3Params,
};
pub use gram::{gram_analysis, gram_matrix, vandermonde_log_determinant, GramAnalysis, CONDITION_LIMIT};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::special::{ln_binomial, log_sum_exp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentError {
    #[error("time ratio rho must be >= 1, got {0}")]
    RatioBelowOne(f64),
    #[error("dates must satisfy 0 < t1 <= t2, got t1 = {t1}, t2 = {t2}")]
    InvalidTimes { t1: f64, t2: f64 },
    #[error("path count must be at least {min}, got {actual}")]
    PathCount { min: u64, actual: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Gram matrix at t = {t} is too ill-conditioned to invert (condition estimate {condition:e})")]
    GramConditioning { t: f64, condition: f64 },
}

fn check_rho<T: Scalar>(rho: T) -> Result<(), MomentError> {
    if rho >= T::one() && rho.is_finite() {
        Ok(())
    } else {
        Err(MomentError::RatioBelowOne(rho.as_f64()))
    }
}

fn check_times<T: Scalar>(t1: T, t2: T) -> Result<(), MomentError> {
    if t1 > T::zero() && t2 >= t1 && t2.is_finite() {
        Ok(())
    } else {
        Err(MomentError::InvalidTimes { t1: t1.as_f64(), t2: t2.as_f64() })
    }
}

/// `E[psi_{2,k2}(S_2) psi_{1,k1}(S_1)]` for normalized Hermite on Brownian motion:
/// `rho^{-k1/2}` on the diagonal, zero elsewhere.
pub fn first_cross_moment_normal<T: Scalar>(k1: usize, k2: usize, rho: T) -> Result<T, MomentError> {
    check_rho(rho)?;
    if k1 != k2 {
        return Ok(T::zero());
    }
    Ok(rho.powf(-T::of(k1 as f64) / T::of(2.0)))
}

/// Log of the summand `rho^{-k} C(2k,k) C(k1,k) C(k2,k)`.
fn ln_fourth_summand<T: Scalar>(k: usize, k1: usize, k2: usize, ln_rho: T) -> T {
    let k64 = k as u64;
    -T::of_usize(k) * ln_rho
        + T::of(ln_binomial(2 * k64, k64) + ln_binomial(k1 as u64, k64) + ln_binomial(k2 as u64, k64))
}

/// `ln E[psi_{2,k2}(S_2)^2 psi_{1,k1}(S_1)^2]`.
pub fn ln_fourth_cross_moment_normal<T: Scalar>(k1: usize, k2: usize, rho: T) -> Result<T, MomentError> {
    check_rho(rho)?;
    let ln_rho = rho.ln();
    Ok(log_sum_exp((0..=k1.min(k2)).map(|k| ln_fourth_summand(k, k1, k2, ln_rho))))
}

/// `E[psi_{2,k2}(S_2)^2 psi_{1,k1}(S_1)^2] = sum_k rho^{-k} C(2k,k) C(k1,k) C(k2,k)`.
pub fn fourth_cross_moment_normal<T: Scalar>(k1: usize, k2: usize, rho: T) -> Result<T, MomentError> {
    ln_fourth_cross_moment_normal(k1, k2, rho).map(T::exp)
}

/// Index of the largest summand of the fourth moment at `k1 = k2 = K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KStar<T> {
    pub index: usize,
    /// Consecutive summand ratios `r_{kK}`, `k = 0..K-1`.
    pub ratios: Vec<T>,
}

/// `k* = min{k : r_{kK} <= 1}` with
/// `r_{kK} = 2(2k+1)(K-k)^2 / (rho (k+1)^3)`, or `K` if no ratio drops to 1.
pub fn k_star<T: Scalar>(order: usize, rho: T) -> KStar<T> {
    let ratios: Vec<T> = (0..order)
        .map(|k| {
            let kk = k as f64;
            let gap = (order - k) as f64;
            T::of(2.0 * (2.0 * kk + 1.0) * gap * gap) / (rho * T::of((kk + 1.0).powi(3)))
        })
        .collect();
    let index = ratios.iter().position(|&r| r <= T::one()).unwrap_or(order);
    KStar { index, ratios }
}

/// `c_rho = 2 log(2 + sqrt(rho))`.
pub fn c_rho<T: Scalar>(rho: T) -> T {
    T::of(2.0) * (T::of(2.0) + rho.sqrt()).ln()
}

/// Asymptotic dominant fraction `a = 2 / (2 + sqrt(rho))`.
pub fn dominant_fraction<T: Scalar>(rho: T) -> T {
    T::of(2.0) / (T::of(2.0) + rho.sqrt())
}

/// Parameters of a critical-curve computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "setting", rename_all = "snake_case", deny_unknown_fields)]
pub enum CriticalSetting<T> {
    /// Brownian motion with Hermite basis, `rho = t2 / t1`.
    NormalSingle { rho: T },
    /// Geometric Brownian motion with exponential-martingale basis.
    LognormalSingle { t1: T, t2: T },
    /// Multiperiod Brownian: `m` dates, error measured at date `n`, grid ratio
    /// `c = max t_{j+1}/t_j`, and `rho = t_m / t_{m-1}` for the divergence side.
    NormalMulti { m: usize, n: usize, c: T, rho: T },
    /// Multiperiod geometric: `t_m` and `t_{m-1}`.
    LognormalMulti { m: usize, n: usize, t_m: T, t_m_minus_1: T },
}

/// `(K_lower, K_upper)`: below `K_lower` convergence is guaranteed, above
/// `K_upper` the worst-case error diverges (both at `delta = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalCurve<T> {
    pub lower: T,
    pub upper: T,
}

pub fn critical_curve<T: Scalar>(setting: CriticalSetting<T>, n_paths: u64) -> Result<CriticalCurve<T>, MomentError> {
    if n_paths < 2 {
        return Err(MomentError::PathCount { min: 2, actual: n_paths });
    }
    let log_n = T::of(n_paths as f64).ln();
    match setting {
        CriticalSetting::NormalSingle { rho } => {
            check_rho(rho)?;
            let k = log_n / c_rho(rho);
            Ok(CriticalCurve { lower: k, upper: k })
        }
        CriticalSetting::LognormalSingle { t1, t2 } => {
            if !(t1 > T::zero() && t2 > t1) {
                return Err(MomentError::InvalidTimes { t1: t1.as_f64(), t2: t2.as_f64() });
            }
            Ok(CriticalCurve {
                lower: (log_n / (T::of(5.0) * t1 + t2)).sqrt(),
                upper: (log_n / (T::of(3.0) * t1 + t2)).sqrt(),
            })
        }
        CriticalSetting::NormalMulti { m, n, c, rho } => {
            check_multi(m, n)?;
            if !(c >= T::one()) {
                return Err(MomentError::InvalidParameter(format!("grid ratio c must be >= 1, got {c}")));
            }
            check_rho(rho)?;
            let steps = T::of_usize(m - n);
            Ok(CriticalCurve {
                lower: log_n / (steps * (T::of(2.0) * T::of(3.0).ln() + c.ln())),
                upper: log_n / c_rho(rho),
            })
        }
        CriticalSetting::LognormalMulti { m, n, t_m, t_m_minus_1 } => {
            check_multi(m, n)?;
            if !(t_m_minus_1 > T::zero() && t_m > t_m_minus_1) {
                return Err(MomentError::InvalidTimes { t1: t_m_minus_1.as_f64(), t2: t_m.as_f64() });
            }
            let steps = T::of_usize(m - n);
            Ok(CriticalCurve {
                lower: (log_n / ((T::of(6.0) * steps + T::of(2.0)) * t_m)).sqrt(),
                upper: (log_n / (T::of(3.0) * t_m + t_m_minus_1)).sqrt(),
            })
        }
    }
}

fn check_multi(m: usize, n: usize) -> Result<(), MomentError> {
    if n >= 1 && m > n {
        Ok(())
    } else {
        Err(MomentError::InvalidParameter(format!("need m > n >= 1, got m = {m}, n = {n}")))
    }
}

/// Moments of the exponential-martingale basis under geometric Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LognormalMoments<T> {
    pub k1: usize,
    pub k2: usize,
    pub t1: T,
    pub t2: T,
    /// `E[psi_{k1}(S_1) psi_{k2}(S_2)] = exp(k1 k2 t1)`.
    pub first: T,
    /// `E[psi_{k1}(S_1)^2 psi_{k2}(S_2)^2] = exp(k1^2 t1 + k2^2 t2 + 4 k1 k2 t1)`.
    pub fourth: T,
    pub log_first: T,
    pub log_fourth: T,
}

impl<T: Scalar> LognormalMoments<T> {
    /// `ln E[psi_{k2}(S_2)^2 psi_j(S_1) psi_k(S_1)] = k2^2 t2 + 2 k2 (j+k) t1 + j k t1`.
    ///
    /// Conditioning on `W(t_1)`: `E[psi_{k2}(S_2)^2 | W_1] = exp(2 k2 W_1 - k2^2 t2 + 2 k2^2 (t2 - t1))`,
    /// then the moment generating function of `W(t_1)` at `2 k2 + j + k`.
    pub fn log_mixed(&self, j: usize, k: usize) -> T {
        lognormal_log_mixed(self.k2, j, k, self.t1, self.t2)
    }

    pub fn mixed(&self, j: usize, k: usize) -> T {
        self.log_mixed(j, k).exp()
    }
}

pub(crate) fn lognormal_log_mixed<T: Scalar>(k2: usize, j: usize, k: usize, t1: T, t2: T) -> T {
    let k2 = T::of_usize(k2);
    let (j, k) = (T::of_usize(j), T::of_usize(k));
    k2 * k2 * t2 + T::of(2.0) * k2 * (j + k) * t1 + j * k * t1
}

pub fn lognormal_moments<T: Scalar>(k1: usize, k2: usize, t1: T, t2: T) -> Result<LognormalMoments<T>, MomentError> {
    check_times(t1, t2)?;
    let (a, b) = (T::of_usize(k1), T::of_usize(k2));
    let log_first = a * b * t1;
    let log_fourth = a * a * t1 + b * b * t2 + T::of(4.0) * a * b * t1;
    Ok(LognormalMoments { k1, k2, t1, t2, first: log_first.exp(), fourth: log_fourth.exp(), log_first, log_fourth })
}

//! Worst-case MSE bounds and exact expected errors of the quasi-regression
//! estimator.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::gram::{gram_analysis, gram_norm_bounds};
use super::{c_rho, check_rho, check_times, dominant_fraction, k_star, ln_fourth_cross_moment_normal, lognormal_log_mixed};
use super::MomentError;
use crate::basis::BasisSpec;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::special::{ln_binomial, log_sum_exp};

/// Lower/upper bound pair with the constants that produced it.
///
/// `lower`/`upper` are `exp(log_lower)`/`exp(log_upper)` and may be infinite;
/// a `None` log field means the value is exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport<T> {
    pub kind: String,
    pub order: usize,
    pub n_paths: u64,
    pub parameters: BTreeMap<String, T>,
    pub lower: T,
    pub upper: T,
    pub log_lower: Option<T>,
    pub log_upper: Option<T>,
    pub constants: BTreeMap<String, T>,
    /// Leading term of an asymptotic bound, `(1 + o(1))` taken as 1.
    pub asymptotic: bool,
}

fn from_log<T: Scalar>(log: Option<T>) -> T {
    log.map_or(T::zero(), T::exp)
}

/// Single-period worst-case bounds, Brownian motion with the Hermite basis:
///
/// * lower `= rho^{K-k*} C(2k*,k*) C(K,k*)^2 / ((K+1) N)`
/// * upper `= (K+1)^5 rho^{K-k*} C(2k*,k*) C(K,k*)^2 / N`
pub fn worst_case_bounds_normal<T: Scalar>(order: usize, n_paths: u64, rho: T) -> Result<BoundReport<T>, MomentError> {
    check_rho(rho)?;
    if n_paths < 1 {
        return Err(MomentError::PathCount { min: 1, actual: n_paths });
    }
    let ks = k_star(order, rho);
    let kst = ks.index as u64;
    let k = order as u64;
    let log_base = T::of_usize(order - ks.index) * rho.ln()
        + T::of(ln_binomial(2 * kst, kst) + 2.0 * ln_binomial(k, kst));
    let ln_k1 = T::of_usize(order + 1).ln();
    let ln_n = T::of(n_paths as f64).ln();
    let log_lower = log_base - ln_k1 - ln_n;
    let log_upper = T::of(5.0) * ln_k1 + log_base - ln_n;
    let a = dominant_fraction(rho);
    let constants = BTreeMap::from([
        ("k_star".to_string(), T::of_usize(ks.index)),
        ("c_rho".to_string(), c_rho(rho)),
        ("a".to_string(), a),
        ("b".to_string(), T::one() - a),
        ("log_dominant_summand".to_string(), log_base),
    ]);
    Ok(BoundReport {
        kind: "worst_case_normal".into(),
        order,
        n_paths,
        parameters: BTreeMap::from([("rho".to_string(), rho)]),
        lower: log_lower.exp(),
        upper: log_upper.exp(),
        log_lower: Some(log_lower),
        log_upper: Some(log_upper),
        constants,
        asymptotic: false,
    })
}

/// Single-period setting for the exact expected error of the worst-case target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "setting", rename_all = "snake_case", deny_unknown_fields)]
pub enum MseSetting<T> {
    /// Brownian motion, Hermite basis, `rho = t2 / t1`.
    Normal { rho: T },
    /// Geometric Brownian motion, exponential-martingale basis.
    Lognormal { t1: T, t2: T },
}

fn check_paths(n_paths: u64) -> Result<(), MomentError> {
    if n_paths < 1 {
        Err(MomentError::PathCount { min: 1, actual: n_paths })
    } else {
        Ok(())
    }
}

/// `ln(rho^K sum_k E[psi_{2K}^2 psi_{1k}^2])`, the normal-setting second moment
/// of the worst-case target summed over the basis.
fn ln_normal_target_energy<T: Scalar>(order: usize, rho: T) -> Result<T, MomentError> {
    let terms = (0..=order)
        .map(|k| ln_fourth_cross_moment_normal(order, k, rho))
        .collect::<Result<Vec<T>, _>>()?;
    Ok(T::of_usize(order) * rho.ln() + log_sum_exp(terms))
}

/// Per-path covariance `Cov(Y psi_j(S_1), Y psi_k(S_1))` for the lognormal
/// worst-case target `Y = psi_K(S_2)`.
fn lognormal_target_covariance<T: Scalar>(order: usize, t1: T, t2: T) -> Matrix<T> {
    let kk = T::of_usize(order);
    Matrix::from_fn(order + 1, order + 1, |j, k| {
        let gamma_j = (T::of_usize(j) * kk * t1).exp();
        let gamma_k = (T::of_usize(k) * kk * t1).exp();
        lognormal_log_mixed(order, j, k, t1, t2).exp() - gamma_j * gamma_k
    })
}

fn lognormal_inverse<T: Scalar>(order: usize, t1: T) -> Result<Matrix<T>, MomentError> {
    let g = gram_analysis(BasisSpec::exponential_martingale(order), t1);
    g.inverse.ok_or(MomentError::GramConditioning { t: t1.as_f64(), condition: g.condition_estimate.as_f64() })
}

/// Exact `E|beta~ - beta|^2` for the worst-case target at `N` paths.
///
/// * normal: `(rho^K sum_k M4(K, k, rho) - 1) / N` (the Gram matrix is the identity)
/// * lognormal: `trace(Psi^{-1} Sigma Psi^{-1}) / N`, with
///   `Sigma_jk = E[Y^2 psi_j psi_k] - gamma_j gamma_k` and `gamma_k = e^{k K t1}`
pub fn expected_mse_closed_form<T: Scalar>(setting: MseSetting<T>, order: usize, n_paths: u64) -> Result<T, MomentError> {
    check_paths(n_paths)?;
    let n = T::of(n_paths as f64);
    match setting {
        MseSetting::Normal { rho } => {
            check_rho(rho)?;
            Ok(ln_normal_target_energy(order, rho)?.exp_m1() / n)
        }
        MseSetting::Lognormal { t1, t2 } => {
            check_times(t1, t2)?;
            let inv = lognormal_inverse(order, t1)?;
            let sigma = lognormal_target_covariance(order, t1, t2);
            let m = inv.mul(&sigma).and_then(|a| a.mul(&inv)).expect("square matrices of equal size");
            Ok(m.trace() / n)
        }
    }
}

/// Exact `E[(beta~ - beta)^T Psi (beta~ - beta)]`, the expected squared
/// weighted-L2 distance between estimated and true continuation functions.
///
/// Equal to [`expected_mse_closed_form`] in the normal setting; lognormal gives
/// `trace(Sigma Psi^{-1}) / N`.
pub fn expected_continuation_error_closed_form<T: Scalar>(
    setting: MseSetting<T>,
    order: usize,
    n_paths: u64,
) -> Result<T, MomentError> {
    match setting {
        MseSetting::Normal { .. } => expected_mse_closed_form(setting, order, n_paths),
        MseSetting::Lognormal { t1, t2 } => {
            check_paths(n_paths)?;
            check_times(t1, t2)?;
            let inv = lognormal_inverse(order, t1)?;
            let sigma = lognormal_target_covariance(order, t1, t2);
            let m = sigma.mul(&inv).expect("square matrices of equal size");
            Ok(m.trace() / T::of(n_paths as f64))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiperiodSetting {
    Normal,
    Lognormal,
}

/// Inputs to the multiperiod error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Params<T> {
    pub setting: MultiperiodSetting,
    /// Number of exercise dates `m`.
    pub m: usize,
    /// Date index `n` at which the continuation error is measured.
    pub n: usize,
    pub order: usize,
    pub n_paths: u64,
    /// `c = max_j t_{j+1} / t_j`.
    pub c: T,
    /// `t_1`, where the lognormal inverse-Gram bound is largest.
    pub t_first: T,
    pub t_m: T,
}

/// Leading term of
/// `(2^{m-n} - 1) (K+1)^2 / N * B_K * A_K^{m-n} * E[psi_{mK}^2]^2`
/// with `A_K = (K+1) H_K E[psi_{mK}^4]` and `H_K = max(c^K, B_K^2 (K+1))`.
pub fn theorem3_bound<T: Scalar>(p: Theorem3Params<T>) -> Result<BoundReport<T>, MomentError> {
    if p.n < 1 || p.n > p.m {
        return Err(MomentError::InvalidParameter(format!("need 1 <= n <= m, got n = {}, m = {}", p.n, p.m)));
    }
    check_paths(p.n_paths)?;
    if !(p.c >= T::one()) {
        return Err(MomentError::InvalidParameter(format!("grid ratio c must be >= 1, got {}", p.c)));
    }
    if !(p.t_first > T::zero() && p.t_m >= p.t_first) {
        return Err(MomentError::InvalidTimes { t1: p.t_first.as_f64(), t2: p.t_m.as_f64() });
    }
    let k = T::of_usize(p.order);
    let ln_k1 = T::of_usize(p.order + 1).ln();
    let (log_b, log_e4, log_e2) = match p.setting {
        MultiperiodSetting::Normal => {
            (T::of(0.5) * ln_k1, ln_fourth_cross_moment_normal(p.order, p.order, T::one())?, T::zero())
        }
        MultiperiodSetting::Lognormal => {
            // Psi = [1] at K = 0, where the analytic bound degenerates to 0
            let log_b = if p.order == 0 { T::zero() } else { gram_norm_bounds(p.order, p.t_first).1 };
            (log_b, T::of(6.0) * k * k * p.t_m, k * k * p.t_m)
        }
    };
    let log_h = (k * p.c.ln()).max(T::of(2.0) * log_b + ln_k1);
    let log_a = ln_k1 + log_h + log_e4;
    let steps = p.m - p.n;
    let log_upper = if steps == 0 {
        None
    } else {
        let ln_pow2m1 = T::of((steps as f64 * std::f64::consts::LN_2).exp_m1().ln());
        Some(
            ln_pow2m1 + T::of(2.0) * ln_k1 - T::of(p.n_paths as f64).ln()
                + log_b
                + T::of_usize(steps) * log_a
                + T::of(2.0) * log_e2,
        )
    };
    let constants = BTreeMap::from([
        ("B_K".to_string(), log_b.exp()),
        ("H_K".to_string(), log_h.exp()),
        ("A_K".to_string(), log_a.exp()),
        ("log_B_K".to_string(), log_b),
        ("log_H_K".to_string(), log_h),
        ("log_A_K".to_string(), log_a),
        ("E_psi4".to_string(), log_e4.exp()),
        ("E_psi2".to_string(), log_e2.exp()),
        ("log_moment_factor".to_string(), T::of_usize(steps) * log_e4 + T::of(2.0) * log_e2),
    ]);
    let parameters = BTreeMap::from([
        ("m".to_string(), T::of_usize(p.m)),
        ("n".to_string(), T::of_usize(p.n)),
        ("c".to_string(), p.c),
        ("t_first".to_string(), p.t_first),
        ("t_m".to_string(), p.t_m),
    ]);
    Ok(BoundReport {
        kind: match p.setting {
            MultiperiodSetting::Normal => "multiperiod_normal".into(),
            MultiperiodSetting::Lognormal => "multiperiod_lognormal".into(),
        },
        order: p.order,
        n_paths: p.n_paths,
        parameters,
        lower: T::zero(),
        upper: from_log(log_upper),
        log_lower: None,
        log_upper,
        constants,
        asymptotic: true,
    })
}

//! Exact Gram matrices `Psi(t) = E[psi(S_t) psi(S_t)^T]` and their conditioning.

use serde::Serialize;

use crate::basis::{BasisFamily, BasisSpec};
use crate::linalg::{lu_log_determinant, Cholesky, Matrix};
use crate::scalar::Scalar;

/// Inverses are refused above this condition estimate.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Exact Gram matrix: the identity for Hermite, `exp(q r t)` (0-based) for the
/// exponential-martingale family.
pub fn gram_matrix<T: Scalar>(spec: BasisSpec, t: T) -> Matrix<T> {
    let n = spec.size();
    match spec.family {
        BasisFamily::HermiteNormalized => Matrix::identity(n),
        BasisFamily::ExponentialMartingale => Matrix::from_fn(n, n, |q, r| (T::of_usize(q * r) * t).exp()),
    }
}

/// `ln det Psi(t) = sum_{q<r} ln(e^{rt} - e^{qt})`, the Vandermonde product in
/// the nodes `e^{qt}`.
pub fn vandermonde_log_determinant<T: Scalar>(order: usize, t: T) -> T {
    let mut acc = T::zero();
    for r in 1..=order {
        for q in 0..r {
            // e^{rt} - e^{qt} = e^{qt} (e^{(r-q)t} - 1)
            acc = acc + T::of_usize(q) * t + (T::of_usize(r - q) * t).exp_m1().ln();
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramAnalysis<T> {
    pub family: BasisFamily,
    pub order: usize,
    pub t: T,
    pub matrix: Matrix<T>,
    /// Numerical `ln |det Psi|` (LU with partial pivoting).
    pub log_determinant: T,
    pub determinant_sign: i8,
    /// Closed-form `ln det Psi` (zero for Hermite, the Vandermonde product otherwise).
    pub log_determinant_closed_form: T,
    pub inverse: Option<Matrix<T>>,
    /// Entrywise Euclidean norm `||Psi||`.
    pub norm: T,
    pub inverse_norm: Option<T>,
    /// `||Psi|| ||Psi^{-1}||`; infinite when the factorization fails.
    pub condition_estimate: T,
    pub conditioning_failed: bool,
    /// `ln((K+1)^2 e^{2 K^2 t})`, the analytic bound on `||Psi(t)||` (exponential family).
    pub log_norm_bound: Option<T>,
    /// `ln(C(t)^{-1} K (K+1) (e^t/(e^t-1))^K)` with `C(t) = exp(-2e/(e^t-1)^2)`.
    pub log_inverse_norm_bound: Option<T>,
}

impl<T: Scalar> GramAnalysis<T> {
    pub fn size(&self) -> usize {
        self.order + 1
    }

    /// `Psi^{-1} v`, if the inverse was accepted.
    pub fn apply_inverse(&self, v: &[T]) -> Option<Vec<T>> {
        self.inverse.as_ref().and_then(|inv| inv.mul_vec(v).ok())
    }
}

/// Analytic norm bounds on `Psi(t)` and its inverse for the exponential family.
pub fn gram_norm_bounds<T: Scalar>(order: usize, t: T) -> (T, T) {
    let k = T::of_usize(order);
    let k1 = T::of_usize(order + 1);
    let two = T::of(2.0);
    let log_norm = two * k1.ln() + two * k * k * t;
    let em1 = t.exp_m1();
    let neg_log_c = two * T::of(std::f64::consts::E) / (em1 * em1);
    let log_inv = neg_log_c + k.ln() + k1.ln() + k * (t - em1.ln());
    (log_norm, log_inv)
}

/// Gram matrix analysis at date `t`; `t` must be positive.
///
/// An inverse whose condition estimate exceeds [`CONDITION_LIMIT`] is dropped
/// and `conditioning_failed` set, never returned silently inaccurate.
pub fn gram_analysis<T: Scalar>(spec: BasisSpec, t: T) -> GramAnalysis<T> {
    let size = spec.size();
    let matrix = gram_matrix(spec, t);
    let norm = matrix.frobenius_norm();
    let (log_determinant, determinant_sign) =
        lu_log_determinant(&matrix).expect("Gram matrices are square");
    let (log_determinant_closed_form, log_norm_bound, log_inverse_norm_bound) = match spec.family {
        BasisFamily::HermiteNormalized => (T::zero(), None, None),
        BasisFamily::ExponentialMartingale => {
            let (a, b) = gram_norm_bounds(spec.order, t);
            (vandermonde_log_determinant(spec.order, t), Some(a), Some(b))
        }
    };
    let (inverse, inverse_norm, condition_estimate) = match spec.family {
        BasisFamily::HermiteNormalized => {
            let root = T::of_usize(size).sqrt();
            (Some(Matrix::identity(size)), Some(root), T::of_usize(size))
        }
        BasisFamily::ExponentialMartingale => match Cholesky::factor(&matrix) {
            Ok(ch) => {
                let inv = ch.inverse();
                let inv_norm = inv.frobenius_norm();
                (Some(inv), Some(inv_norm), norm * inv_norm)
            }
            Err(_) => (None, None, T::infinity()),
        },
    };
    let conditioning_failed = !(condition_estimate.is_finite() && condition_estimate <= T::of(CONDITION_LIMIT));
    let (inverse, inverse_norm) = if conditioning_failed { (None, None) } else { (inverse, inverse_norm) };
    GramAnalysis {
        family: spec.family,
        order: spec.order,
        t,
        matrix,
        log_determinant,
        determinant_sign,
        log_determinant_closed_form,
        inverse,
        norm,
        inverse_norm,
        condition_estimate,
        conditioning_failed,
        log_norm_bound,
        log_inverse_norm_bound,
    }
}

//! Fine-grained federation weights and model averaging.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The row of weights one user assigns to every participant's local model.
///
/// For user `j` with self-weight `ω` and sample counts `n_i` summing to `N`:
/// `v_ji = (1−ω)·n_i/N` for `i ≠ j` and `v_jj = ω + (1−ω)·n_j/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FederationWeights<T> {
    weights: Vec<T>,
    omega: T,
    sample_counts: Vec<usize>,
    total: usize,
    self_index: usize,
}

impl<T: Scalar> FederationWeights<T> {
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn sample_counts(&self) -> &[usize] {
        &self.sample_counts
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn self_index(&self) -> usize {
        self.self_index
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

pub fn federation_weights<T: Scalar>(
    sample_counts: &[usize],
    omega: T,
    self_index: usize,
) -> Result<FederationWeights<T>> {
    if sample_counts.is_empty() {
        return Err(Error::EmptyInput);
    }
    if self_index >= sample_counts.len() {
        return Err(Error::IndexOutOfRange {
            index: self_index,
            len: sample_counts.len(),
        });
    }
    if !(omega >= T::zero() && omega <= T::one()) {
        return Err(Error::OutOfRange {
            name: "omega",
            value: omega.as_f64(),
            range: "[0, 1]",
        });
    }
    if sample_counts.contains(&0) {
        return Err(Error::InvalidProfile("sample counts must be positive".into()));
    }
    let total: usize = sample_counts.iter().sum();
    let n_total = T::from_count(total);
    let shared = T::one() - omega;
    let mut weights: Vec<T> = sample_counts
        .iter()
        .map(|&n| shared * T::from_count(n) / n_total)
        .collect();
    // rounding can push the self weight a hair above one
    weights[self_index] = (weights[self_index] + omega).min(T::one());
    Ok(FederationWeights {
        weights,
        omega,
        sample_counts: sample_counts.to_vec(),
        total,
        self_index,
    })
}

/// `Σ_i v_i θ_i`.
pub fn federated_estimate<T: Scalar>(weights: &FederationWeights<T>, thetas: &[Vec<T>]) -> Result<Vec<T>> {
    weighted_sum(weights.weights(), thetas)
}

/// FedAvg: `Σ_k (n_k/N) θ_k`.
pub fn fedavg_aggregate<T: Scalar>(models: &[Vec<T>], sample_counts: &[usize]) -> Result<Vec<T>> {
    if models.is_empty() {
        return Err(Error::EmptyInput);
    }
    if models.len() != sample_counts.len() {
        return Err(Error::DimensionMismatch {
            expected: models.len(),
            actual: sample_counts.len(),
        });
    }
    let total: usize = sample_counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyInput);
    }
    let n_total = T::from_count(total);
    let w: Vec<T> = sample_counts.iter().map(|&n| T::from_count(n) / n_total).collect();
    weighted_sum(&w, models)
}

fn weighted_sum<T: Scalar>(weights: &[T], thetas: &[Vec<T>]) -> Result<Vec<T>> {
    if weights.len() != thetas.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            actual: thetas.len(),
        });
    }
    let d = thetas.first().ok_or(Error::EmptyInput)?.len();
    let mut out = vec![T::zero(); d];
    for (&w, theta) in weights.iter().zip(thetas) {
        if theta.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: theta.len(),
            });
        }
        // A zero weight contributes exactly nothing, even for non-finite models.
        if w == T::zero() {
            continue;
        }
        for (o, &t) in out.iter_mut().zip(theta) {
            *o = *o + w * t;
        }
    }
    Ok(out)
}

//! Closed-form expected errors and partition cost under the isotropic
//! linear-regression model.
//!
//! `mu_e` is the mean sampling-noise variance across users and `sigma_sq`
//! the variance of true parameters around their common mean.
//!
//! Two single-user expressions coexist and do not agree: the local-estimation
//! error `μ_e·D/(n − D − 1)` and the federated error collapsed to one user,
//! `μ_e/n`. Both are kept as stated; callers choose.

use super::federation::{federation_weights, FederationWeights};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams<T> {
    mu_e: T,
    sigma_sq: T,
}

impl<T: Scalar> HyperParams<T> {
    pub fn new(mu_e: T, sigma_sq: T) -> Result<Self> {
        for (name, v) in [("mu_e", mu_e), ("sigma_sq", sigma_sq)] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::OutOfRange {
                    name,
                    value: v.as_f64(),
                    range: "[0, inf)",
                });
            }
        }
        Ok(Self { mu_e, sigma_sq })
    }

    pub fn mu_e(&self) -> T {
        self.mu_e
    }

    pub fn sigma_sq(&self) -> T {
        self.sigma_sq
    }
}

/// Expected MSE of a purely local OLS estimate: `μ_e·d/(n − d − 1)`.
pub fn expected_local_mse<T: Scalar>(hp: &HyperParams<T>, n: usize, d: usize) -> Result<T> {
    if n <= d + 1 {
        return Err(Error::DegenerateSampleSize { n, d });
    }
    Ok(hp.mu_e * T::from_count(d) / T::from_count(n - d - 1))
}

/// Expected MSE of the fine-grained federated estimate for the weights' owner:
///
/// `μ_e·Σ_i v_i²/n_i + (Σ_{i≠j} v_i² + (Σ_{i≠j} v_i)²)·σ²`
///
/// The noise term squares the weights: each user's estimation noise is
/// independent, so it enters the combined estimate scaled by `v_i²`.
pub fn expected_federated_mse<T: Scalar>(hp: &HyperParams<T>, w: &FederationWeights<T>) -> T {
    federated_mse_terms(hp, w.weights(), w.sample_counts(), w.self_index())
}

/// [`expected_federated_mse`] on raw weights and counts, for callers that
/// hold the weights fixed while varying counts.
///
/// Panics if the slices differ in length or `self_index` is out of range.
pub fn federated_mse_terms<T: Scalar>(
    hp: &HyperParams<T>,
    weights: &[T],
    sample_counts: &[usize],
    self_index: usize,
) -> T {
    assert_eq!(weights.len(), sample_counts.len());
    assert!(self_index < weights.len());
    let noise: T = weights
        .iter()
        .zip(sample_counts)
        .map(|(&v, &n)| v * v / T::from_count(n))
        .sum();
    let (mut sq, mut lin) = (T::zero(), T::zero());
    for (i, &v) in weights.iter().enumerate() {
        if i != self_index {
            sq = sq + v * v;
            lin = lin + v;
        }
    }
    hp.mu_e * noise + (sq + lin * lin) * hp.sigma_sq
}

/// Disjoint, nonempty coalitions covering players `0..n_players`.
/// Stored canonically: members ascending, coalitions ordered by first member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    coalitions: Vec<Vec<usize>>,
    n_players: usize,
}

impl Partition {
    pub fn new(coalitions: Vec<Vec<usize>>, n_players: usize) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut coalitions = coalitions;
        for c in &mut coalitions {
            if c.is_empty() {
                return Err(Error::InvalidPartition("empty coalition".into()));
            }
            for &p in c.iter() {
                if p >= n_players {
                    return Err(Error::InvalidPartition(format!("player {p} outside 0..{n_players}")));
                }
                if !seen.insert(p) {
                    return Err(Error::InvalidPartition(format!("player {p} appears twice")));
                }
            }
            c.sort_unstable();
        }
        if seen.len() != n_players {
            return Err(Error::InvalidPartition(format!(
                "{} of {n_players} players covered",
                seen.len()
            )));
        }
        coalitions.sort_unstable_by_key(|c| c[0]);
        Ok(Self { coalitions, n_players })
    }

    pub fn singletons(n_players: usize) -> Self {
        Self {
            coalitions: (0..n_players).map(|i| vec![i]).collect(),
            n_players,
        }
    }

    pub fn grand(n_players: usize) -> Self {
        Self {
            coalitions: if n_players == 0 {
                vec![]
            } else {
                vec![(0..n_players).collect()]
            },
            n_players,
        }
    }

    pub fn coalitions(&self) -> &[Vec<usize>] {
        &self.coalitions
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn len(&self) -> usize {
        self.coalitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coalitions.is_empty()
    }

    /// The coalition containing `player`.
    pub fn coalition_of(&self, player: usize) -> Option<&[usize]> {
        self.coalitions
            .iter()
            .find(|c| c.binary_search(&player).is_ok())
            .map(Vec::as_slice)
    }
}

/// Total cost `Σ_C {μ_e + σ²N_C − σ²·Σ_{i∈C} n_i²/N_C}`.
pub fn partition_cost<T: Scalar>(p: &Partition, hp: &HyperParams<T>, sample_counts: &[usize]) -> Result<T> {
    if sample_counts.len() != p.n_players() {
        return Err(Error::InvalidPartition(format!(
            "partition over {} players, {} sample counts",
            p.n_players(),
            sample_counts.len()
        )));
    }
    if sample_counts.contains(&0) {
        return Err(Error::InvalidPartition("sample counts must be positive".into()));
    }
    // μ_e·|Π| is kept separate so that all-singleton partitions cost exactly M·μ_e.
    let spread: T = p
        .coalitions()
        .iter()
        .map(|c| {
            let total = T::from_count(c.iter().map(|&i| sample_counts[i]).sum());
            let sq: T = c
                .iter()
                .map(|&i| {
                    let n = T::from_count(sample_counts[i]);
                    n * n
                })
                .sum();
            total - sq / total
        })
        .sum();
    Ok(hp.mu_e * T::from_count(p.len()) + hp.sigma_sq * spread)
}

/// Expected per-sample error of `player` inside `coalition` under
/// sample-proportional (uniform) federation, i.e. `expected_federated_mse`
/// with `ω = 0`. Player preferences compare these values.
pub fn coalition_error<T: Scalar>(
    hp: &HyperParams<T>,
    sample_counts: &[usize],
    coalition: &[usize],
    player: usize,
) -> Result<T> {
    let self_index = coalition
        .iter()
        .position(|&i| i == player)
        .ok_or(Error::IndexOutOfRange {
            index: player,
            len: coalition.len(),
        })?;
    let counts = coalition
        .iter()
        .map(|&i| {
            sample_counts.get(i).copied().ok_or(Error::IndexOutOfRange {
                index: i,
                len: sample_counts.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let w = federation_weights(&counts, T::zero(), self_index)?;
    Ok(expected_federated_mse(hp, &w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn hp(mu: f64, s2: f64) -> HyperParams<f64> {
        HyperParams::new(mu, s2).unwrap()
    }

    #[test]
    fn local_mse_examples() {
        assert_eq!(expected_local_mse(&hp(1.0, 0.0), 3, 1).unwrap(), 1.0);
        assert_relative_eq!(expected_local_mse(&hp(10.0, 0.0), 12, 2).unwrap(), 20.0 / 9.0);
        assert_eq!(expected_local_mse(&hp(0.0, 3.0), 50, 4).unwrap(), 0.0);
        assert_eq!(
            expected_local_mse(&hp(1.0, 0.0), 3, 2).unwrap_err(),
            Error::DegenerateSampleSize { n: 3, d: 2 }
        );
    }

    #[test]
    fn federated_mse_examples() {
        let w = federation_weights(&[5], 0.3f64, 0).unwrap();
        assert_relative_eq!(expected_federated_mse(&hp(10.0, 7.0), &w), 2.0);
        let w = federation_weights(&[1, 1], 0.0f64, 0).unwrap();
        assert_relative_eq!(expected_federated_mse(&hp(0.0, 4.0), &w), 2.0);
    }

    #[test]
    fn uniform_federation_noise_is_mu_over_total() {
        let w = federation_weights(&[3, 9, 4], 0.0f64, 2).unwrap();
        assert_relative_eq!(expected_federated_mse(&hp(8.0, 0.0), &w), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn partition_cost_examples() {
        let p = Partition::new(vec![vec![0]], 1).unwrap();
        assert_eq!(partition_cost(&p, &hp(2.5, 9.0), &[5]).unwrap(), 2.5);
        let p = Partition::singletons(2);
        assert_eq!(partition_cost(&p, &hp(1.5, 3.0), &[4, 7]).unwrap(), 3.0);
        let p = Partition::grand(2);
        assert_eq!(partition_cost(&p, &hp(1.0, 1.0), &[1, 1]).unwrap(), 2.0);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![vec![0], vec![0, 1]], 2).is_err());
        assert!(Partition::new(vec![vec![0]], 2).is_err());
        assert!(Partition::new(vec![vec![], vec![0]], 1).is_err());
        assert!(Partition::new(vec![vec![2]], 2).is_err());
        let p = Partition::new(vec![vec![2, 0], vec![1]], 3).unwrap();
        assert_eq!(p.coalitions(), &[vec![0, 2], vec![1]]);
        assert_eq!(p.coalition_of(2), Some(&[0, 2][..]));
        assert!(matches!(
            partition_cost(&p, &hp(1.0, 1.0), &[1, 2]),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn partition_cost_is_weighted_member_error() {
        let counts = [3usize, 10, 6, 1];
        let h = hp(2.0, 0.7);
        let p = Partition::new(vec![vec![0, 1, 3], vec![2]], 4).unwrap();
        let mut total = 0.0;
        for c in p.coalitions() {
            for &i in c {
                total += counts[i] as f64 * coalition_error(&h, &counts, c, i).unwrap();
            }
        }
        assert_relative_eq!(partition_cost(&p, &h, &counts).unwrap(), total, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn singletons_cost_exactly_m_mu(
            counts in prop::collection::vec(1usize..1000, 1..15),
            mu in 0.0f64..50.0,
            s2 in 0.0f64..50.0,
        ) {
            let p = Partition::singletons(counts.len());
            let c = partition_cost(&p, &hp(mu, s2), &counts).unwrap();
            prop_assert_eq!(c, counts.len() as f64 * mu);
        }

        #[test]
        fn local_mse_decreasing_in_n(mu in 0.01f64..20.0, d in 1usize..10, n in 0usize..500) {
            let h = hp(mu, 0.0);
            let n = n + d + 2;
            prop_assert!(expected_local_mse(&h, n + 1, d).unwrap() < expected_local_mse(&h, n, d).unwrap());
        }

        #[test]
        fn federated_mse_nonincreasing_in_counts_with_fixed_weights(
            counts in prop::collection::vec(1usize..200, 2..8),
            omega in 0.0f64..=1.0,
            mu in 0.0f64..10.0,
            s2 in 0.0f64..10.0,
            which in 0usize..8,
            bump in 1usize..100,
        ) {
            let h = hp(mu, s2);
            let w = federation_weights(&counts, omega, 0).unwrap();
            let base = expected_federated_mse(&h, &w);
            let mut more = counts.clone();
            let i = which % counts.len();
            more[i] += bump;
            let bumped = federated_mse_terms(&h, w.weights(), &more, 0);
            prop_assert!(bumped <= base + 1e-15);
            prop_assert!(base >= 0.0);
        }
    }
}

//! Non-UCB policies: uniform random selection and the sequential greedy
//! compare-and-switch rule with switching costs.

use super::ucb::ArmId;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};
use crate::scalar::Scalar;
use rand::Rng;
use std::collections::BTreeMap;

/// Uniform choice over `arms`.
pub fn random_select<R: Rng + ?Sized>(arms: &[ArmId], rng: &mut R) -> Result<ArmId> {
    if arms.is_empty() {
        return Err(Error::NoArms);
    }
    Ok(arms[rng.random_range(0..arms.len())])
}

/// Seeded random-selection baseline.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: SimRng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: rng_from_seed(seed),
        }
    }

    pub fn select(&mut self, arms: &[ArmId]) -> Result<ArmId> {
        random_select(arms, &mut self.rng)
    }
}

/// Reward of an action that incurs learning loss `fl_loss` and cost
/// `switch_cost`: `−(fl_loss + switch_cost)`.
pub fn cost_penalized_reward<T: Scalar>(fl_loss: T, switch_cost: T) -> T {
    -(fl_loss + switch_cost)
}

/// Symmetric lookup of the cost of moving between two clusters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairwiseCosts<T> {
    costs: BTreeMap<(ArmId, ArmId), T>,
}

impl<T: Scalar> PairwiseCosts<T> {
    pub fn new() -> Self {
        Self { costs: BTreeMap::new() }
    }

    fn key(a: ArmId, b: ArmId) -> (ArmId, ArmId) {
        (a.min(b), a.max(b))
    }

    pub fn insert(&mut self, a: ArmId, b: ArmId, cost: T) {
        self.costs.insert(Self::key(a, b), cost);
    }

    pub fn with(mut self, a: ArmId, b: ArmId, cost: T) -> Self {
        self.insert(a, b, cost);
        self
    }

    pub fn get(&self, a: ArmId, b: ArmId) -> Result<T> {
        self.costs
            .get(&Self::key(a, b))
            .copied()
            .ok_or(Error::MissingCost(a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyDecision {
    /// Leave local learning for the candidate cluster.
    Join,
    /// Keep learning locally.
    StayLocal,
    /// Move from the current cluster to the candidate.
    Switch,
    /// Keep the current cluster.
    Stay,
}

impl GreedyDecision {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Join => "join",
            Self::StayLocal => "stay_local",
            Self::Switch => "switch",
            Self::Stay => "stay",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyStep<T> {
    pub candidate: ArmId,
    pub candidate_loss: T,
    /// Zero while still learning locally.
    pub switch_cost: T,
    /// Loss of the position held before this comparison.
    pub current_loss: T,
    pub decision: GreedyDecision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace<T> {
    pub steps: Vec<GreedyStep<T>>,
    /// Clusters entered, in order.
    pub joined: Vec<ArmId>,
    /// `None` means the user keeps learning locally.
    pub final_cluster: Option<ArmId>,
    pub final_loss: T,
}

/// Visits `candidates` in order. While local, the user joins the first
/// cluster whose loss is strictly below its local loss (no cost is charged
/// for the first join). Once in a cluster, it moves to the next candidate
/// iff `candidate_loss + cost(current, candidate) < current_loss`.
pub fn greedy_switch_policy<T: Scalar>(
    local_loss: T,
    candidates: &[(ArmId, T)],
    costs: &PairwiseCosts<T>,
) -> Result<GreedyTrace<T>> {
    for (name, v) in
        std::iter::once(("local_loss", local_loss)).chain(candidates.iter().map(|&(_, l)| ("cluster_loss", l)))
    {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::OutOfRange {
                name,
                value: v.as_f64(),
                range: "(0, inf)",
            });
        }
    }
    let mut current: Option<ArmId> = None;
    let mut current_loss = local_loss;
    let mut steps = Vec::with_capacity(candidates.len());
    let mut joined = Vec::new();
    for &(candidate, candidate_loss) in candidates {
        let (switch_cost, decision) = match current {
            None if candidate_loss < current_loss => (T::zero(), GreedyDecision::Join),
            None => (T::zero(), GreedyDecision::StayLocal),
            Some(from) => {
                let c = costs.get(from, candidate)?;
                if candidate_loss + c < current_loss {
                    (c, GreedyDecision::Switch)
                } else {
                    (c, GreedyDecision::Stay)
                }
            }
        };
        steps.push(GreedyStep {
            candidate,
            candidate_loss,
            switch_cost,
            current_loss,
            decision,
        });
        if matches!(decision, GreedyDecision::Join | GreedyDecision::Switch) {
            current = Some(candidate);
            current_loss = candidate_loss;
            joined.push(candidate);
        }
    }
    Ok(GreedyTrace {
        steps,
        joined,
        final_cluster: current,
        final_loss: current_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn walkthrough_costs() -> PairwiseCosts<f64> {
        PairwiseCosts::new()
            .with(1, 2, 0.10309)
            .with(1, 3, 0.09618)
            .with(2, 3, 0.11272)
    }

    #[test]
    fn walkthrough_sequence() {
        let trace =
            greedy_switch_policy(0.5, &[(1, 0.42626), (2, 0.30186), (3, 0.26241)], &walkthrough_costs()).unwrap();
        let decisions: Vec<_> = trace.steps.iter().map(|s| s.decision).collect();
        assert_eq!(
            decisions,
            vec![GreedyDecision::Join, GreedyDecision::Switch, GreedyDecision::Stay]
        );
        assert_eq!(trace.joined, vec![1, 2]);
        assert_eq!(trace.final_cluster, Some(2));
        assert_eq!(trace.steps[0].switch_cost, 0.0);
    }

    #[test]
    fn local_learning_wins() {
        let trace = greedy_switch_policy(0.1, &[(1, 0.4), (2, 0.3)], &PairwiseCosts::new()).unwrap();
        assert!(trace.joined.is_empty());
        assert_eq!(trace.final_cluster, None);
        assert_eq!(trace.final_loss, 0.1);
    }

    #[test]
    fn free_switching_finds_scan_argmin() {
        let losses = [(0, 0.9), (1, 0.4), (2, 0.6), (3, 0.2), (4, 0.2)];
        let mut costs = PairwiseCosts::new();
        for a in 0..5 {
            for b in a + 1..5 {
                costs.insert(a, b, 0.0);
            }
        }
        let trace = greedy_switch_policy(1.0, &losses, &costs).unwrap();
        assert_eq!(trace.final_cluster, Some(3));
    }

    #[test]
    fn missing_cost_and_bad_losses() {
        assert_eq!(
            greedy_switch_policy(0.5, &[(1, 0.4), (2, 0.3)], &PairwiseCosts::new()).unwrap_err(),
            Error::MissingCost(1, 2)
        );
        assert!(greedy_switch_policy(0.5, &[(1, -0.4)], &PairwiseCosts::new()).is_err());
    }

    #[test]
    fn penalized_reward() {
        assert_relative_eq!(cost_penalized_reward(0.3, 0.1), -0.4);
        assert_eq!(cost_penalized_reward(0.3, 0.0), -0.3);
        assert_relative_eq!(cost_penalized_reward(0.3019, 0.1031), -0.405, epsilon = 1e-12);
    }

    #[test]
    fn random_policy() {
        assert_eq!(random_select(&[42], &mut rng_from_seed(0)).unwrap(), 42);
        assert_eq!(random_select(&[], &mut rng_from_seed(0)).unwrap_err(), Error::NoArms);
        let arms = [0, 1, 2, 3];
        let a: Vec<_> = {
            let mut p = RandomPolicy::new(17);
            (0..20).map(|_| p.select(&arms).unwrap()).collect()
        };
        let mut p = RandomPolicy::new(17);
        let b: Vec<_> = (0..20).map(|_| p.select(&arms).unwrap()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn random_policy_is_uniform() {
        let arms = [0, 1, 2, 3];
        let mut p = RandomPolicy::new(2024);
        let mut counts = [0usize; 4];
        let draws = 100_000;
        for _ in 0..draws {
            counts[p.select(&arms).unwrap()] += 1;
        }
        let expected = draws as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 3 degrees of freedom, 99.9th percentile
        assert!(chi2 < 16.27, "chi2 {chi2}");
        for &c in &counts {
            assert!((c as f64 / draws as f64 - 0.25).abs() < 0.02);
        }
    }

    proptest! {
        #[test]
        fn greedy_never_moves_without_gain(
            local in 0.01f64..2.0,
            losses in prop::collection::vec(0.01f64..2.0, 1..8),
            costs in prop::collection::vec(0.0f64..0.5, 28),
        ) {
            let candidates: Vec<(ArmId, f64)> = losses.iter().copied().enumerate().collect();
            let mut table = PairwiseCosts::new();
            let mut it = costs.iter();
            for a in 0..losses.len() {
                for b in a + 1..losses.len() {
                    table.insert(a, b, *it.next().unwrap());
                }
            }
            let trace = greedy_switch_policy(local, &candidates, &table).unwrap();
            for s in &trace.steps {
                if matches!(s.decision, GreedyDecision::Join | GreedyDecision::Switch) {
                    prop_assert!(s.candidate_loss + s.switch_cost < s.current_loss);
                }
            }
        }
    }
}

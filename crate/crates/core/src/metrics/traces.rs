use super::gaussian::{kl_gaussian, GaussianSpec};
use crate::bandit::{ArmId, RoundRecord};
use crate::error::Result;
use crate::scalar::Scalar;
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// Pull counts per arm. Every arm in `arms` appears, even with zero pulls.
pub fn selection_histogram<T>(trace: &[RoundRecord<T>], arms: &[ArmId]) -> BTreeMap<ArmId, u64> {
    let mut counts: BTreeMap<ArmId, u64> = arms.iter().map(|&a| (a, 0)).collect();
    for r in trace {
        *counts.entry(r.chosen_arm).or_insert(0) += 1;
    }
    counts
}

/// `(t, Σ_{s ≤ t} inst_regret_s)`.
pub fn cumulative_regret_series<T: Scalar>(trace: &[RoundRecord<T>]) -> Vec<(u64, T)> {
    trace
        .iter()
        .scan(T::zero(), |acc, r| {
            *acc = *acc + r.inst_regret;
            Some((r.t, *acc))
        })
        .collect()
}

/// The `k` arms closest to `user` by `KL(user ‖ arm)`, ascending, ties by id.
/// `k` larger than the arm count returns every arm.
pub fn top_k_by_kl<T: Scalar>(
    clusters: &[(ArmId, GaussianSpec<T>)],
    user: &GaussianSpec<T>,
    k: usize,
) -> Result<Vec<(ArmId, T)>> {
    let mut scored = clusters
        .iter()
        .map(|(id, g)| Ok((*id, kl_gaussian(user, g)?)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored)
}

use super::cluster::{fitted_gaussian, fl_round_in_place, ClusterState, Member};
use crate::error::{Error, Result};
use crate::metrics::kl_gaussian;
use crate::Partition;

/// Clusters formed by [`bootstrap_cold_start`], with the arrival indices of
/// each cluster's members.
#[derive(Debug, Clone, PartialEq)]
pub struct ColdStart {
    pub clusters: Vec<ClusterState>,
    pub membership: Vec<Vec<usize>>,
}

impl ColdStart {
    pub fn partition(&self) -> Result<Partition> {
        let n = self.membership.iter().map(Vec::len).sum();
        Partition::new(self.membership.clone(), n)
    }
}

/// Threshold clustering of users in arrival order.
///
/// The first user forms a singleton. Each later user fits OLS on its data and
/// compares `KL(user fit ‖ cluster)` against every existing cluster, where a
/// cluster is summarized by its global model and the average sampling
/// covariance of its members. The user joins the closest cluster when that
/// divergence is below `kl_threshold`, otherwise it starts a new one. Cluster
/// models are retrained whenever membership changes. A cluster's eval set is
/// the union of its members' data.
pub fn bootstrap_cold_start(users: &[Member], kl_threshold: f64) -> Result<ColdStart> {
    if !(kl_threshold > 0.0) {
        return Err(Error::OutOfRange {
            name: "kl_threshold",
            value: kl_threshold,
            range: "(0, inf]",
        });
    }
    let mut clusters: Vec<ClusterState> = Vec::new();
    let mut membership: Vec<Vec<usize>> = Vec::new();
    for (i, user) in users.iter().enumerate() {
        let fit = fitted_gaussian(&user.data)?;
        let mut best: Option<(usize, f64)> = None;
        for (k, c) in clusters.iter().enumerate() {
            let kl = kl_gaussian(&fit, &c.empirical_gaussian()?)?;
            if best.is_none_or(|(_, b)| kl < b) {
                best = Some((k, kl));
            }
        }
        match best {
            Some((k, kl)) if kl < kl_threshold => {
                let c = &mut clusters[k];
                c.members.push(user.clone());
                c.eval_set = c.eval_set.concat(&user.data)?;
                fl_round_in_place(c)?;
                membership[k].push(i);
            }
            _ => {
                let id = clusters.len();
                let mut c = ClusterState::new(id, vec![user.clone()], user.data.clone(), None)?;
                fl_round_in_place(&mut c)?;
                clusters.push(c);
                membership.push(vec![i]);
            }
        }
    }
    Ok(ColdStart { clusters, membership })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::sample_dataset;
    use crate::{InputSpec, UserProfile};

    fn member(theta: Vec<f64>, seed: u64) -> Member {
        let profile = UserProfile::new(theta, 0.2, 80, InputSpec::standard()).unwrap();
        Member {
            data: sample_dataset(&profile, seed),
            profile,
        }
    }

    #[test]
    fn single_user_is_singleton() {
        let out = bootstrap_cold_start(&[member(vec![1.0, 2.0], 1)], 1.0).unwrap();
        assert_eq!(out.membership, vec![vec![0]]);
        assert_eq!(out.clusters.len(), 1);
    }

    #[test]
    fn identical_profiles_merge() {
        let users = [member(vec![1.0, 2.0], 1), member(vec![1.0, 2.0], 2)];
        let out = bootstrap_cold_start(&users, 1e6).unwrap();
        assert_eq!(out.membership, vec![vec![0, 1]]);
        assert_eq!(out.clusters[0].total_samples, 160);
    }

    #[test]
    fn tiny_threshold_keeps_everyone_apart() {
        let users: Vec<_> = (0..4).map(|s| member(vec![1.0, 2.0], s)).collect();
        let out = bootstrap_cold_start(&users, 1e-12).unwrap();
        assert_eq!(out.clusters.len(), 4);
        assert_eq!(out.partition().unwrap().len(), 4);
    }

    #[test]
    fn rejects_non_positive_threshold() {
        assert!(bootstrap_cold_start(&[], 0.0).is_err());
        assert!(bootstrap_cold_start(&[], 1.0).unwrap().clusters.is_empty());
    }
}

use super::cluster::{ClusterState, NewUser};
use super::config::RewardMode;
use crate::error::{Error, Result};
use crate::estimator::{empirical_loss, fedavg_aggregate};
use crate::linalg::squared_distance;

/// Value of placing `user` in cluster `c`, computed without touching `c`.
///
/// * [`RewardMode::ModelDistance`]: `−‖θ_user − global_model‖²`.
/// * [`RewardMode::ImprovementMse`]: with `g(S) = −loss of S's FedAvg model`
///   on the cluster's eval set joined with the user's held-out rows, the
///   reward is `g(S ∪ user) − g(S)`.
pub fn evaluate_reward(c: &ClusterState, user: &NewUser, mode: RewardMode) -> Result<f64> {
    match mode {
        RewardMode::ModelDistance => {
            let theta = user.profile.theta_true();
            if theta.len() != c.global_model.len() {
                return Err(Error::DimensionMismatch {
                    expected: c.global_model.len(),
                    actual: theta.len(),
                });
            }
            Ok(-squared_distance(theta, &c.global_model))
        }
        RewardMode::ImprovementMse => {
            if c.eval_set.is_empty() {
                return Err(Error::EmptyEvalSet);
            }
            let eval = c.eval_set.concat(&user.holdout)?;
            let without = -empirical_loss(&c.global_model, &eval)?;
            let joined = if c.fitted_samples == 0 {
                user.local_fit.clone()
            } else {
                fedavg_aggregate(
                    &[c.global_model.clone(), user.local_fit.clone()],
                    &[c.fitted_samples, user.train.len()],
                )?
            };
            let with = -empirical_loss(&joined, &eval)?;
            Ok(with - without)
        }
    }
}

use crate::bandit::ExplorationBonus;
use crate::error::{Error, Result};
use crate::{HyperParams, SwitchCostParams};

/// How the value of placing the new user in a cluster is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RewardMode {
    /// Change in negative held-out loss of the cluster's FedAvg model when
    /// the user's data is added.
    ImprovementMse,
    /// `−‖θ_user − global_model‖²`.
    #[default]
    ModelDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ArrivalModel {
    /// Fixed cluster set for the whole horizon.
    #[default]
    SingleNewUser,
    /// New clusters appear as a Poisson process with `rate` arrivals per
    /// selection round.
    Poisson { rate: f64 },
}

/// Everything needed to generate and run one selection scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_clusters: usize,
    /// Inclusive range of members per cluster.
    pub users_per_cluster: (usize, usize),
    /// Inclusive range of generated samples per member.
    pub samples_per_user: (usize, usize),
    /// Samples generated for the arriving user.
    pub new_user_samples: usize,
    pub dims: usize,
    /// Self-weight of the new user's personalized model.
    pub omega: f64,
    /// `mu_e`: mean sampling-noise variance; `sigma_sq`: variance of member
    /// parameters around their cluster mean.
    pub hyper: HyperParams,
    /// Standard deviation of cluster means around the origin.
    pub cluster_spread: f64,
    /// Variance of the isotropic input distribution.
    pub input_variance: f64,
    pub horizon: usize,
    pub alpha_explore: f64,
    pub bonus: ExplorationBonus,
    pub reward_mode: RewardMode,
    /// Standard deviation of per-round reward noise; `None` means 5% of the
    /// spread of expected rewards across the current arms.
    pub reward_noise_std: Option<f64>,
    pub arrival: ArrivalModel,
    pub seed: u64,
    /// Charged on realized rewards whenever the chosen arm changes.
    pub switch_cost: Option<SwitchCostParams>,
    /// Cluster whose generating distribution the new user shares; drawn from
    /// the seed when `None`.
    pub matched_cluster: Option<usize>,
    /// Fraction of each member's samples held out for server-side evaluation.
    pub holdout_frac: f64,
    /// When false, a pulled cluster absorbs the user's data until the next
    /// pull moves it elsewhere.
    pub counterfactual: bool,
    /// Keep bandit statistics from one arriving user to the next.
    pub persist_bandit: bool,
    pub kl_top_k: usize,
    pub loss_rounds: usize,
    pub loss_local_steps: usize,
    pub loss_learning_rate: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_clusters: 20,
            users_per_cluster: (5, 10),
            samples_per_user: (50, 100),
            new_user_samples: 60,
            dims: 5,
            omega: 0.0,
            hyper: HyperParams::new(0.5, 0.01).expect("valid defaults"),
            cluster_spread: 1.0,
            input_variance: 1.0,
            horizon: 5000,
            alpha_explore: 1.0,
            bonus: ExplorationBonus::TwoLogT,
            reward_mode: RewardMode::ModelDistance,
            reward_noise_std: None,
            arrival: ArrivalModel::SingleNewUser,
            seed: 0,
            switch_cost: None,
            matched_cluster: None,
            holdout_frac: 0.2,
            counterfactual: true,
            persist_bandit: false,
            kl_top_k: 5,
            loss_rounds: 30,
            loss_local_steps: 5,
            loss_learning_rate: 0.1,
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field,
        reason: reason.into(),
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 {
            return Err(invalid("n_clusters", "must be at least 1"));
        }
        let (lo, hi) = self.users_per_cluster;
        if lo == 0 || lo > hi {
            return Err(invalid("users_per_cluster", format!("bad range [{lo}, {hi}]")));
        }
        if self.dims == 0 {
            return Err(invalid("dims", "must be at least 1"));
        }
        let (lo, hi) = self.samples_per_user;
        if lo > hi || lo < self.dims + 2 {
            return Err(invalid(
                "samples_per_user",
                format!("range [{lo}, {hi}] must be ordered with minimum >= dims + 2"),
            ));
        }
        if self.new_user_samples < self.dims + 2 {
            return Err(invalid("new_user_samples", "must be at least dims + 2"));
        }
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(invalid("omega", "must lie in [0, 1]"));
        }
        if !(self.cluster_spread >= 0.0 && self.cluster_spread.is_finite()) {
            return Err(invalid("cluster_spread", "must be non-negative"));
        }
        if !(self.input_variance > 0.0 && self.input_variance.is_finite()) {
            return Err(invalid("input_variance", "must be positive"));
        }
        if self.horizon < self.n_clusters {
            return Err(invalid("horizon", "must be at least n_clusters"));
        }
        if !(self.alpha_explore >= 0.0 && self.alpha_explore.is_finite()) {
            return Err(invalid("alpha_explore", "must be non-negative"));
        }
        if let Some(s) = self.reward_noise_std {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(invalid("reward_noise_std", "must be non-negative"));
            }
        }
        if let ArrivalModel::Poisson { rate } = self.arrival {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(invalid("arrival", "Poisson rate must be positive"));
            }
        }
        if let Some(m) = self.matched_cluster {
            if m >= self.n_clusters {
                return Err(invalid("matched_cluster", "must index an initial cluster"));
            }
        }
        if !(0.0..1.0).contains(&self.holdout_frac) {
            return Err(invalid("holdout_frac", "must lie in [0, 1)"));
        }
        if self.kl_top_k == 0 {
            return Err(invalid("kl_top_k", "must be at least 1"));
        }
        if !(self.loss_learning_rate > 0.0 && self.loss_learning_rate.is_finite()) {
            return Err(invalid("loss_learning_rate", "must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn rejections_name_the_field() {
        let cases: Vec<(ScenarioConfig, &str)> = vec![
            (
                ScenarioConfig {
                    n_clusters: 0,
                    ..Default::default()
                },
                "n_clusters",
            ),
            (
                ScenarioConfig {
                    horizon: 3,
                    ..Default::default()
                },
                "horizon",
            ),
            (
                ScenarioConfig {
                    omega: 1.5,
                    ..Default::default()
                },
                "omega",
            ),
            (
                ScenarioConfig {
                    arrival: ArrivalModel::Poisson { rate: 0.0 },
                    ..Default::default()
                },
                "arrival",
            ),
            (
                ScenarioConfig {
                    samples_per_user: (3, 100),
                    ..Default::default()
                },
                "samples_per_user",
            ),
        ];
        for (cfg, field) in cases {
            match cfg.validate() {
                Err(Error::InvalidConfig { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{field}: {other:?}"),
            }
        }
    }
}

//! JSON scenario files.

use crate::error::{HarnessError, Result};
use fedband::bandit::ExplorationBonus;
use fedband::sim::{ArrivalModel, RewardMode, ScenarioConfig};
use fedband::{HyperParams, SwitchCostParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BonusName {
    #[default]
    TwoLogT,
    LogT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RewardModeName {
    ImprovementMse,
    #[default]
    ModelDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArrivalSpec {
    #[default]
    SingleNewUser,
    Poisson {
        rate: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchCostSpec {
    pub a: f64,
    pub b: f64,
    pub alpha_mix: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkCandidate {
    pub id: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkCost {
    pub a: usize,
    pub b: usize,
    pub cost: f64,
}

/// Inputs of the greedy switching walkthrough. Defaults reproduce the
/// three-cluster example: the user joins cluster 1, switches to 2, stays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkthroughSpec {
    pub local_loss: f64,
    pub candidates: Vec<WalkCandidate>,
    pub costs: Vec<WalkCost>,
}

impl Default for WalkthroughSpec {
    fn default() -> Self {
        Self {
            local_loss: 0.5,
            candidates: vec![
                WalkCandidate { id: 1, loss: 0.42626 },
                WalkCandidate { id: 2, loss: 0.30186 },
                WalkCandidate { id: 3, loss: 0.26241 },
            ],
            costs: vec![
                WalkCost {
                    a: 1,
                    b: 2,
                    cost: 0.10309,
                },
                WalkCost {
                    a: 1,
                    b: 3,
                    cost: 0.09618,
                },
                WalkCost {
                    a: 2,
                    b: 3,
                    cost: 0.11272,
                },
            ],
        }
    }
}

/// The on-disk configuration. Every key is optional; unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub n_clusters: usize,
    pub users_per_cluster: [usize; 2],
    pub samples_per_user: [usize; 2],
    pub new_user_samples: usize,
    pub dims: usize,
    pub omega: f64,
    pub mu_e: f64,
    pub sigma_sq: f64,
    pub cluster_spread: f64,
    pub input_variance: f64,
    pub horizon: usize,
    pub alpha_explore: f64,
    pub bonus: BonusName,
    pub reward_mode: RewardModeName,
    pub reward_noise_std: Option<f64>,
    pub arrival: ArrivalSpec,
    pub seed: u64,
    pub switch_cost: Option<SwitchCostSpec>,
    pub matched_cluster: Option<usize>,
    pub holdout_frac: f64,
    pub counterfactual: bool,
    pub kl_top_k: usize,
    pub loss_rounds: usize,
    pub loss_local_steps: usize,
    pub loss_learning_rate: f64,
    /// Also run uniform random selection and write `rounds_random.csv`.
    pub random_baseline: bool,
    pub walkthrough: WalkthroughSpec,
}

impl Default for FileConfig {
    fn default() -> Self {
        let s = ScenarioConfig::default();
        Self {
            n_clusters: s.n_clusters,
            users_per_cluster: [s.users_per_cluster.0, s.users_per_cluster.1],
            samples_per_user: [s.samples_per_user.0, s.samples_per_user.1],
            new_user_samples: s.new_user_samples,
            dims: s.dims,
            omega: s.omega,
            mu_e: s.hyper.mu_e(),
            sigma_sq: s.hyper.sigma_sq(),
            cluster_spread: s.cluster_spread,
            input_variance: s.input_variance,
            horizon: s.horizon,
            alpha_explore: s.alpha_explore,
            bonus: BonusName::TwoLogT,
            reward_mode: RewardModeName::ModelDistance,
            reward_noise_std: s.reward_noise_std,
            arrival: ArrivalSpec::SingleNewUser,
            seed: s.seed,
            switch_cost: None,
            matched_cluster: s.matched_cluster,
            holdout_frac: s.holdout_frac,
            counterfactual: s.counterfactual,
            kl_top_k: s.kl_top_k,
            loss_rounds: s.loss_rounds,
            loss_local_steps: s.loss_local_steps,
            loss_learning_rate: s.loss_learning_rate,
            random_baseline: true,
            walkthrough: WalkthroughSpec::default(),
        }
    }
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> HarnessError {
    HarnessError::Validation {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

impl FileConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Parse {
            what: "config".into(),
            reason: e.to_string(),
        })?;
        cfg.scenario()?;
        cfg.validate_walkthrough()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The simulator configuration, validated.
    pub fn scenario(&self) -> Result<ScenarioConfig> {
        let hyper = HyperParams::new(self.mu_e, self.sigma_sq).map_err(|e| match e {
            fedband::Error::OutOfRange { name, value, .. } => invalid(name, format!("{value} must be non-negative")),
            other => other.into(),
        })?;
        let switch_cost = self
            .switch_cost
            .map(|s| SwitchCostParams::new(s.a, s.b, s.alpha_mix))
            .transpose()
            .map_err(|e| invalid("switch_cost", e))?;
        let cfg = ScenarioConfig {
            n_clusters: self.n_clusters,
            users_per_cluster: (self.users_per_cluster[0], self.users_per_cluster[1]),
            samples_per_user: (self.samples_per_user[0], self.samples_per_user[1]),
            new_user_samples: self.new_user_samples,
            dims: self.dims,
            omega: self.omega,
            hyper,
            cluster_spread: self.cluster_spread,
            input_variance: self.input_variance,
            horizon: self.horizon,
            alpha_explore: self.alpha_explore,
            bonus: match self.bonus {
                BonusName::TwoLogT => ExplorationBonus::TwoLogT,
                BonusName::LogT => ExplorationBonus::LogT,
            },
            reward_mode: match self.reward_mode {
                RewardModeName::ImprovementMse => RewardMode::ImprovementMse,
                RewardModeName::ModelDistance => RewardMode::ModelDistance,
            },
            reward_noise_std: self.reward_noise_std,
            arrival: match self.arrival {
                ArrivalSpec::SingleNewUser => ArrivalModel::SingleNewUser,
                ArrivalSpec::Poisson { rate } => ArrivalModel::Poisson { rate },
            },
            seed: self.seed,
            switch_cost,
            matched_cluster: self.matched_cluster,
            holdout_frac: self.holdout_frac,
            counterfactual: self.counterfactual,
            persist_bandit: false,
            kl_top_k: self.kl_top_k,
            loss_rounds: self.loss_rounds,
            loss_local_steps: self.loss_local_steps,
            loss_learning_rate: self.loss_learning_rate,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate_walkthrough(&self) -> Result<()> {
        let w = &self.walkthrough;
        if !w.local_loss.is_finite() {
            return Err(invalid("walkthrough.local_loss", "must be finite"));
        }
        if w.candidates.iter().any(|c| !c.loss.is_finite()) {
            return Err(invalid("walkthrough.candidates", "losses must be finite"));
        }
        if w.costs.iter().any(|c| !(c.cost.is_finite() && c.cost >= 0.0)) {
            return Err(invalid("walkthrough.costs", "costs must be finite and non-negative"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical serialization: compact JSON with object keys
    /// sorted, so the digest ignores key order and formatting of the source.
    pub fn config_hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }
}

pub fn load_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    FileConfig::from_json(&text)
}

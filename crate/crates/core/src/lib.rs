//! Dynamic cluster selection for personalized federated learning.
//!
//! Users hold linear-regression data; clusters of users train a shared model
//! with FedAvg; a newly arriving user picks the cluster to join with a
//! dynamic upper-confidence-bound bandit whose arms can appear and vanish.
//!
//! The numeric modules ([`estimator`], [`cost`], [`bandit`], [`metrics`]) are
//! generic over [`Scalar`]; the aliases below fix them to `f64` (and `f32`
//! where useful). The simulator in [`sim`] works in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bandit;
pub mod cost;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Dataset = estimator::Dataset<f64>;
pub type Dataset32 = estimator::Dataset<f32>;
pub type UserProfile = estimator::UserProfile<f64>;
pub type UserProfile32 = estimator::UserProfile<f32>;
pub type InputSpec = estimator::InputSpec<f64>;
pub type HyperParams = estimator::HyperParams<f64>;
pub type HyperParams32 = estimator::HyperParams<f32>;
pub type FederationWeights = estimator::FederationWeights<f64>;
pub type EnergyParams = cost::EnergyParams<f64>;
pub type SwitchCostParams = cost::SwitchCostParams<f64>;
pub type BanditState = bandit::BanditState<f64>;
pub type BanditState32 = bandit::BanditState<f32>;
pub type RoundRecord = bandit::RoundRecord<f64>;
pub type GaussianSpec = metrics::GaussianSpec<f64>;
pub type Matrix = linalg::Matrix<f64>;

pub use bandit::ArmId;
pub use estimator::Partition;

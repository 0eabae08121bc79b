//! Linear-model generation, least-squares estimation, federation and the
//! closed-form expected-error formulas.

mod data;
mod federation;
mod mse;
mod ols;

pub use data::{sample_dataset, Dataset, InputSpec, UserProfile};
pub use federation::{fedavg_aggregate, federated_estimate, federation_weights, FederationWeights};
pub use mse::{
    coalition_error, expected_federated_mse, expected_local_mse, federated_mse_terms, partition_cost, HyperParams,
    Partition,
};
pub use ols::{empirical_loss, ols_fit, sample_loss};

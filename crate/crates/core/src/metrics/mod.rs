//! KL divergence, trace summaries and coalition-stability diagnostics.

mod gaussian;
mod stability;
mod traces;

pub use gaussian::{kl_gaussian, GaussianSpec};
pub use stability::{
    empirical_poa, enumerate_partitions, is_core_stable, is_individually_stable, PoaReport, ProfitableJoin, Stability,
    StabilityNotion, MAX_POA_PLAYERS, MAX_STABILITY_PLAYERS,
};
pub use traces::{cumulative_regret_series, selection_histogram, top_k_by_kl};

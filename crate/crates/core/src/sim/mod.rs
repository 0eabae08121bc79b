//! Cluster generation, FedAvg training, rewards and the selection loop.

mod arrivals;
mod bootstrap;
mod cluster;
mod config;
mod reward;
mod selection;
mod training;

pub use arrivals::arrival_times;
pub use bootstrap::{bootstrap_cold_start, ColdStart};
pub use cluster::{
    build_clusters, fitted_gaussian, generate_cluster, generate_new_user, matched_cluster_id, run_fl_round,
    ClusterGenerator, ClusterState, Member, NewUser,
};
pub use config::{ArrivalModel, RewardMode, ScenarioConfig};
pub use reward::evaluate_reward;
pub use selection::{
    run_selection, simulate_random, simulate_selection, simulate_users, RandomArms, SelectionOutcome, SelectionPolicy,
};
pub use training::{loss_curve, loss_curves, GradientSchedule, LossPoint};

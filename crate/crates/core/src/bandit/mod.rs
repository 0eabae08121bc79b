//! Cluster selection as a multi-armed bandit over a changing set of arms.

mod policy;
mod regret;
mod ucb;

pub use policy::{
    cost_penalized_reward, greedy_switch_policy, random_select, GreedyDecision, GreedyStep, GreedyTrace, PairwiseCosts,
    RandomPolicy,
};
pub use regret::{regret_step, RoundRecord};
pub use ucb::{ucb_value, ArmId, BanditState, ExplorationBonus};

use super::arrivals::arrival_times;
use super::cluster::{fl_round_in_place, generate_cluster, ClusterState, Member, NewUser};
use super::config::{ArrivalModel, ScenarioConfig};
use super::reward::evaluate_reward;
use crate::bandit::{regret_step, ArmId, RandomPolicy};
use crate::cost::{binarize_model, jaccard_similarity, switching_cost};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, tags, SimRng};
use crate::BanditState;
use crate::RoundRecord;
use rand_distr::{Distribution, Normal};
use std::collections::BTreeMap;

/// An arm-selection rule driven by [`run_selection`].
pub trait SelectionPolicy {
    fn select(&mut self) -> Result<ArmId>;
    fn observe(&mut self, arm: ArmId, reward: f64) -> Result<()>;
    fn add_arm(&mut self, arm: ArmId) -> Result<()>;
}

impl SelectionPolicy for BanditState {
    fn select(&mut self) -> Result<ArmId> {
        self.select_arm()
    }

    fn observe(&mut self, arm: ArmId, reward: f64) -> Result<()> {
        self.update(arm, reward)
    }

    fn add_arm(&mut self, arm: ArmId) -> Result<()> {
        BanditState::add_arm(self, arm)
    }
}

/// Uniformly random selection over the arms registered so far.
#[derive(Debug, Clone)]
pub struct RandomArms {
    arms: Vec<ArmId>,
    policy: RandomPolicy,
}

impl RandomArms {
    pub fn new(arms: impl IntoIterator<Item = ArmId>, seed: u64) -> Self {
        Self {
            arms: arms.into_iter().collect(),
            policy: RandomPolicy::new(seed),
        }
    }
}

impl SelectionPolicy for RandomArms {
    fn select(&mut self) -> Result<ArmId> {
        self.policy.select(&self.arms)
    }

    fn observe(&mut self, _arm: ArmId, _reward: f64) -> Result<()> {
        Ok(())
    }

    fn add_arm(&mut self, arm: ArmId) -> Result<()> {
        if self.arms.contains(&arm) {
            return Err(Error::DuplicateArm(arm));
        }
        self.arms.push(arm);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub rounds: Vec<RoundRecord>,
    /// Most-pulled arm; ties go to the lowest id.
    pub final_arm: ArmId,
    pub pulls: BTreeMap<ArmId, u64>,
    /// Expected reward per arm at the end of the run.
    pub expected_rewards: BTreeMap<ArmId, f64>,
    /// Clusters that arrived during the run, in arrival order, with the
    /// round at which each became selectable.
    pub arrived: Vec<(u64, ClusterState)>,
    pub total_switch_cost: f64,
}

impl SelectionOutcome {
    pub fn cumulative_regret(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.cum_regret)
    }
}

fn oracle(expected: &BTreeMap<ArmId, f64>) -> Result<(ArmId, f64)> {
    let mut best: Option<(ArmId, f64)> = None;
    // BTreeMap iterates in ascending id, so strict comparison keeps the lowest id.
    for (&arm, &r) in expected {
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((arm, r));
        }
    }
    best.ok_or(Error::NoArms)
}

fn noise_std(cfg: &ScenarioConfig, expected: &BTreeMap<ArmId, f64>) -> f64 {
    cfg.reward_noise_std.unwrap_or_else(|| {
        let (lo, hi) = expected
            .values()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if hi > lo {
            0.05 * (hi - lo)
        } else {
            0.0
        }
    })
}

/// Rounds (1-based) at which Poisson-arriving clusters become selectable.
fn arrival_schedule(cfg: &ScenarioConfig) -> Result<Vec<u64>> {
    match cfg.arrival {
        ArrivalModel::SingleNewUser => Ok(Vec::new()),
        ArrivalModel::Poisson { rate } => {
            Ok(
                arrival_times(rate, cfg.horizon as f64, derive_seed(cfg.seed, &[tags::ARRIVALS]))?
                    .into_iter()
                    .map(|t| (t.ceil() as u64).max(1))
                    .collect(),
            )
        }
    }
}

struct Arena {
    clusters: Vec<ClusterState>,
    /// Cluster currently holding the user's data (non-counterfactual mode).
    host: Option<usize>,
}

impl Arena {
    fn position(&self, arm: ArmId) -> Result<usize> {
        self.clusters
            .iter()
            .position(|c| c.id == arm)
            .ok_or(Error::UnknownArm(arm))
    }

    fn expected(&self, user: &NewUser, cfg: &ScenarioConfig) -> Result<BTreeMap<ArmId, f64>> {
        self.clusters
            .iter()
            .map(|c| Ok((c.id, evaluate_reward(c, user, cfg.reward_mode)?)))
            .collect()
    }

    /// Moves the user's data into `arm`'s cluster, retraining the clusters
    /// whose membership changed.
    fn host_user(&mut self, arm: ArmId, user: &NewUser) -> Result<()> {
        let to = self.position(arm)?;
        if self.host == Some(to) {
            return Ok(());
        }
        if let Some(from) = self.host.take() {
            self.clusters[from].members.pop();
            fl_round_in_place(&mut self.clusters[from])?;
        }
        self.clusters[to].members.push(Member {
            profile: user.profile.with_samples(user.train.len())?,
            data: user.train.clone(),
        });
        fl_round_in_place(&mut self.clusters[to])?;
        self.host = Some(to);
        Ok(())
    }

    fn switch_cost(&self, cfg: &ScenarioConfig, from: ArmId, to: ArmId) -> Result<f64> {
        let Some(params) = cfg.switch_cost else {
            return Ok(0.0);
        };
        if from == to {
            return Ok(0.0);
        }
        let a = binarize_model(&self.clusters[self.position(from)?].global_model, 0.0);
        let b = binarize_model(&self.clusters[self.position(to)?].global_model, 0.0);
        let j: f64 = jaccard_similarity(&a, &b)?;
        Ok(params.alpha_mix() * switching_cost(&params, j)?)
    }
}

/// Runs `policy` for `cfg.horizon` rounds over `clusters` (plus any
/// Poisson-arriving clusters) for `user`.
///
/// Each round: select an arm, draw the realized reward as the arm's expected
/// reward plus zero-mean normal noise (minus a switching cost when
/// configured), feed it to the policy, and charge regret against the arm
/// with the highest expected reward.
pub fn run_selection<P: SelectionPolicy>(
    cfg: &ScenarioConfig,
    clusters: &[ClusterState],
    user: &NewUser,
    policy: &mut P,
    noise_stream: u64,
) -> Result<SelectionOutcome> {
    if clusters.is_empty() {
        return Err(Error::NoArms);
    }
    let mut arena = Arena {
        clusters: clusters.to_vec(),
        host: None,
    };
    let mut expected = arena.expected(user, cfg)?;
    let mut rng: SimRng = stream(cfg.seed, &[tags::REWARD_NOISE, noise_stream]);
    let schedule = arrival_schedule(cfg)?;
    let mut next_arrival = 0usize;
    let mut next_id = clusters.iter().map(|c| c.id).max().unwrap_or(0) + 1;
    let mut arrived = Vec::new();

    let mut rounds = Vec::with_capacity(cfg.horizon);
    let mut pulls: BTreeMap<ArmId, u64> = expected.keys().map(|&a| (a, 0)).collect();
    let mut cum = 0.0;
    let mut total_switch_cost = 0.0;
    let mut previous: Option<ArmId> = None;

    for t in 1..=cfg.horizon as u64 {
        while next_arrival < schedule.len() && schedule[next_arrival] <= t {
            let cluster = generate_cluster(cfg, next_id)?;
            expected.insert(next_id, evaluate_reward(&cluster, user, cfg.reward_mode)?);
            pulls.insert(next_id, 0);
            policy.add_arm(next_id)?;
            arena.clusters.push(cluster.clone());
            arrived.push((t, cluster));
            next_id += 1;
            next_arrival += 1;
        }

        let arm = policy.select()?;
        let cost = match previous {
            Some(p) => arena.switch_cost(cfg, p, arm)?,
            None => 0.0,
        };
        if !cfg.counterfactual {
            arena.host_user(arm, user)?;
            expected = arena.expected(user, cfg)?;
        }
        let sd = noise_std(cfg, &expected);
        let mean = *expected.get(&arm).ok_or(Error::UnknownArm(arm))?;
        let noise = if sd > 0.0 {
            Normal::new(0.0, sd).expect("positive sd").sample(&mut rng)
        } else {
            0.0
        };
        let realized = mean + noise - cost;
        policy.observe(arm, realized)?;

        let (oracle_arm, oracle_reward) = oracle(&expected)?;
        let (inst, next_cum) = regret_step(oracle_reward, mean, cum);
        cum = next_cum;
        total_switch_cost += cost;
        *pulls.entry(arm).or_insert(0) += 1;
        rounds.push(RoundRecord {
            t,
            chosen_arm: arm,
            reward: mean,
            realized_reward: realized,
            oracle_arm,
            oracle_reward,
            inst_regret: inst,
            cum_regret: cum,
        });
        previous = Some(arm);
    }

    let final_arm = pulls
        .iter()
        .fold(None::<(ArmId, u64)>, |best, (&a, &n)| match best {
            Some((_, bn)) if bn >= n => best,
            _ => Some((a, n)),
        })
        .map(|(a, _)| a)
        .ok_or(Error::NoArms)?;

    Ok(SelectionOutcome {
        rounds,
        final_arm,
        pulls,
        expected_rewards: expected,
        arrived,
        total_switch_cost,
    })
}

/// dUCB over `clusters` for one arriving user.
pub fn simulate_selection(cfg: &ScenarioConfig, clusters: &[ClusterState], user: &NewUser) -> Result<SelectionOutcome> {
    let mut bandit = BanditState::new(clusters.iter().map(|c| c.id), cfg.alpha_explore, cfg.bonus)?;
    run_selection(cfg, clusters, user, &mut bandit, 0)
}

/// The random-selection baseline on the same instance and noise stream.
pub fn simulate_random(cfg: &ScenarioConfig, clusters: &[ClusterState], user: &NewUser) -> Result<SelectionOutcome> {
    let mut policy = RandomArms::new(
        clusters.iter().map(|c| c.id),
        derive_seed(cfg.seed, &[tags::RANDOM_POLICY]),
    );
    run_selection(cfg, clusters, user, &mut policy, 0)
}

/// dUCB for a sequence of arriving users. Bandit statistics restart for each
/// user unless `cfg.persist_bandit` is set.
pub fn simulate_users(
    cfg: &ScenarioConfig,
    clusters: &[ClusterState],
    users: &[NewUser],
) -> Result<Vec<SelectionOutcome>> {
    let fresh = || BanditState::new(clusters.iter().map(|c| c.id), cfg.alpha_explore, cfg.bonus);
    let mut bandit = fresh()?;
    let mut out = Vec::with_capacity(users.len());
    for (i, user) in users.iter().enumerate() {
        if !cfg.persist_bandit {
            bandit = fresh()?;
        }
        out.push(run_selection(cfg, clusters, user, &mut bandit, i as u64)?);
    }
    Ok(out)
}

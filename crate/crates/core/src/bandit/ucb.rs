use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type ArmId = usize;

/// Width of the confidence bonus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExplorationBonus {
    /// `α·√(2 ln t / N_k)`.
    #[default]
    TwoLogT,
    /// `α·√(ln t / N_k)`.
    LogT,
}

/// Upper confidence bound of one arm. Unvisited arms (`pulls == 0`) score
/// `+∞` so every arm is tried once before any is revisited.
pub fn ucb_value<T: Scalar>(mean: T, alpha: T, t: T, pulls: u64, bonus: ExplorationBonus) -> T {
    if pulls == 0 {
        return T::infinity();
    }
    if alpha == T::zero() {
        return mean;
    }
    let log_t = if t > T::one() { t.ln() } else { T::zero() };
    let scale = match bonus {
        ExplorationBonus::TwoLogT => T::lit(2.0),
        ExplorationBonus::LogT => T::one(),
    };
    let n = T::from_u64(pulls).expect("pull count fits in scalar");
    mean + alpha * (scale * log_t / n).sqrt()
}

/// Statistics for a dynamic set of arms.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditState<T> {
    arm_ids: Vec<ArmId>,
    pull_counts: Vec<u64>,
    mean_rewards: Vec<T>,
    t: u64,
    alpha_explore: T,
    bonus: ExplorationBonus,
}

impl<T: Scalar> BanditState<T> {
    pub fn new(arm_ids: impl IntoIterator<Item = ArmId>, alpha_explore: T, bonus: ExplorationBonus) -> Result<Self> {
        if !(alpha_explore >= T::zero()) || !alpha_explore.is_finite() {
            return Err(Error::OutOfRange {
                name: "alpha_explore",
                value: alpha_explore.as_f64(),
                range: "[0, inf)",
            });
        }
        let mut state = Self {
            arm_ids: Vec::new(),
            pull_counts: Vec::new(),
            mean_rewards: Vec::new(),
            t: 0,
            alpha_explore,
            bonus,
        };
        for id in arm_ids {
            state.add_arm(id)?;
        }
        Ok(state)
    }

    pub fn arm_ids(&self) -> &[ArmId] {
        &self.arm_ids
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn alpha_explore(&self) -> T {
        self.alpha_explore
    }

    pub fn bonus(&self) -> ExplorationBonus {
        self.bonus
    }

    pub fn len(&self) -> usize {
        self.arm_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arm_ids.is_empty()
    }

    fn position(&self, k: ArmId) -> Result<usize> {
        self.arm_ids.iter().position(|&a| a == k).ok_or(Error::UnknownArm(k))
    }

    pub fn pulls(&self, k: ArmId) -> Result<u64> {
        Ok(self.pull_counts[self.position(k)?])
    }

    pub fn mean_reward(&self, k: ArmId) -> Result<T> {
        Ok(self.mean_rewards[self.position(k)?])
    }

    pub fn total_pulls(&self) -> u64 {
        self.pull_counts.iter().sum()
    }

    pub fn ucb_index(&self, k: ArmId) -> Result<T> {
        let i = self.position(k)?;
        Ok(self.index_at(i))
    }

    fn index_at(&self, i: usize) -> T {
        let t = T::from_u64(self.t).expect("round counter fits in scalar");
        ucb_value(
            self.mean_rewards[i],
            self.alpha_explore,
            t,
            self.pull_counts[i],
            self.bonus,
        )
    }

    /// Arm with the largest index; ties go to the lowest arm id.
    pub fn select_arm(&self) -> Result<ArmId> {
        let mut best: Option<(T, ArmId)> = None;
        for (i, &id) in self.arm_ids.iter().enumerate() {
            let idx = self.index_at(i);
            best = match best {
                None => Some((idx, id)),
                Some((b, bid)) if idx > b || (idx == b && id < bid) => Some((idx, id)),
                keep => keep,
            };
        }
        best.map(|(_, id)| id).ok_or(Error::NoArms)
    }

    /// Records one pull of `k`: bumps `t` and `N_k` and folds `reward` into
    /// the running mean.
    pub fn update(&mut self, k: ArmId, reward: T) -> Result<()> {
        let i = self.position(k)?;
        self.t += 1;
        self.pull_counts[i] += 1;
        let n = T::from_u64(self.pull_counts[i]).expect("pull count fits in scalar");
        let m = self.mean_rewards[i];
        self.mean_rewards[i] = m + (reward - m) / n;
        Ok(())
    }

    pub fn add_arm(&mut self, id: ArmId) -> Result<()> {
        if self.arm_ids.contains(&id) {
            return Err(Error::DuplicateArm(id));
        }
        self.arm_ids.push(id);
        self.pull_counts.push(0);
        self.mean_rewards.push(T::zero());
        Ok(())
    }

    /// Drops `id` and its statistics. The round counter is unchanged.
    pub fn remove_arm(&mut self, id: ArmId) -> Result<()> {
        let i = self.position(id)?;
        self.arm_ids.remove(i);
        self.pull_counts.remove(i);
        self.mean_rewards.remove(i);
        Ok(())
    }

    /// Shifts every empirical mean by `delta`.
    pub fn shift_means(&mut self, delta: T) {
        for m in &mut self.mean_rewards {
            *m = *m + delta;
        }
    }
}

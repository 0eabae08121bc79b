use super::ucb::ArmId;
use crate::scalar::Scalar;

/// One selection round.
///
/// `reward` is the expected reward of the chosen arm, so that
/// `inst_regret = oracle_reward − reward`; the noisy reward actually fed to
/// the policy is kept in `realized_reward`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord<T> {
    pub t: u64,
    pub chosen_arm: ArmId,
    pub reward: T,
    pub realized_reward: T,
    pub oracle_arm: ArmId,
    pub oracle_reward: T,
    pub inst_regret: T,
    pub cum_regret: T,
}

/// Returns `(oracle − chosen, prev_cum + oracle − chosen)`.
pub fn regret_step<T: Scalar>(oracle_reward: T, chosen_reward: T, prev_cum: T) -> (T, T) {
    let inst = oracle_reward - chosen_reward;
    (inst, prev_cum + inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn step_examples() {
        assert_eq!(regret_step(0.7, 0.7, 3.0), (0.0, 3.0));
        let (inst, cum) = regret_step(1.0, 0.6, 2.0);
        assert_relative_eq!(inst, 0.4);
        assert_relative_eq!(cum, 2.4);
    }
}

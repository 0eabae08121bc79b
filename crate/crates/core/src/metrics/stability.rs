//! Hedonic-game diagnostics by exhaustive enumeration.
//!
//! A player prefers coalition `A` to `B` when its cost in `A` is strictly
//! lower; it weakly prefers `A` when the cost is lower or equal.

use crate::error::{Error, Result};
use crate::estimator::{coalition_error, partition_cost, HyperParams, Partition};
use crate::scalar::Scalar;

/// Player cap for the stability checkers.
pub const MAX_STABILITY_PLAYERS: usize = 12;
/// Player cap for price-of-anarchy enumeration.
pub const MAX_POA_PLAYERS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stability<W> {
    Stable,
    Unstable(W),
}

impl<W> Stability<W> {
    pub fn is_stable(&self) -> bool {
        matches!(self, Self::Stable)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Self::Stable => None,
            Self::Unstable(w) => Some(w),
        }
    }
}

/// A player that would profitably join an existing coalition with every
/// incumbent weakly approving.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfitableJoin {
    pub player: usize,
    pub coalition: Vec<usize>,
}

fn check_players(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        Err(Error::TooManyPlayers { players: n, limit })
    } else {
        Ok(())
    }
}

fn members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Core stability: no nonempty coalition whose every member strictly prefers
/// it to their current coalition. `cost(player, coalition)` receives
/// ascending member lists. The witness is the first blocking coalition in
/// bitmask order.
pub fn is_core_stable<T, F>(p: &Partition, cost: F) -> Result<Stability<Vec<usize>>>
where
    T: Scalar,
    F: Fn(usize, &[usize]) -> T,
{
    let n = p.n_players();
    check_players(n, MAX_STABILITY_PLAYERS)?;
    let current = current_costs(p, &cost);
    for mask in 1u32..(1u32 << n) {
        let c = members(mask, n);
        if c.iter().all(|&i| cost(i, &c) < current[i]) {
            return Ok(Stability::Unstable(c));
        }
    }
    Ok(Stability::Stable)
}

/// Individual stability: no player `i` and coalition `C ∈ Π` (not containing
/// `i`) such that `i` strictly prefers `C ∪ {i}` and every member of `C`
/// weakly prefers `C ∪ {i}` to `C`.
pub fn is_individually_stable<T, F>(p: &Partition, cost: F) -> Result<Stability<ProfitableJoin>>
where
    T: Scalar,
    F: Fn(usize, &[usize]) -> T,
{
    let n = p.n_players();
    check_players(n, MAX_STABILITY_PLAYERS)?;
    let current = current_costs(p, &cost);
    for i in 0..n {
        for c in p.coalitions() {
            if c.contains(&i) {
                continue;
            }
            let mut joined = c.clone();
            let at = joined.partition_point(|&x| x < i);
            joined.insert(at, i);
            if cost(i, &joined) < current[i] && c.iter().all(|&k| cost(k, &joined) <= cost(k, c)) {
                return Ok(Stability::Unstable(ProfitableJoin {
                    player: i,
                    coalition: c.clone(),
                }));
            }
        }
    }
    Ok(Stability::Stable)
}

fn current_costs<T, F>(p: &Partition, cost: &F) -> Vec<T>
where
    T: Scalar,
    F: Fn(usize, &[usize]) -> T,
{
    let mut current = vec![T::zero(); p.n_players()];
    for c in p.coalitions() {
        for &i in c {
            current[i] = cost(i, c);
        }
    }
    current
}

/// Every set partition of `0..n`, via restricted growth strings.
pub fn enumerate_partitions(n: usize) -> Vec<Partition> {
    if n == 0 {
        return vec![Partition::singletons(0)];
    }
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    loop {
        let blocks = labels.iter().max().map_or(0, |m| m + 1);
        let mut coalitions = vec![Vec::new(); blocks];
        for (i, &b) in labels.iter().enumerate() {
            coalitions[b].push(i);
        }
        out.push(Partition::new(coalitions, n).expect("restricted growth string is a partition"));
        // next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            let prefix_max = labels[..i].iter().copied().max().unwrap_or(0);
            if labels[i] <= prefix_max {
                labels[i] += 1;
                for l in &mut labels[i + 1..] {
                    *l = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityNotion {
    Core,
    Individual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoaReport<T> {
    pub ratio: T,
    pub optimal: Partition,
    pub optimal_cost: T,
    pub worst_stable: Partition,
    pub worst_stable_cost: T,
    /// Which stable set `worst_stable` was drawn from; individual stability
    /// is the fallback when the core is empty.
    pub notion: StabilityNotion,
    pub partitions_enumerated: usize,
}

/// Ratio of the worst stable partition's cost to the optimal partition's
/// cost, over every partition of players with the given sample counts.
/// Players rank coalitions by [`coalition_error`].
pub fn empirical_poa<T: Scalar>(sample_counts: &[usize], hp: &HyperParams<T>) -> Result<PoaReport<T>> {
    let n = sample_counts.len();
    check_players(n, MAX_POA_PLAYERS)?;
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    // Per-(coalition mask, player) error table.
    let mut table = vec![T::zero(); (1usize << n) * n];
    for mask in 1u32..(1u32 << n) {
        let c = members(mask, n);
        for &i in &c {
            table[mask as usize * n + i] = coalition_error(hp, sample_counts, &c, i)?;
        }
    }
    let cost = |i: usize, c: &[usize]| {
        let mask: usize = c.iter().map(|&k| 1usize << k).sum();
        table[mask * n + i]
    };

    let mut scored = enumerate_partitions(n)
        .into_iter()
        .map(|p| Ok((partition_cost(&p, hp, sample_counts)?, p)))
        .collect::<Result<Vec<_>>>()?;
    let total = scored.len();
    // Descending cost; ties keep enumeration order.
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let (optimal_cost, optimal) = scored.last().cloned().expect("at least one partition");

    let mut worst = None;
    for (c, p) in &scored {
        if is_core_stable(p, cost)?.is_stable() {
            worst = Some((*c, p.clone(), StabilityNotion::Core));
            break;
        }
    }
    if worst.is_none() {
        for (c, p) in &scored {
            if is_individually_stable(p, cost)?.is_stable() {
                worst = Some((*c, p.clone(), StabilityNotion::Individual));
                break;
            }
        }
    }
    let (worst_cost, worst_p, notion) = worst.ok_or(Error::NoStablePartition)?;
    let ratio = if optimal_cost == T::zero() {
        if worst_cost == T::zero() {
            T::one()
        } else {
            T::infinity()
        }
    } else {
        worst_cost / optimal_cost
    };
    Ok(PoaReport {
        ratio,
        optimal,
        optimal_cost,
        worst_stable: worst_p,
        worst_stable_cost: worst_cost,
        notion,
        partitions_enumerated: total,
    })
}

use fedband::bandit::{random_select, ExplorationBonus};
use fedband::cost::jaccard_similarity;
use fedband::estimator::partition_cost;
use fedband::metrics::{empirical_poa, enumerate_partitions, is_core_stable, is_individually_stable};
use fedband::rng::{derive_seed, rng_from_seed};
use fedband::{BanditState, HyperParams, Partition};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// A random partition of `0..n` built by dropping players into bins.
fn random_partition<R: Rng>(n: usize, rng: &mut R) -> Partition {
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for l in 0..n {
        let g: Vec<usize> = (0..n).filter(|&i| labels[i] == l).collect();
        if !g.is_empty() {
            groups.push(g);
        }
    }
    Partition::new(groups, n).unwrap()
}

/// Every nonempty subset of `items`, by recursion rather than bitmasks.
fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    match items.split_first() {
        None => vec![vec![]],
        Some((&head, rest)) => {
            let tail = subsets(rest);
            let mut out = tail.clone();
            for mut s in tail {
                s.insert(0, head);
                out.push(s);
            }
            out
        }
    }
}

fn own(p: &Partition, i: usize) -> &[usize] {
    p.coalition_of(i).unwrap()
}

fn brute_core<F: Fn(usize, &[usize]) -> f64>(p: &Partition, cost: &F) -> bool {
    let players: Vec<usize> = (0..p.n_players()).collect();
    !subsets(&players)
        .into_iter()
        .filter(|s| !s.is_empty())
        .any(|s| s.iter().all(|&i| cost(i, &s) < cost(i, own(p, i))))
}

fn brute_individual<F: Fn(usize, &[usize]) -> f64>(p: &Partition, cost: &F) -> bool {
    for i in 0..p.n_players() {
        for c in p.coalitions() {
            if c.contains(&i) {
                continue;
            }
            let mut joined = c.clone();
            joined.push(i);
            joined.sort();
            let i_gains = cost(i, &joined) < cost(i, own(p, i));
            let all_accept = c.iter().all(|&k| cost(k, &joined) <= cost(k, c));
            if i_gains && all_accept {
                return false;
            }
        }
    }
    true
}

#[test]
fn stability_checkers_agree_with_brute_force() {
    let mut rng = rng_from_seed(31);
    let (mut core_stable, mut indiv_stable) = (0, 0);
    for instance in 0..100u64 {
        let n = rng.random_range(1..=5);
        let p = random_partition(n, &mut rng);
        // coarse integer costs so that ties occur
        let salt = derive_seed(instance, &[]);
        let cost = move |i: usize, c: &[usize]| -> f64 {
            let mask: u64 = c.iter().map(|&k| 1u64 << k).sum();
            (derive_seed(salt, &[i as u64, mask]) % 4) as f64
        };
        let core = is_core_stable(&p, cost).unwrap().is_stable();
        let indiv = is_individually_stable(&p, cost).unwrap().is_stable();
        assert_eq!(core, brute_core(&p, &cost), "core, instance {instance}: {p:?}");
        assert_eq!(
            indiv,
            brute_individual(&p, &cost),
            "individual, instance {instance}: {p:?}"
        );
        core_stable += core as usize;
        indiv_stable += indiv as usize;
    }
    println!("stable: core {core_stable}/100, individual {indiv_stable}/100");
    assert!(core_stable > 0 && core_stable < 100);
}

#[test]
fn poa_at_least_one_on_small_games() {
    let mut rng = rng_from_seed(5);
    let mut worst: f64 = 1.0;
    for n in 1..=5 {
        for _ in 0..8 {
            let counts: Vec<usize> = (0..n).map(|_| rng.random_range(5..200)).collect();
            let hp = HyperParams::new(rng.random_range(0.05..2.0), rng.random_range(0.0..0.05)).unwrap();
            let report = empirical_poa(&counts, &hp).unwrap();
            let brute_opt = enumerate_partitions(n)
                .iter()
                .map(|p| partition_cost(p, &hp, &counts).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!((report.optimal_cost - brute_opt).abs() <= 1e-12 * brute_opt.max(1.0));
            assert!(report.ratio >= 1.0, "{report:?}");
            worst = worst.max(report.ratio);
        }
    }
    println!("largest observed PoA over 40 games: {worst:.4} (bound: < 9)");
}

#[test]
fn jaccard_example_and_axioms() {
    let a = [false, true, true, true, false];
    let b = [false, false, true, true, true];
    assert_eq!(jaccard_similarity::<f64>(&a, &b).unwrap(), 0.5);
    assert_eq!(jaccard_similarity::<f64>(&a, &a).unwrap(), 1.0);
    assert_eq!(jaccard_similarity::<f64>(&[false; 3], &[false; 3]).unwrap(), 1.0);
    assert_eq!(jaccard_similarity::<f64>(&[true, false], &[false, true]).unwrap(), 0.0);
}

fn run_gaussian_bandit(means: &[f64], sd: f64, horizon: usize, seed: u64) -> (Vec<usize>, Vec<f64>) {
    let mut state = BanditState::new(0..means.len(), 1.0, ExplorationBonus::TwoLogT).unwrap();
    let mut rng = rng_from_seed(seed);
    let best = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut picks, mut regret) = (Vec::new(), Vec::new());
    for _ in 0..horizon {
        let k = state.select_arm().unwrap();
        let r = Normal::new(means[k], sd).unwrap().sample(&mut rng);
        state.update(k, r).unwrap();
        picks.push(k);
        regret.push(best - means[k]);
    }
    (picks, regret)
}

#[test]
fn two_arm_bernoulli_prefers_better_arm() {
    let p = [0.9, 0.1];
    let mut state = BanditState::new([0, 1], 1.0, ExplorationBonus::TwoLogT).unwrap();
    let mut rng = rng_from_seed(1);
    let mut good = 0;
    for _ in 0..2000 {
        let k = state.select_arm().unwrap();
        let r = if rng.random_bool(p[k]) { 1.0 } else { 0.0 };
        state.update(k, r).unwrap();
        good += (k == 0) as usize;
    }
    assert!(good >= 1600, "{good}");
}

#[test]
fn regret_sublinear_on_twenty_arms() {
    let means: Vec<f64> = (0..20).map(|k| -0.1 * k as f64).collect();
    for seed in 0..5 {
        let (_, regret) = run_gaussian_bandit(&means, 0.3, 20_000, seed);
        let tenth = regret.len() / 10;
        let head: f64 = regret[..tenth].iter().sum::<f64>() / tenth as f64;
        let tail: f64 = regret[regret.len() - tenth..].iter().sum::<f64>() / tenth as f64;
        assert!(tail < head, "seed {seed}: head {head} tail {tail}");
        let mut rr = rng_from_seed(seed);
        let random: f64 = (0..20_000)
            .map(|_| -means[random_select(&(0..20).collect::<Vec<_>>(), &mut rr).unwrap()])
            .sum();
        assert!(regret.iter().sum::<f64>() < 0.25 * random);
    }
}

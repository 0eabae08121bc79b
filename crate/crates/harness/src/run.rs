//! Scenario drivers behind the CLI subcommands.

use crate::config::FileConfig;
use crate::csvio::{write_csv, CsvRecord, KlRow, LossRow, RoundRow, SelectionRow, WalkthroughRow};
use crate::error::{HarnessError, Result};
use crate::manifest::{timestamp, RunManifest, ARTIFACT_VERSION};
use chrono::Utc;
use fedband::bandit::{greedy_switch_policy, GreedyTrace, PairwiseCosts};
use fedband::estimator::partition_cost;
use fedband::metrics::{
    empirical_poa, enumerate_partitions, is_core_stable, is_individually_stable, kl_gaussian, top_k_by_kl,
    MAX_POA_PLAYERS,
};
use fedband::rng::{derive_seed, rng_from_seed};
use fedband::sim::{
    build_clusters, generate_new_user, loss_curves, matched_cluster_id, simulate_random, simulate_selection,
    ClusterState, GradientSchedule, SelectionOutcome,
};
use fedband::{GaussianSpec, HyperParams, Partition};
use log::info;
use rand::Rng;
use std::path::Path;

fn prepare_dir(out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))
}

struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a Path) -> Result<Self> {
        prepare_dir(dir)?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn csv<R: CsvRecord>(&mut self, name: &str, rows: &[R]) -> Result<()> {
        write_csv(rows, &self.dir.join(name))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| HarnessError::io(path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(self, cfg: &FileConfig, started: chrono::DateTime<Utc>) -> Result<RunManifest> {
        let manifest = RunManifest {
            config_hash: cfg.config_hash(),
            seed: cfg.seed,
            artifact_version: ARTIFACT_VERSION.to_string(),
            started: timestamp(started),
            finished: timestamp(Utc::now()),
            output_files: self.files,
        };
        manifest.write(self.dir)?;
        Ok(manifest)
    }
}

/// Everything a `simulate` run produces, before it is written out.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub matched_cluster: usize,
    pub ucb: SelectionOutcome,
    pub random: Option<SelectionOutcome>,
    pub selection: Vec<SelectionRow>,
    pub kl_table: Vec<KlRow>,
    pub loss: Vec<LossRow>,
}

impl ScenarioResult {
    /// Arm with the smallest oracle KL divergence from the new user.
    pub fn min_kl_arm(&self) -> Option<usize> {
        self.kl_table.first().map(|r| r.arm)
    }
}

fn oracle_gaussian(c: &ClusterState) -> Result<GaussianSpec> {
    c.oracle_gaussian()
        .ok_or(HarnessError::Simulation(fedband::Error::InvalidConfig {
            field: "clusters",
            reason: format!("cluster {} has no generator", c.id),
        }))?
        .map_err(Into::into)
}

/// build clusters → select → metrics, in memory.
pub fn execute_scenario(cfg: &FileConfig) -> Result<ScenarioResult> {
    let scenario = cfg.scenario()?;
    let clusters = build_clusters(&scenario)?;
    let matched = matched_cluster_id(&scenario);
    let user = generate_new_user(&scenario, &clusters[matched], 0)?;
    info!("{} clusters, new user matches cluster {matched}", clusters.len());

    let ucb = simulate_selection(&scenario, &clusters, &user)?;
    info!(
        "dUCB: final arm {}, cumulative regret {:.4}",
        ucb.final_arm,
        ucb.cumulative_regret()
    );
    let random = if cfg.random_baseline {
        let r = simulate_random(&scenario, &clusters, &user)?;
        info!("random: cumulative regret {:.4}", r.cumulative_regret());
        Some(r)
    } else {
        None
    };

    let mut all: Vec<&ClusterState> = clusters.iter().collect();
    all.extend(ucb.arrived.iter().map(|(_, c)| c));
    let user_g = user.oracle_gaussian()?;
    let gaussians: Vec<(usize, GaussianSpec)> = all
        .iter()
        .map(|c| Ok((c.id, oracle_gaussian(c)?)))
        .collect::<Result<_>>()?;
    let selection = gaussians
        .iter()
        .map(|(id, g)| {
            Ok(SelectionRow {
                arm: *id,
                pulls: ucb.pulls.get(id).copied().unwrap_or(0),
                kl_oracle: kl_gaussian(&user_g, g)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let kl_table = top_k_by_kl(&gaussians, &user_g, cfg.kl_top_k)?
        .into_iter()
        .enumerate()
        .map(|(i, (arm, kl))| KlRow { rank: i + 1, arm, kl })
        .collect();

    let schedule = GradientSchedule {
        rounds: cfg.loss_rounds,
        local_steps: cfg.loss_local_steps,
        learning_rate: cfg.loss_learning_rate,
    };
    let loss = loss_curves(&clusters, &user, cfg.omega, schedule)?
        .into_iter()
        .map(|p| LossRow {
            round: p.round,
            arm_joined: p.arm_joined,
            fl_loss: p.fl_loss,
        })
        .collect();

    Ok(ScenarioResult {
        matched_cluster: matched,
        ucb,
        random,
        selection,
        kl_table,
        loss,
    })
}

/// Runs one scenario and writes rounds.csv, selection.csv, kl_table.csv,
/// loss.csv (plus rounds_random.csv with the baseline), the resolved
/// config.json and manifest.json into `out_dir`.
pub fn run_scenario(cfg: &FileConfig, out_dir: &Path) -> Result<RunManifest> {
    let started = Utc::now();
    let result = execute_scenario(cfg)?;
    let mut out = Outputs::new(out_dir)?;
    out.text("config.json", &(cfg.to_json() + "\n"))?;
    let rounds: Vec<RoundRow> = result.ucb.rounds.iter().map(RoundRow::from).collect();
    out.csv("rounds.csv", &rounds)?;
    if let Some(r) = &result.random {
        let rows: Vec<RoundRow> = r.rounds.iter().map(RoundRow::from).collect();
        out.csv("rounds_random.csv", &rows)?;
    }
    out.csv("selection.csv", &result.selection)?;
    out.csv("kl_table.csv", &result.kl_table)?;
    out.csv("loss.csv", &result.loss)?;
    out.finish(cfg, started)
}

pub fn walkthrough_trace(cfg: &FileConfig) -> Result<GreedyTrace<f64>> {
    let w = &cfg.walkthrough;
    let mut costs = PairwiseCosts::new();
    for c in &w.costs {
        costs.insert(c.a, c.b, c.cost);
    }
    let candidates: Vec<(usize, f64)> = w.candidates.iter().map(|c| (c.id, c.loss)).collect();
    Ok(greedy_switch_policy(w.local_loss, &candidates, &costs)?)
}

pub fn walkthrough_rows(trace: &GreedyTrace<f64>) -> Vec<WalkthroughRow> {
    trace
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| WalkthroughRow {
            step: i + 1,
            candidate: s.candidate,
            loss: s.candidate_loss,
            switch_cost: s.switch_cost,
            decision: s.decision.as_str().to_string(),
        })
        .collect()
}

/// Writes walkthrough.csv and manifest.json.
pub fn run_walkthrough(cfg: &FileConfig, out_dir: &Path) -> Result<RunManifest> {
    let started = Utc::now();
    let trace = walkthrough_trace(cfg)?;
    match trace.final_cluster {
        Some(k) => info!("walkthrough ends in cluster {k} with loss {}", trace.final_loss),
        None => info!("walkthrough: user stays local"),
    }
    let mut out = Outputs::new(out_dir)?;
    out.csv("walkthrough.csv", &walkthrough_rows(&trace))?;
    out.finish(cfg, started)
}

/// partitions.csv
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionRow {
    pub partition: String,
    pub cost: f64,
    pub core_stable: bool,
    pub individually_stable: bool,
}

impl CsvRecord for PartitionRow {
    const HEADER: &'static [&'static str] = &["partition", "cost", "core_stable", "individually_stable"];

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.partition.clone(),
            crate::csvio::format_float(self.cost),
            self.core_stable.to_string(),
            self.individually_stable.to_string(),
        ]
    }

    fn from_fields(f: &[String], row: usize) -> Result<Self> {
        let flag = |s: &str, column: &str| {
            s.parse::<bool>().map_err(|_| HarnessError::Parse {
                what: format!("row {row}"),
                reason: format!("{column} must be true or false"),
            })
        };
        if f.len() != Self::HEADER.len() {
            return Err(HarnessError::Parse {
                what: format!("row {row}"),
                reason: "wrong field count".into(),
            });
        }
        Ok(Self {
            partition: f[0].clone(),
            cost: crate::csvio::parse_float(&f[1], "cost", row)?,
            core_stable: flag(&f[2], "core_stable")?,
            individually_stable: flag(&f[3], "individually_stable")?,
        })
    }
}

/// poa.csv
#[derive(Debug, Clone, PartialEq)]
pub struct PoaRow {
    pub players: usize,
    pub sample_counts: String,
    pub optimal_cost: f64,
    pub worst_stable_cost: f64,
    pub ratio: f64,
    pub notion: String,
    pub partitions: usize,
}

impl CsvRecord for PoaRow {
    const HEADER: &'static [&'static str] = &[
        "players",
        "sample_counts",
        "optimal_cost",
        "worst_stable_cost",
        "ratio",
        "notion",
        "partitions",
    ];

    fn to_fields(&self) -> Vec<String> {
        use crate::csvio::format_float;
        vec![
            self.players.to_string(),
            self.sample_counts.clone(),
            format_float(self.optimal_cost),
            format_float(self.worst_stable_cost),
            format_float(self.ratio),
            self.notion.clone(),
            self.partitions.to_string(),
        ]
    }

    fn from_fields(f: &[String], row: usize) -> Result<Self> {
        use crate::csvio::parse_float;
        if f.len() != Self::HEADER.len() {
            return Err(HarnessError::Parse {
                what: format!("row {row}"),
                reason: "wrong field count".into(),
            });
        }
        Ok(Self {
            players: f[0].parse().map_err(|_| HarnessError::NonNumericColumn {
                column: "players".into(),
                row,
            })?,
            sample_counts: f[1].clone(),
            optimal_cost: parse_float(&f[2], "optimal_cost", row)?,
            worst_stable_cost: parse_float(&f[3], "worst_stable_cost", row)?,
            ratio: parse_float(&f[4], "ratio", row)?,
            notion: f[5].clone(),
            partitions: f[6].parse().map_err(|_| HarnessError::NonNumericColumn {
                column: "partitions".into(),
                row,
            })?,
        })
    }
}

fn partition_label(p: &Partition) -> String {
    p.coalitions()
        .iter()
        .map(|c| c.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("|")
}

/// Sample counts for a stability sweep, drawn from the config's
/// `samples_per_user` range.
pub fn stability_counts(cfg: &FileConfig, players: usize) -> Vec<usize> {
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[0x57AB]));
    (0..players)
        .map(|_| rng.random_range(cfg.samples_per_user[0]..=cfg.samples_per_user[1]))
        .collect()
}

/// Enumerates every partition of `players` users, classifies each as core
/// and individually stable, and reports the empirical price of anarchy.
/// Writes partitions.csv, poa.csv and manifest.json.
pub fn run_stability(cfg: &FileConfig, players: usize, out_dir: &Path) -> Result<RunManifest> {
    let started = Utc::now();
    if players == 0 || players > MAX_POA_PLAYERS {
        return Err(HarnessError::Validation {
            field: "players".into(),
            reason: format!("must lie in [1, {MAX_POA_PLAYERS}]"),
        });
    }
    let scenario = cfg.scenario()?;
    let hp: HyperParams = scenario.hyper;
    let counts = stability_counts(cfg, players);

    let n = players;
    let mut table = vec![0.0; (1usize << n) * n];
    for mask in 1usize..(1 << n) {
        let c: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        for &i in &c {
            table[mask * n + i] = fedband::estimator::coalition_error(&hp, &counts, &c, i)?;
        }
    }
    let cost = |i: usize, c: &[usize]| {
        let mask: usize = c.iter().map(|&k| 1usize << k).sum();
        table[mask * n + i]
    };
    let rows = enumerate_partitions(n)
        .iter()
        .map(|p| {
            Ok(PartitionRow {
                partition: partition_label(p),
                cost: partition_cost(p, &hp, &counts)?,
                core_stable: is_core_stable(p, cost)?.is_stable(),
                individually_stable: is_individually_stable(p, cost)?.is_stable(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = empirical_poa(&counts, &hp)?;
    info!("{players} players: PoA {:.6} ({:?})", report.ratio, report.notion);
    let poa = PoaRow {
        players,
        sample_counts: counts.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
        optimal_cost: report.optimal_cost,
        worst_stable_cost: report.worst_stable_cost,
        ratio: report.ratio,
        notion: format!("{:?}", report.notion).to_lowercase(),
        partitions: report.partitions_enumerated,
    };

    let mut out = Outputs::new(out_dir)?;
    out.csv("partitions.csv", &rows)?;
    out.csv("poa.csv", &[poa])?;
    out.finish(cfg, started)
}

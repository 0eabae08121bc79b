//! Non-IID partitioning of tabular regression data.

use crate::csvio::{format_float, parse_float};
use crate::error::{HarnessError, Result};
use fedband::estimator::ols_fit;
use fedband::rng::{derive_seed, rng_from_seed};
use fedband::Dataset;
use log::warn;
use rand::Rng;
use std::path::Path;

/// One user's shard, with its OLS summary when the shard supports a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedUser {
    pub index: usize,
    /// Source row numbers (0-based, excluding the header).
    pub rows: Vec<usize>,
    pub data: Dataset,
    pub theta_hat: Option<Vec<f64>>,
    /// Unbiased residual variance of the fit.
    pub noise_var: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub features: Vec<Vec<f64>>,
    pub target: Vec<f64>,
}

pub fn read_table(path: &Path, target: &str) -> Result<Table> {
    let parse = |e: csv::Error| HarnessError::Parse {
        what: path.display().to_string(),
        reason: e.to_string(),
    };
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => HarnessError::io(path, e.into()),
            _ => parse(e),
        })?;
    let header: Vec<String> = rd.headers().map_err(parse)?.iter().map(str::to_string).collect();
    let t_idx = header
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| HarnessError::Parse {
            what: path.display().to_string(),
            reason: format!("no column named `{target}`"),
        })?;
    let mut features = Vec::new();
    let mut y = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec.map_err(parse)?;
        let mut x = Vec::with_capacity(header.len() - 1);
        for (j, field) in rec.iter().enumerate() {
            let v = parse_float(field, &header[j], row + 1)?;
            if !v.is_finite() {
                return Err(HarnessError::NonNumericColumn {
                    column: header[j].clone(),
                    row: row + 1,
                });
            }
            if j == t_idx {
                y.push(v);
            } else {
                x.push(v);
            }
        }
        features.push(x);
    }
    let feature_names = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != t_idx)
        .map(|(_, h)| h.clone())
        .collect();
    Ok(Table {
        feature_names,
        target_name: target.to_string(),
        features,
        target: y,
    })
}

/// Z-scores every feature column with its population mean and standard
/// deviation; constant columns become zero.
pub fn standardize(features: &mut [Vec<f64>]) {
    let Some(d) = features.first().map(Vec::len) else {
        return;
    };
    let n = features.len() as f64;
    for j in 0..d {
        let mean = features.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = features.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for r in features.iter_mut() {
            r[j] = if sd > 0.0 { (r[j] - mean) / sd } else { 0.0 };
        }
    }
}

/// Fitted values of an OLS model with intercept; falls back to the target
/// itself when the design is rank deficient.
fn fitted_scores(features: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = features
        .iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
        .collect();
    let fit = Dataset::from_rows(&rows, target.to_vec()).and_then(|d| ols_fit(&d));
    match fit {
        Ok(theta) => rows.iter().map(|r| fedband::linalg::dot(r, &theta)).collect(),
        Err(e) => {
            warn!("score model failed ({e}); sorting by target");
            target.to_vec()
        }
    }
}

/// Row order for dealing shards: sort by
/// `h·rank(score)/(n−1) + (1−h)·u`, `u ~ U[0,1)` per row.
pub fn shard_order(scores: &[f64], heterogeneity: f64, seed: u64) -> Vec<usize> {
    let n = scores.len();
    let mut by_score: Vec<usize> = (0..n).collect();
    by_score.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let mut rank = vec![0.0; n];
    let denom = (n.max(2) - 1) as f64;
    for (r, &i) in by_score.iter().enumerate() {
        rank[i] = r as f64 / denom;
    }
    let mut rng = rng_from_seed(derive_seed(seed, &[0x1A9E57]));
    let keys: Vec<f64> = (0..n)
        .map(|i| heterogeneity * rank[i] + (1.0 - heterogeneity) * rng.random::<f64>())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    order
}

/// Splits `order` into `users` contiguous shards whose sizes differ by at
/// most one.
pub fn deal(order: &[usize], users: usize) -> Vec<Vec<usize>> {
    let (base, extra) = (order.len() / users, order.len() % users);
    let mut out = Vec::with_capacity(users);
    let mut at = 0;
    for u in 0..users {
        let len = base + usize::from(u < extra);
        out.push(order[at..at + len].to_vec());
        at += len;
    }
    out
}

pub fn ingest_csv_dataset(
    path: &Path,
    target: &str,
    n_users: usize,
    heterogeneity: f64,
    seed: u64,
) -> Result<(Table, Vec<IngestedUser>)> {
    if n_users == 0 {
        return Err(HarnessError::Validation {
            field: "users".into(),
            reason: "must be at least 1".into(),
        });
    }
    if !(0.0..=1.0).contains(&heterogeneity) {
        return Err(HarnessError::Validation {
            field: "heterogeneity".into(),
            reason: "must lie in [0, 1]".into(),
        });
    }
    let mut table = read_table(path, target)?;
    if table.target.len() < n_users {
        return Err(HarnessError::Validation {
            field: "users".into(),
            reason: format!("{} rows cannot fill {n_users} shards", table.target.len()),
        });
    }
    standardize(&mut table.features);
    let scores = fitted_scores(&table.features, &table.target);
    let order = shard_order(&scores, heterogeneity, seed);
    let users = deal(&order, n_users)
        .into_iter()
        .enumerate()
        .map(|(index, rows)| {
            let x: Vec<Vec<f64>> = rows.iter().map(|&i| table.features[i].clone()).collect();
            let y: Vec<f64> = rows.iter().map(|&i| table.target[i]).collect();
            let data = Dataset::from_rows(&x, y)?;
            let theta_hat = ols_fit(&data).ok();
            let noise_var = theta_hat.as_ref().and_then(|t| {
                let dof = data.len().checked_sub(data.dims()).filter(|&d| d > 0)?;
                let rss: f64 = data
                    .samples()
                    .map(|(x, y)| (fedband::linalg::dot(x, t) - y).powi(2))
                    .sum();
                Some(rss / dof as f64)
            });
            Ok(IngestedUser {
                index,
                rows,
                data,
                theta_hat,
                noise_var,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((table, users))
}

/// Writes `user_<k>.csv` (standardized features and target) per shard and a
/// `shards.csv` summary; returns the written file names.
pub fn write_shards(table: &Table, users: &[IngestedUser], out_dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut files = Vec::new();
    let io = |p: &Path, e: csv::Error| HarnessError::io(p, e.into());
    let summary_path = out_dir.join("shards.csv");
    let mut summary = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&summary_path)
        .map_err(|e| io(&summary_path, e))?;
    summary
        .write_record(["user", "rows", "target_mean", "noise_var"])
        .map_err(|e| io(&summary_path, e))?;
    for u in users {
        let name = format!("user_{}.csv", u.index);
        let path = out_dir.join(&name);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(|e| io(&path, e))?;
        let mut header = table.feature_names.clone();
        header.push(table.target_name.clone());
        w.write_record(&header).map_err(|e| io(&path, e))?;
        for (x, y) in u.data.samples() {
            let rec: Vec<String> = x.iter().chain(std::iter::once(&y)).map(|&v| format_float(v)).collect();
            w.write_record(&rec).map_err(|e| io(&path, e))?;
        }
        w.flush().map_err(|e| HarnessError::io(&path, e))?;
        files.push(name);
        let mean = u.data.outputs().iter().sum::<f64>() / u.data.len() as f64;
        summary
            .write_record([
                u.index.to_string(),
                u.data.len().to_string(),
                format_float(mean),
                u.noise_var.map(format_float).unwrap_or_default(),
            ])
            .map_err(|e| io(&summary_path, e))?;
    }
    summary.flush().map_err(|e| HarnessError::io(&summary_path, e))?;
    files.push("shards.csv".into());
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn deal_sizes() {
        let order: Vec<usize> = (0..10).collect();
        let shards = deal(&order, 3);
        assert_eq!(shards, vec![vec![0, 1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]);
    }

    #[test]
    fn full_heterogeneity_sorts_by_score() {
        let scores = [3.0, -1.0, 2.0, 0.5];
        assert_eq!(shard_order(&scores, 1.0, 9), vec![1, 3, 2, 0]);
    }

    #[test]
    fn standardize_columns() {
        let mut x = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        standardize(&mut x);
        assert_eq!(x, vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
    }

    proptest! {
        #[test]
        fn order_is_permutation(scores in prop::collection::vec(-10.0f64..10.0, 1..60), h in 0.0f64..=1.0, seed: u64) {
            let mut order = shard_order(&scores, h, seed);
            order.sort();
            prop_assert_eq!(order, (0..scores.len()).collect::<Vec<_>>());
        }

        #[test]
        fn shards_partition_rows(n in 1usize..200, users in 1usize..20) {
            let order: Vec<usize> = (0..n).collect();
            let shards = deal(&order, users);
            prop_assert_eq!(shards.len(), users);
            let sizes: Vec<usize> = shards.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            prop_assert_eq!(shards.concat(), order);
        }
    }
}

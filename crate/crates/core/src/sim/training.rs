use super::cluster::{ClusterState, NewUser};
use crate::bandit::ArmId;
use crate::error::{Error, Result};
use crate::estimator::{empirical_loss, fedavg_aggregate};
use crate::linalg::dot;
use crate::Dataset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientSchedule {
    pub rounds: usize,
    pub local_steps: usize,
    pub learning_rate: f64,
}

/// One point of a loss curve.
#[derive(Debug, Clone, PartialEq)]
pub struct LossPoint {
    pub round: usize,
    pub arm_joined: ArmId,
    pub fl_loss: f64,
}

fn local_descent(start: &[f64], data: &Dataset, steps: usize, lr: f64) -> Vec<f64> {
    let mut theta = start.to_vec();
    let n = data.len() as f64;
    for _ in 0..steps {
        let mut grad = vec![0.0; theta.len()];
        for (x, y) in data.samples() {
            let r = dot(x, &theta) - y;
            for (g, xi) in grad.iter_mut().zip(x) {
                *g += 2.0 * r * xi / n;
            }
        }
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= lr * g;
        }
    }
    theta
}

/// Gradient-descent FedAvg from a zero model with `user` inside cluster `c`.
/// Each round every participant takes `local_steps` full-batch steps from the
/// current global model, then the server averages by sample count. Point `r`
/// is the user's held-out loss of `ω·local_fit + (1−ω)·global` after round
/// `r`; round 0 is the untrained model.
pub fn loss_curve(c: &ClusterState, user: &NewUser, omega: f64, schedule: GradientSchedule) -> Result<Vec<LossPoint>> {
    if !(schedule.learning_rate > 0.0 && schedule.learning_rate.is_finite()) {
        return Err(Error::OutOfRange {
            name: "learning_rate",
            value: schedule.learning_rate,
            range: "(0, inf)",
        });
    }
    if user.holdout.is_empty() {
        return Err(Error::EmptyEvalSet);
    }
    let mut parts: Vec<&Dataset> = c.members.iter().map(|m| &m.data).collect();
    parts.push(&user.train);
    let counts: Vec<usize> = parts.iter().map(|d| d.len()).collect();
    let mut global = vec![0.0; c.dims()];
    let personalized = |g: &[f64]| -> Vec<f64> {
        g.iter()
            .zip(&user.local_fit)
            .map(|(g, l)| omega * l + (1.0 - omega) * g)
            .collect()
    };
    let mut out = Vec::with_capacity(schedule.rounds + 1);
    out.push(LossPoint {
        round: 0,
        arm_joined: c.id,
        fl_loss: empirical_loss(&personalized(&global), &user.holdout)?,
    });
    for round in 1..=schedule.rounds {
        let models: Vec<Vec<f64>> = parts
            .iter()
            .map(|d| local_descent(&global, d, schedule.local_steps, schedule.learning_rate))
            .collect();
        global = fedavg_aggregate(&models, &counts)?;
        out.push(LossPoint {
            round,
            arm_joined: c.id,
            fl_loss: empirical_loss(&personalized(&global), &user.holdout)?,
        });
    }
    Ok(out)
}

/// [`loss_curve`] for every cluster, in cluster order.
pub fn loss_curves(
    clusters: &[ClusterState],
    user: &NewUser,
    omega: f64,
    schedule: GradientSchedule,
) -> Result<Vec<LossPoint>> {
    let mut out = Vec::new();
    for c in clusters {
        out.extend(loss_curve(c, user, omega, schedule)?);
    }
    Ok(out)
}

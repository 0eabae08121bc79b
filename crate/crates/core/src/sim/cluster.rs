use super::config::ScenarioConfig;
use crate::bandit::ArmId;
use crate::error::{Error, Result};
use crate::estimator::{fedavg_aggregate, ols_fit, sample_dataset};
use crate::linalg::{Cholesky, Matrix};
use crate::rng::{derive_seed, stream, tags};
use crate::GaussianSpec;
use crate::{Dataset, InputSpec, UserProfile};
use log::warn;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Smallest variance used when building Gaussians from a zero spread.
const VARIANCE_FLOOR: f64 = 1e-12;

/// The distribution a cluster's member parameters are drawn from:
/// `N(mean, variance·I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterGenerator {
    pub mean: Vec<f64>,
    pub variance: f64,
}

impl ClusterGenerator {
    pub fn gaussian(&self) -> Result<GaussianSpec> {
        GaussianSpec::isotropic(self.mean.clone(), self.variance.max(VARIANCE_FLOOR))
    }
}

/// One participant: its ground truth and its training split.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub profile: UserProfile,
    pub data: Dataset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub id: ArmId,
    pub members: Vec<Member>,
    pub global_model: Vec<f64>,
    /// Training samples across all members.
    pub total_samples: usize,
    /// Training samples of the members whose fits entered the last FedAvg round.
    pub fitted_samples: usize,
    /// Server-side held-out data.
    pub eval_set: Dataset,
    /// Ground-truth parameter distribution, when known.
    pub generator: Option<ClusterGenerator>,
}

impl ClusterState {
    /// A cluster with a zero global model; call [`run_fl_round`] to train it.
    pub fn new(
        id: ArmId,
        members: Vec<Member>,
        eval_set: Dataset,
        generator: Option<ClusterGenerator>,
    ) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyInput)?;
        let dims = first.data.dims();
        if let Some(m) = members.iter().find(|m| m.data.dims() != dims) {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: m.data.dims(),
            });
        }
        if eval_set.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: eval_set.dims(),
            });
        }
        let total_samples = members.iter().map(|m| m.data.len()).sum();
        Ok(Self {
            id,
            members,
            global_model: vec![0.0; dims],
            total_samples,
            fitted_samples: 0,
            eval_set,
            generator,
        })
    }

    pub fn dims(&self) -> usize {
        self.global_model.len()
    }

    /// Oracle view: the generating distribution.
    pub fn oracle_gaussian(&self) -> Option<Result<GaussianSpec>> {
        self.generator.as_ref().map(ClusterGenerator::gaussian)
    }

    /// Empirical view: centred on the global model, with the average OLS
    /// sampling covariance of the members.
    pub fn empirical_gaussian(&self) -> Result<GaussianSpec> {
        let d = self.dims();
        let mut cov = Matrix::zeros(d, d);
        let mut used = 0usize;
        for m in &self.members {
            if let Ok(g) = fitted_gaussian(&m.data) {
                for i in 0..d {
                    for j in 0..d {
                        cov[(i, j)] += g.covariance()[(i, j)];
                    }
                }
                used += 1;
            }
        }
        if used == 0 {
            return Err(Error::NotPositiveDefinite);
        }
        for i in 0..d {
            for j in 0..d {
                cov[(i, j)] /= used as f64;
            }
        }
        GaussianSpec::new(self.global_model.clone(), cov)
    }
}

/// Sampling distribution of a user's OLS estimate:
/// `N(θ̂, s²(XᵀX)⁻¹)` with `s²` the unbiased residual variance.
pub fn fitted_gaussian(data: &Dataset) -> Result<GaussianSpec> {
    let theta = ols_fit(data)?;
    let (n, d) = (data.len(), data.dims());
    let rss: f64 = data
        .samples()
        .map(|(x, y)| {
            let r = crate::linalg::dot(x, &theta) - y;
            r * r
        })
        .sum();
    let dof = n.saturating_sub(d).max(1) as f64;
    let s2 = (rss / dof).max(VARIANCE_FLOOR);
    let x = data.inputs();
    let gram = x.transpose().matmul(x)?;
    let chol = Cholesky::new(&gram)?;
    let mut cov = chol.solve_matrix(&Matrix::identity(d))?;
    for i in 0..d {
        for j in 0..d {
            cov[(i, j)] *= s2;
        }
    }
    // symmetrize rounding noise
    for i in 0..d {
        for j in 0..i {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    GaussianSpec::new(theta, cov)
}

fn normal_vec<R: Rng>(rng: &mut R, center: &[f64], sd: f64) -> Vec<f64> {
    center
        .iter()
        .map(|&c| {
            let z: f64 = StandardNormal.sample(rng);
            c + sd * z
        })
        .collect()
}

/// Draws one user around `mean`: `θ ~ N(mean, σ²I)`, noise variance uniform
/// on `[0.5, 1.5]·μ_e`, then its dataset.
fn draw_user(cfg: &ScenarioConfig, mean: &[f64], n_samples: usize, seed: u64) -> Result<(UserProfile, Dataset)> {
    let mut rng = stream(seed, &[0]);
    let theta = normal_vec(&mut rng, mean, cfg.hyper.sigma_sq().sqrt());
    let noise_var = cfg.hyper.mu_e() * rng.random_range(0.5..=1.5);
    let profile = UserProfile::new(theta, noise_var, n_samples, InputSpec::isotropic(cfg.input_variance)?)?;
    let data = sample_dataset(&profile, derive_seed(seed, &[tags::DATASET]));
    Ok((profile, data))
}

/// Generates cluster `id` from the scenario seed, trained for one round.
/// Cluster `id`'s draws depend only on `(seed, id)`.
pub fn generate_cluster(cfg: &ScenarioConfig, id: ArmId) -> Result<ClusterState> {
    let id_tag = id as u64;
    let mut rng = stream(cfg.seed, &[tags::CLUSTER_MEAN, id_tag]);
    let mean = normal_vec(&mut rng, &vec![0.0; cfg.dims], cfg.cluster_spread);
    let (lo, hi) = cfg.users_per_cluster;
    let n_members = rng.random_range(lo..=hi);
    let mut members = Vec::with_capacity(n_members);
    let mut eval: Option<Dataset> = None;
    for m in 0..n_members {
        let seed = derive_seed(cfg.seed, &[tags::MEMBER, id_tag, m as u64]);
        let n = stream(seed, &[1]).random_range(cfg.samples_per_user.0..=cfg.samples_per_user.1);
        let (profile, data) = draw_user(cfg, &mean, n, seed)?;
        let (train, holdout) = data.split_tail(cfg.holdout_frac);
        if let Some(h) = holdout {
            eval = Some(match eval {
                None => h,
                Some(e) => e.concat(&h)?,
            });
        }
        members.push(Member {
            profile: profile.with_samples(train.len())?,
            data: train,
        });
    }
    let eval = match eval {
        Some(e) => e,
        None => members[0].data.clone(),
    };
    let generator = ClusterGenerator {
        mean,
        variance: cfg.hyper.sigma_sq(),
    };
    let cluster = ClusterState::new(id, members, eval, Some(generator))?;
    run_fl_round(&cluster)
}

/// `cfg.n_clusters` clusters with ids `0..K`, each trained for one round.
pub fn build_clusters(cfg: &ScenarioConfig) -> Result<Vec<ClusterState>> {
    cfg.validate()?;
    (0..cfg.n_clusters).map(|k| generate_cluster(cfg, k)).collect()
}

/// One FedAvg round: every member fits OLS on its data and the global model
/// becomes the sample-weighted average. Members whose fit fails are skipped
/// with a warning and the weights renormalized over the rest.
pub fn run_fl_round(c: &ClusterState) -> Result<ClusterState> {
    let mut next = c.clone();
    fl_round_in_place(&mut next)?;
    Ok(next)
}

pub(crate) fn fl_round_in_place(c: &mut ClusterState) -> Result<()> {
    let mut fits = Vec::with_capacity(c.members.len());
    let mut counts = Vec::with_capacity(c.members.len());
    let mut last_err = None;
    for (i, m) in c.members.iter().enumerate() {
        match ols_fit(&m.data) {
            Ok(theta) => {
                fits.push(theta);
                counts.push(m.data.len());
            }
            Err(e) => {
                warn!("cluster {}: member {i} skipped: {e}", c.id);
                last_err = Some(e);
            }
        }
    }
    if fits.is_empty() {
        return Err(last_err.unwrap_or(Error::EmptyInput));
    }
    c.global_model = fedavg_aggregate(&fits, &counts)?;
    c.fitted_samples = counts.iter().sum();
    c.total_samples = c.members.iter().map(|m| m.data.len()).sum();
    Ok(())
}

/// The arriving user whose cluster is being chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct NewUser {
    pub profile: UserProfile,
    pub train: Dataset,
    pub holdout: Dataset,
    pub local_fit: Vec<f64>,
    /// Generating distribution shared with the matched cluster.
    pub generator: ClusterGenerator,
}

impl NewUser {
    /// Builds a user from raw data; the last `holdout_frac` rows become its
    /// held-out split (the full data when too short to split).
    pub fn from_data(
        profile: UserProfile,
        data: Dataset,
        holdout_frac: f64,
        generator: ClusterGenerator,
    ) -> Result<Self> {
        let (train, holdout) = data.split_tail(holdout_frac);
        let holdout = holdout.unwrap_or_else(|| train.clone());
        let local_fit = ols_fit(&train)?;
        Ok(Self {
            profile,
            train,
            holdout,
            local_fit,
            generator,
        })
    }

    pub fn oracle_gaussian(&self) -> Result<GaussianSpec> {
        self.generator.gaussian()
    }
}

/// Draws the `index`-th arriving user from the generating distribution of
/// cluster `matched`.
pub fn generate_new_user(cfg: &ScenarioConfig, matched: &ClusterState, index: u64) -> Result<NewUser> {
    let generator = matched.generator.clone().ok_or_else(|| Error::InvalidConfig {
        field: "matched_cluster",
        reason: "matched cluster has no known generator".into(),
    })?;
    let seed = derive_seed(cfg.seed, &[tags::NEW_USER, index]);
    let (profile, data) = draw_user(cfg, &generator.mean, cfg.new_user_samples, seed)?;
    NewUser::from_data(profile, data, cfg.holdout_frac, generator)
}

/// The matched cluster: the configured one, otherwise drawn from the seed.
pub fn matched_cluster_id(cfg: &ScenarioConfig) -> ArmId {
    cfg.matched_cluster
        .unwrap_or_else(|| stream(cfg.seed, &[tags::NEW_USER, u64::MAX]).random_range(0..cfg.n_clusters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::HyperParams;

    fn small_cfg() -> ScenarioConfig {
        ScenarioConfig {
            n_clusters: 4,
            horizon: 100,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = build_clusters(&small_cfg()).unwrap();
        let b = build_clusters(&small_cfg()).unwrap();
        assert_eq!(a, b);
        let c = build_clusters(&ScenarioConfig { seed: 4, ..small_cfg() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn cluster_invariants() {
        for c in build_clusters(&small_cfg()).unwrap() {
            assert_eq!(c.total_samples, c.members.iter().map(|m| m.data.len()).sum::<usize>());
            assert_eq!(c.global_model.len(), 5);
            assert!(!c.eval_set.is_empty());
            for m in &c.members {
                assert_eq!(m.profile.n_samples(), m.data.len());
            }
        }
    }

    #[test]
    fn single_member_global_is_its_fit() {
        let cfg = ScenarioConfig {
            n_clusters: 1,
            users_per_cluster: (1, 1),
            horizon: 1,
            ..Default::default()
        };
        let c = &build_clusters(&cfg).unwrap()[0];
        assert_eq!(c.members.len(), 1);
        assert_eq!(c.global_model, ols_fit(&c.members[0].data).unwrap());
    }

    #[test]
    fn identical_members_share_fit() {
        let profile = UserProfile::new(vec![1.0, -1.0], 0.3, 30, InputSpec::standard()).unwrap();
        let data = sample_dataset(&profile, 8);
        let m = Member {
            profile,
            data: data.clone(),
        };
        let c = ClusterState::new(0, vec![m.clone(), m.clone(), m], data.clone(), None).unwrap();
        let c = run_fl_round(&c).unwrap();
        let fit = ols_fit(&data).unwrap();
        for (a, b) in c.global_model.iter().zip(&fit) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_shared_theta_recovered_and_idempotent() {
        let theta = vec![0.5, -2.0, 3.0];
        let members: Vec<Member> = (0..5)
            .map(|i| {
                let profile = UserProfile::new(theta.clone(), 0.0, 20 + i, InputSpec::standard()).unwrap();
                let data = sample_dataset(&profile, 100 + i as u64);
                Member { profile, data }
            })
            .collect();
        let eval = members[0].data.clone();
        let c = run_fl_round(&ClusterState::new(0, members, eval, None).unwrap()).unwrap();
        for (a, b) in c.global_model.iter().zip(&theta) {
            assert!((a - b).abs() < 1e-9);
        }
        let again = run_fl_round(&c).unwrap();
        for (a, b) in again.global_model.iter().zip(&c.global_model) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn singular_member_skipped() {
        let good_p = UserProfile::new(vec![2.0], 0.0, 10, InputSpec::standard()).unwrap();
        let good = Member {
            data: sample_dataset(&good_p, 1),
            profile: good_p,
        };
        let bad_data = Dataset::from_rows(&[vec![0.0], vec![0.0]], vec![1.0, 2.0]).unwrap();
        let bad = Member {
            profile: UserProfile::new(vec![5.0], 0.0, 2, InputSpec::standard()).unwrap(),
            data: bad_data,
        };
        let c = ClusterState::new(0, vec![good.clone(), bad], good.data.clone(), None).unwrap();
        let c = run_fl_round(&c).unwrap();
        assert!((c.global_model[0] - 2.0).abs() < 1e-9);
        assert_eq!(c.fitted_samples, 10);
    }

    #[test]
    fn cluster_means_are_distinct() {
        let cfg = ScenarioConfig {
            n_clusters: 20,
            ..Default::default()
        };
        let clusters = build_clusters(&cfg).unwrap();
        let means: Vec<_> = clusters.iter().map(|c| c.generator.clone().unwrap().mean).collect();
        let mut min = f64::INFINITY;
        for i in 0..means.len() {
            for j in i + 1..means.len() {
                min = min.min(crate::linalg::squared_distance(&means[i], &means[j]).sqrt());
            }
        }
        assert!(min > 0.0);
    }

    #[test]
    fn fitted_gaussian_covariance_shrinks_with_data() {
        let p = UserProfile::new(vec![1.0, 2.0], 1.0, 50, InputSpec::standard()).unwrap();
        let small = fitted_gaussian(&sample_dataset(&p, 1)).unwrap();
        let big = fitted_gaussian(&sample_dataset(&p.with_samples(5000).unwrap(), 1)).unwrap();
        assert!(big.covariance().trace() < small.covariance().trace());
    }

    #[test]
    fn new_user_follows_matched_generator() {
        let cfg = ScenarioConfig {
            hyper: HyperParams::new(0.5, 0.0).unwrap(),
            ..small_cfg()
        };
        let clusters = build_clusters(&cfg).unwrap();
        let user = generate_new_user(&cfg, &clusters[2], 0).unwrap();
        assert_eq!(
            user.profile.theta_true(),
            clusters[2].generator.as_ref().unwrap().mean.as_slice()
        );
        assert_eq!(user.train.len() + user.holdout.len(), cfg.new_user_samples);
    }
}

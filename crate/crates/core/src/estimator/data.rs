use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;
use rand_distr::{Distribution, StandardNormal};

/// Zero-mean isotropic normal input distribution `N(0, variance · I)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputSpec<T> {
    variance: T,
}

impl<T: Scalar> InputSpec<T> {
    pub fn isotropic(variance: T) -> Result<Self> {
        if !(variance > T::zero()) || !variance.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "input variance must be positive and finite, got {variance}"
            )));
        }
        Ok(Self { variance })
    }

    pub fn standard() -> Self {
        Self { variance: T::one() }
    }

    pub fn variance(&self) -> T {
        self.variance
    }
}

/// Ground truth for one user: `y = x·θ + η`, `η ~ N(0, noise_var)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile<T> {
    theta_true: Vec<T>,
    noise_var: T,
    n_samples: usize,
    input: InputSpec<T>,
}

impl<T: Scalar> UserProfile<T> {
    pub fn new(theta_true: Vec<T>, noise_var: T, n_samples: usize, input: InputSpec<T>) -> Result<Self> {
        if theta_true.is_empty() {
            return Err(Error::InvalidProfile("theta must have length >= 1".into()));
        }
        if theta_true.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("theta must be finite".into()));
        }
        if !(noise_var >= T::zero()) || !noise_var.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "noise variance must be non-negative, got {noise_var}"
            )));
        }
        if n_samples == 0 {
            return Err(Error::InvalidProfile("n_samples must be >= 1".into()));
        }
        Ok(Self {
            theta_true,
            noise_var,
            n_samples,
            input,
        })
    }

    pub fn theta_true(&self) -> &[T] {
        &self.theta_true
    }

    pub fn noise_var(&self) -> T {
        self.noise_var
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn input(&self) -> InputSpec<T> {
        self.input
    }

    pub fn dims(&self) -> usize {
        self.theta_true.len()
    }

    pub fn with_samples(&self, n_samples: usize) -> Result<Self> {
        Self::new(self.theta_true.clone(), self.noise_var, n_samples, self.input)
    }
}

/// Inputs `X` (n×D) and outputs `Y` (length n) for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    inputs: Matrix<T>,
    outputs: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(inputs: Matrix<T>, outputs: Vec<T>) -> Result<Self> {
        if inputs.rows() != outputs.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.rows(),
                actual: outputs.len(),
            });
        }
        if outputs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if inputs.cols() == 0 {
            return Err(Error::InvalidDataset("inputs need at least one column".into()));
        }
        Ok(Self { inputs, outputs })
    }

    pub fn from_rows(rows: &[Vec<T>], outputs: Vec<T>) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, outputs)
    }

    pub fn inputs(&self) -> &Matrix<T> {
        &self.inputs
    }

    pub fn outputs(&self) -> &[T] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.inputs.cols()
    }

    pub fn samples(&self) -> impl Iterator<Item = (&[T], T)> {
        self.inputs.row_iter().zip(self.outputs.iter().copied())
    }

    /// Keeps the rows at `idx`, in order. `None` when `idx` is empty.
    pub fn subset(&self, idx: &[usize]) -> Option<Self> {
        if idx.is_empty() {
            return None;
        }
        Some(Self {
            inputs: self.inputs.select_rows(idx),
            outputs: idx.iter().map(|&i| self.outputs[i]).collect(),
        })
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.inputs.vstack(&other.inputs)?,
            self.outputs.iter().chain(&other.outputs).copied().collect(),
        )
    }

    /// Splits off the trailing `holdout_frac` of rows (at least one row each
    /// side when `len ≥ 2`). Returns `(train, holdout)`.
    pub fn split_tail(&self, holdout_frac: f64) -> (Self, Option<Self>) {
        let n = self.len();
        if n < 2 || holdout_frac <= 0.0 {
            return (self.clone(), None);
        }
        let hold = ((n as f64 * holdout_frac).round() as usize).clamp(1, n - 1);
        let train: Vec<usize> = (0..n - hold).collect();
        let test: Vec<usize> = (n - hold..n).collect();
        (self.subset(&train).expect("nonempty train"), self.subset(&test))
    }
}

/// Draws `profile.n_samples()` i.i.d. inputs from the profile's input
/// distribution and outputs `x·θ + η`. Deterministic in `seed`.
pub fn sample_dataset<T: Scalar>(profile: &UserProfile<T>, seed: u64) -> Dataset<T> {
    let mut rng = rng_from_seed(seed);
    let d = profile.dims();
    let n = profile.n_samples();
    let in_sd = profile.input().variance().as_f64().sqrt();
    let noise_sd = profile.noise_var().as_f64().sqrt();
    let mut data = Vec::with_capacity(n * d);
    let mut outputs = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<T> = (0..d)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                T::lit(z * in_sd)
            })
            .collect();
        let eta: f64 = StandardNormal.sample(&mut rng);
        outputs.push(dot(&row, profile.theta_true()) + T::lit(eta * noise_sd));
        data.extend(row);
    }
    let inputs = Matrix::from_row_major(n, d, data).expect("n*d entries");
    Dataset { inputs, outputs }
}

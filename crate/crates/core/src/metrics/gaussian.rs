use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::Scalar;

/// Multivariate normal with a symmetric positive-definite covariance.
#[derive(Debug, Clone)]
pub struct GaussianSpec<T> {
    mean: Vec<T>,
    covariance: Matrix<T>,
    chol: Cholesky<T>,
}

impl<T: Scalar> PartialEq for GaussianSpec<T> {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.covariance == other.covariance
    }
}

impl<T: Scalar> GaussianSpec<T> {
    pub fn new(mean: Vec<T>, covariance: Matrix<T>) -> Result<Self> {
        if covariance.rows() != mean.len() || covariance.cols() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                actual: covariance.rows(),
            });
        }
        if !covariance.is_symmetric(T::lit(1e-10)) {
            return Err(Error::NotPositiveDefinite);
        }
        let chol = Cholesky::new(&covariance)?;
        Ok(Self { mean, covariance, chol })
    }

    /// `N(mean, variance·I)`.
    pub fn isotropic(mean: Vec<T>, variance: T) -> Result<Self> {
        let d = mean.len();
        Self::new(mean, Matrix::scaled_identity(d, variance))
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix<T> {
        &self.covariance
    }

    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    /// `ln p(x)`.
    pub fn log_density(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: x.len(),
            });
        }
        let diff: Vec<T> = x.iter().zip(&self.mean).map(|(&a, &m)| a - m).collect();
        let sol = self.chol.solve(&diff)?;
        let quad: T = diff.iter().zip(&sol).map(|(&a, &b)| a * b).sum();
        let d = T::from_count(self.dims());
        let two_pi = T::lit(2.0 * std::f64::consts::PI);
        Ok(-T::lit(0.5) * (d * two_pi.ln() + self.chol.log_det() + quad))
    }

    /// Lower Cholesky factor of the covariance, for sampling.
    pub fn cholesky_lower(&self) -> &Matrix<T> {
        self.chol.lower()
    }
}

/// `KL(p ‖ q) = ½(tr(Σq⁻¹Σp) + (μq−μp)ᵀΣq⁻¹(μq−μp) − d + ln(det Σq / det Σp))`.
pub fn kl_gaussian<T: Scalar>(p: &GaussianSpec<T>, q: &GaussianSpec<T>) -> Result<T> {
    if p.dims() != q.dims() {
        return Err(Error::DimensionMismatch {
            expected: p.dims(),
            actual: q.dims(),
        });
    }
    if p == q {
        return Ok(T::zero());
    }
    let trace = q.chol.solve_matrix(&p.covariance)?.trace();
    let diff: Vec<T> = q.mean.iter().zip(&p.mean).map(|(&a, &b)| a - b).collect();
    let sol = q.chol.solve(&diff)?;
    let mahalanobis: T = diff.iter().zip(&sol).map(|(&a, &b)| a * b).sum();
    let d = T::from_count(p.dims());
    Ok(T::lit(0.5) * (trace + mahalanobis - d + q.chol.log_det() - p.chol.log_det()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kl_examples() {
        let p = GaussianSpec::isotropic(vec![0.0f64], 1.0).unwrap();
        let q = GaussianSpec::isotropic(vec![1.0f64], 1.0).unwrap();
        assert_eq!(kl_gaussian(&p, &p).unwrap(), 0.0);
        assert_relative_eq!(kl_gaussian(&p, &q).unwrap(), 0.5, epsilon = 1e-15);
        // univariate closed form: ln(s_q/s_p) + (s_p² + Δ²)/(2 s_q²) − ½
        let p = GaussianSpec::isotropic(vec![0.3f64], 0.5).unwrap();
        let q = GaussianSpec::isotropic(vec![-1.0f64], 2.0).unwrap();
        let expect = (2.0f64 / 0.5).sqrt().ln() + (0.5 + 1.3f64.powi(2)) / 4.0 - 0.5;
        assert_relative_eq!(kl_gaussian(&p, &q).unwrap(), expect, epsilon = 1e-14);
    }

    #[test]
    fn validation() {
        let asym = Matrix::from_rows(&[vec![1.0f64, 0.5], vec![0.4, 1.0]]).unwrap();
        assert!(GaussianSpec::new(vec![0.0, 0.0], asym).is_err());
        let indefinite = Matrix::from_rows(&[vec![1.0f64, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(
            GaussianSpec::new(vec![0.0, 0.0], indefinite).unwrap_err(),
            Error::NotPositiveDefinite
        );
        let p = GaussianSpec::isotropic(vec![0.0f64], 1.0).unwrap();
        let q = GaussianSpec::isotropic(vec![0.0f64, 1.0], 1.0).unwrap();
        assert!(matches!(kl_gaussian(&p, &q), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn log_density_standard_normal() {
        let p = GaussianSpec::isotropic(vec![0.0f64, 0.0], 1.0).unwrap();
        let expect = -(2.0 * std::f64::consts::PI).ln() - 0.5 * (1.0 + 4.0);
        assert_relative_eq!(p.log_density(&[1.0, 2.0]).unwrap(), expect, epsilon = 1e-14);
    }
}

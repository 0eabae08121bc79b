use super::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, Svd};
use crate::scalar::{max_condition, Scalar};

/// Ordinary least squares `θ̂ = (XᵀX)⁻¹XᵀY`.
///
/// Solved through a thin SVD of `X` rather than forming `XᵀX`, so the
/// condition check sees `cond(X)` directly. Designs with `cond(X)` above
/// [`max_condition`] are rejected with [`Error::SingularDesign`].
pub fn ols_fit<T: Scalar>(data: &Dataset<T>) -> Result<Vec<T>> {
    let (n, d) = (data.len(), data.dims());
    if n < d {
        return Err(Error::InsufficientSamples { samples: n, dims: d });
    }
    let svd = Svd::new(data.inputs());
    let condition = svd.condition_number();
    if !(condition <= max_condition::<T>()) {
        return Err(Error::SingularDesign {
            condition: condition.as_f64(),
        });
    }
    svd.solve(data.outputs())
}

/// Squared-error loss of one sample, `½(xᵀθ − y)²`.
pub fn sample_loss<T: Scalar>(theta: &[T], x: &[T], y: T) -> Result<T> {
    if theta.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            actual: x.len(),
        });
    }
    let r = dot(x, theta) - y;
    Ok(T::lit(0.5) * r * r)
}

/// Mean of [`sample_loss`] over every row of `data`.
pub fn empirical_loss<T: Scalar>(theta: &[T], data: &Dataset<T>) -> Result<T> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = T::zero();
    for (x, y) in data.samples() {
        total = total + sample_loss(theta, x, y)?;
    }
    Ok(total / T::from_count(data.len()))
}

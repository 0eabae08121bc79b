use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use rand_distr::{Distribution, Exp};

/// Event times of a homogeneous Poisson process on `[0, horizon]`, built from
/// exponential inter-arrival gaps.
pub fn arrival_times(rate: f64, horizon: f64, seed: u64) -> Result<Vec<f64>> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidRate(rate));
    }
    if !(horizon > 0.0) {
        return Ok(Vec::new());
    }
    let gap = Exp::new(rate).map_err(|_| Error::InvalidRate(rate))?;
    let mut rng = rng_from_seed(seed);
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        t += gap.sample(&mut rng);
        if t > horizon {
            return Ok(times);
        }
        times.push(t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_horizon_is_empty() {
        assert!(arrival_times(3.0, 0.0, 1).unwrap().is_empty());
    }

    #[test]
    fn bad_rates() {
        for r in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(arrival_times(r, 10.0, 0), Err(Error::InvalidRate(_))));
        }
    }

    #[test]
    fn count_matches_rate() {
        let n = arrival_times(2.0, 1e4, 42).unwrap().len() as f64;
        assert!((n - 2e4).abs() / 2e4 < 0.03, "{n}");
    }

    proptest! {
        #[test]
        fn sorted_within_horizon(rate in 0.01f64..20.0, horizon in 0.0f64..200.0, seed: u64) {
            let ts = arrival_times(rate, horizon, seed).unwrap();
            prop_assert!(ts.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(ts.iter().all(|&t| (0.0..=horizon).contains(&t)));
            prop_assert_eq!(ts, arrival_times(rate, horizon, seed).unwrap());
        }
    }
}

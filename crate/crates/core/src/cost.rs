//! Switching and energy costs.
//!
//! Cluster similarity is the Jaccard index of binarized global models: `1`
//! for identical supports, `0` for disjoint ones. Moving between similar
//! clusters is charged more, `a·exp(b·J)`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Device energy parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams<T> {
    /// Effective switched capacitance.
    pub kappa: T,
    /// CPU cycles per sample.
    pub cycles_per_sample: T,
    /// Cycles per second.
    pub cpu_freq: T,
    pub local_iters: u32,
    /// Seconds.
    pub tx_time: T,
    /// Watts.
    pub tx_power: T,
}

impl<T: Scalar> EnergyParams<T> {
    pub fn new(kappa: T, cycles_per_sample: T, cpu_freq: T, local_iters: u32, tx_time: T, tx_power: T) -> Result<Self> {
        for (name, v) in [("kappa", kappa), ("tx_time", tx_time), ("tx_power", tx_power)] {
            non_negative(name, v)?;
        }
        for (name, v) in [("cycles_per_sample", cycles_per_sample), ("cpu_freq", cpu_freq)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::OutOfRange {
                    name,
                    value: v.as_f64(),
                    range: "(0, inf)",
                });
            }
        }
        Ok(Self {
            kappa,
            cycles_per_sample,
            cpu_freq,
            local_iters,
            tx_time,
            tx_power,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchCostParams<T> {
    a: T,
    b: T,
    alpha_mix: T,
}

impl<T: Scalar> SwitchCostParams<T> {
    pub fn new(a: T, b: T, alpha_mix: T) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::OutOfRange {
                name: "a",
                value: a.as_f64(),
                range: "(0, inf)",
            });
        }
        if !b.is_finite() {
            return Err(Error::OutOfRange {
                name: "b",
                value: b.as_f64(),
                range: "finite",
            });
        }
        unit_interval("alpha_mix", alpha_mix)?;
        Ok(Self { a, b, alpha_mix })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn alpha_mix(&self) -> T {
        self.alpha_mix
    }
}

fn non_negative<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v.as_f64(),
            range: "[0, inf)",
        })
    }
}

fn unit_interval<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v >= T::zero() && v <= T::one() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v.as_f64(),
            range: "[0, 1]",
        })
    }
}

/// Bit `i` is set iff `theta[i] > threshold`.
pub fn binarize_model<T: Scalar>(theta: &[T], threshold: T) -> Vec<bool> {
    theta.iter().map(|&v| v > threshold).collect()
}

/// `|S_k ∩ S_p| / |S_k ∪ S_p|` over set bits; two empty supports give 1.
pub fn jaccard_similarity<T: Scalar>(s_k: &[bool], s_p: &[bool]) -> Result<T> {
    if s_k.len() != s_p.len() {
        return Err(Error::DimensionMismatch {
            expected: s_k.len(),
            actual: s_p.len(),
        });
    }
    let (inter, union) = s_k.iter().zip(s_p).fold((0usize, 0usize), |(i, u), (&a, &b)| {
        (i + usize::from(a && b), u + usize::from(a || b))
    });
    if union == 0 {
        return Ok(T::one());
    }
    Ok(T::from_count(inter) / T::from_count(union))
}

/// `a·exp(b·J)`.
pub fn switching_cost<T: Scalar>(params: &SwitchCostParams<T>, j_sim: T) -> Result<T> {
    unit_interval("j_sim", j_sim)?;
    Ok(params.a * (params.b * j_sim).exp())
}

/// Computation energy `κ·C·n·f²`.
pub fn computation_energy<T: Scalar>(p: &EnergyParams<T>, n_samples: usize) -> T {
    p.kappa * p.cycles_per_sample * T::from_count(n_samples) * p.cpu_freq * p.cpu_freq
}

/// Local computation time `I·C·n/f` in seconds.
pub fn computation_time<T: Scalar>(p: &EnergyParams<T>, n_samples: usize) -> T {
    T::from_count(p.local_iters as usize) * p.cycles_per_sample * T::from_count(n_samples) / p.cpu_freq
}

/// Transmission energy `t·p`.
pub fn transmission_energy<T: Scalar>(p: &EnergyParams<T>) -> T {
    p.tx_time * p.tx_power
}

/// Communication cost plus similarity-weighted jump cost, `e_c + α·e_s`.
pub fn total_switch_cost<T: Scalar>(e_c: T, e_s: T, alpha: T) -> Result<T> {
    non_negative("e_c", e_c)?;
    non_negative("e_s", e_s)?;
    unit_interval("alpha", alpha)?;
    Ok(e_c + alpha * e_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn energy(kappa: f64, c: f64, f: f64, iters: u32, t: f64, p: f64) -> EnergyParams<f64> {
        EnergyParams::new(kappa, c, f, iters, t, p).unwrap()
    }

    fn support(bits: &[usize], len: usize) -> Vec<bool> {
        (0..len).map(|i| bits.contains(&i)).collect()
    }

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize_model(&[1.2f64, -0.3, 0.0], 0.0), vec![true, false, false]);
        assert_eq!(binarize_model(&[0.1f64, 2.0, 9.0], 0.0), vec![true; 3]);
        assert_eq!(binarize_model(&[0.1f64, 2.0, 9.0], 10.0), vec![false; 3]);
    }

    #[test]
    fn jaccard_examples() {
        let a = support(&[1, 2, 3], 5);
        let b = support(&[2, 3, 4], 5);
        assert_eq!(jaccard_similarity::<f64>(&a, &b).unwrap(), 0.5);
        assert_eq!(jaccard_similarity::<f64>(&a, &a).unwrap(), 1.0);
        let c = support(&[0, 4], 5);
        assert_eq!(jaccard_similarity::<f64>(&support(&[1, 2], 5), &c).unwrap(), 0.0);
        assert_eq!(jaccard_similarity::<f64>(&[false; 3], &[false; 3]).unwrap(), 1.0);
        assert!(jaccard_similarity::<f64>(&a, &a[..3]).is_err());
    }

    #[test]
    fn switching_cost_examples() {
        let p = SwitchCostParams::new(1.0f64, 0.0, 0.5).unwrap();
        assert_eq!(switching_cost(&p, 0.37).unwrap(), 1.0);
        let p = SwitchCostParams::new(0.1f64, 1.0, 0.5).unwrap();
        assert_relative_eq!(switching_cost(&p, 0.0).unwrap(), 0.1);
        assert_relative_eq!(
            switching_cost(&p, 1.0).unwrap(),
            0.271_828_182_845_904_5,
            epsilon = 1e-15
        );
        assert!(switching_cost(&p, 1.2).is_err());
        assert!(SwitchCostParams::new(0.0f64, 1.0, 0.5).is_err());
        assert!(SwitchCostParams::new(1.0f64, 1.0, 1.5).is_err());
    }

    #[test]
    fn energy_examples() {
        assert_eq!(computation_energy(&energy(1.0, 2.0, 2.0, 1, 0.0, 0.0), 3), 24.0);
        assert_eq!(computation_energy(&energy(0.0, 2.0, 2.0, 1, 0.0, 0.0), 3), 0.0);
        let base = computation_energy(&energy(1e-28, 20.0, 1e9, 1, 0.0, 0.0), 100);
        let doubled = computation_energy(&energy(1e-28, 20.0, 2e9, 1, 0.0, 0.0), 100);
        assert_relative_eq!(doubled, 4.0 * base, max_relative = 1e-14);

        assert_eq!(computation_time(&energy(1.0, 4.0, 8.0, 1, 0.0, 0.0), 2), 1.0);
        assert_eq!(computation_time(&energy(1.0, 4.0, 8.0, 0, 0.0, 0.0), 2), 0.0);
        let p = energy(1.0, 3.0, 5.0, 2, 0.0, 0.0);
        assert_relative_eq!(computation_time(&p, 10), 5.0 * computation_time(&p, 2));

        assert_eq!(transmission_energy(&energy(1.0, 1.0, 1.0, 1, 2.0, 3.0)), 6.0);
        assert_eq!(transmission_energy(&energy(1.0, 1.0, 1.0, 1, 2.0, 0.0)), 0.0);
        assert_relative_eq!(transmission_energy(&energy(1.0, 1.0, 1.0, 1, 0.5, 0.2)), 0.1);
        assert!(EnergyParams::new(1.0f64, 0.0, 1.0, 1, 0.0, 0.0).is_err());
    }

    #[test]
    fn total_switch_cost_examples() {
        assert_eq!(total_switch_cost(1.0f64, 2.0, 0.0).unwrap(), 1.0);
        assert_eq!(total_switch_cost(1.0f64, 2.0, 1.0).unwrap(), 3.0);
        assert_relative_eq!(total_switch_cost(0.1f64, 0.2, 0.5).unwrap(), 0.2);
        assert!(total_switch_cost(1.0f64, 2.0, 1.1).is_err());
        assert!(total_switch_cost(-1.0f64, 2.0, 0.5).is_err());
    }

    fn bits(n: usize) -> impl Strategy<Value = Vec<bool>> {
        prop::collection::vec(any::<bool>(), n)
    }

    proptest! {
        #[test]
        fn jaccard_axioms((a, b) in (1usize..40).prop_flat_map(|n| (bits(n), bits(n)))) {
            let ab: f64 = jaccard_similarity(&a, &b).unwrap();
            let ba: f64 = jaccard_similarity(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(ab == 1.0, a == b);
        }

        #[test]
        fn switching_cost_monotone_and_bounded(
            a in 0.001f64..10.0, b in 0.0f64..5.0, j1 in 0.0f64..=1.0, j2 in 0.0f64..=1.0,
        ) {
            let p = SwitchCostParams::new(a, b, 0.5).unwrap();
            let (lo, hi) = if j1 <= j2 { (j1, j2) } else { (j2, j1) };
            let (c_lo, c_hi) = (switching_cost(&p, lo).unwrap(), switching_cost(&p, hi).unwrap());
            prop_assert!(c_lo <= c_hi);
            prop_assert!(c_hi <= a * b.exp() * (1.0 + 1e-15));
            prop_assert!(c_lo > 0.0);
        }

        #[test]
        fn energies_homogeneous(kappa in 0.0f64..10.0, p in 0.0f64..10.0, s in 0.0f64..5.0, n in 1usize..1000) {
            let e = energy(kappa, 3.0, 2.0, 1, 0.7, p);
            let scaled = energy(kappa * s, 3.0, 2.0, 1, 0.7, p * s);
            prop_assert!(computation_energy(&e, n) >= 0.0 && transmission_energy(&e) >= 0.0);
            let ce = computation_energy(&scaled, n) - s * computation_energy(&e, n);
            prop_assert!(ce.abs() <= 1e-12 * (1.0 + computation_energy(&scaled, n)));
            let te = transmission_energy(&scaled) - s * transmission_energy(&e);
            prop_assert!(te.abs() <= 1e-12 * (1.0 + transmission_energy(&scaled)));
        }

        #[test]
        fn total_cost_monotone(e_c in 0.0f64..5.0, e_s in 0.0f64..5.0, alpha in 0.0f64..=1.0, d in 0.0f64..1.0) {
            let base = total_switch_cost(e_c, e_s, alpha).unwrap();
            prop_assert!(total_switch_cost(e_c + d, e_s, alpha).unwrap() >= base);
            prop_assert!(total_switch_cost(e_c, e_s + d, alpha).unwrap() >= base);
            prop_assert!(total_switch_cost(e_c, e_s, (alpha + d).min(1.0)).unwrap() >= base);
        }
    }
}

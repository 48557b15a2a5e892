//! Characteristic functions of interference, noise and received signal.
//!
//! Every random variable in the model is symmetric, so all CFs here are even
//! and real-valued. A product-normal branch contributes (1 + E w^2)^{-1/2};
//! an idle subcarrier contributes the constant (1 - p); Gaussian noise (or a
//! conditioned desired signal) contributes exp(-v w^2 / 2).

use crate::error::{Error, Result};
use crate::geometry::LinkBudget;

/// An evaluatable even, real characteristic function together with its
/// large-w limit (the point mass at zero it encodes).
pub trait CharFn: Sync {
    fn eval(&self, w: f64) -> f64;

    /// Constant the CF approaches as |w| -> infinity; zero whenever a
    /// Gaussian factor is present.
    fn atom_mass(&self) -> f64 {
        0.0
    }
}

/// CF of a single co-channel interferer:
/// psi(w) = p (1 + E w^2)^{-1/2} + (1 - p).
pub fn cf_single_cci(w: f64, e: f64, p: f64) -> f64 {
    debug_assert!(e >= 0.0 && (0.0..=1.0).contains(&p));
    p / (1.0 + e * w * w).sqrt() + (1.0 - p)
}

/// CF of the sum of all interferers, optionally times a Gaussian factor for
/// noise and/or the conditioned desired term:
/// prod_m psi_m(w) * exp(-(sigma_N^2 + desired_term) w^2 / 2).
///
/// With zero noise and no desired term this is the pure-interference CF; with
/// noise it is the interference-plus-noise CF; with a desired term
/// E_0 |h_0|^2 it is the received-signal CF conditioned on the fading.
pub fn cf_total(
    w: f64,
    budget: &LinkBudget,
    loading: &[f64],
    noise_variance: f64,
    desired_term: Option<f64>,
) -> Result<f64> {
    let powers = budget.interferer_powers();
    if powers.len() != loading.len() {
        return Err(Error::invalid(format!(
            "loading length {} does not match interferer count {}",
            loading.len(),
            powers.len()
        )));
    }
    if noise_variance < 0.0 {
        return Err(Error::invalid("noise variance must be >= 0"));
    }
    if let Some(d) = desired_term {
        if d < 0.0 {
            return Err(Error::invalid("desired term must be >= 0"));
        }
    }
    let mut v = noise_variance + desired_term.unwrap_or(0.0);
    let mut acc = 1.0;
    for (&e, &p) in powers.iter().zip(loading) {
        acc *= cf_single_cci(w, e, p);
    }
    if v > 0.0 {
        acc *= (-0.5 * v * w * w).exp();
    } else {
        v = 0.0;
        let _ = v;
    }
    Ok(acc)
}

/// CF of the full interference-plus-Gaussian model, usable wherever a
/// [`CharFn`] is expected.
#[derive(Debug, Clone)]
pub struct CciCf {
    powers: Vec<f64>,
    loadings: Vec<f64>,
    gauss_variance: f64,
}

impl CciCf {
    pub fn new(powers: Vec<f64>, loadings: Vec<f64>, gauss_variance: f64) -> Result<Self> {
        if powers.len() != loadings.len() {
            return Err(Error::invalid("powers and loadings must have equal length"));
        }
        if powers.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::invalid("received powers must be >= 0"));
        }
        if loadings.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::invalid("loading rates must lie in [0, 1]"));
        }
        if !(gauss_variance >= 0.0) {
            return Err(Error::invalid("Gaussian variance must be >= 0"));
        }
        Ok(CciCf {
            powers,
            loadings,
            gauss_variance,
        })
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn loadings(&self) -> &[f64] {
        &self.loadings
    }

    pub fn gauss_variance(&self) -> f64 {
        self.gauss_variance
    }

    /// Total variance sum_m p_m E_m + gaussian part.
    pub fn variance(&self) -> f64 {
        let interference: f64 = self
            .powers
            .iter()
            .zip(&self.loadings)
            .map(|(&e, &p)| p * e)
            .sum();
        interference + self.gauss_variance
    }
}

impl CharFn for CciCf {
    fn eval(&self, w: f64) -> f64 {
        let mut acc = 1.0;
        for (&e, &p) in self.powers.iter().zip(&self.loadings) {
            acc *= cf_single_cci(w, e, p);
        }
        if self.gauss_variance > 0.0 {
            acc *= (-0.5 * self.gauss_variance * w * w).exp();
        }
        acc
    }

    fn atom_mass(&self) -> f64 {
        if self.gauss_variance > 0.0 {
            0.0
        } else {
            self.loadings.iter().map(|&p| 1.0 - p).product()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hex_layout, link_budget, Point, Scenario};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn single_cci_values() {
        assert_relative_eq!(cf_single_cci(0.0, 3.7, 0.4), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            cf_single_cci(1.0, 1.0, 1.0),
            std::f64::consts::FRAC_1_SQRT_2,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cf_single_cci(1.0, 1.0, 0.5),
            0.5 * std::f64::consts::FRAC_1_SQRT_2 + 0.5,
            max_relative = 1e-12
        );
    }

    fn budget_for(powers: &[f64]) -> LinkBudget {
        // synthetic budget carrying prescribed interferer powers
        LinkBudget {
            ms_position: Point::ORIGIN,
            distances: vec![1.0; powers.len() + 1],
            path_gains: vec![1.0; powers.len() + 1],
            received_powers: std::iter::once(1.0).chain(powers.iter().copied()).collect(),
        }
    }

    #[test]
    fn total_cf_values() {
        let b = budget_for(&[1.0, 1.0]);
        let v = cf_total(1.0, &b, &[1.0, 1.0], 0.0, None).unwrap();
        assert_relative_eq!(v, 0.5, max_relative = 1e-12);

        let b0 = budget_for(&[]);
        let v = cf_total(2.0, &b0, &[], 1.0, None).unwrap();
        assert_relative_eq!(v, (-2.0_f64).exp(), max_relative = 1e-12);

        let b = budget_for(&[3.0, 0.1]);
        let v = cf_total(5.0, &b, &[0.0, 0.0], 0.0, None).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-15);

        assert!(cf_total(1.0, &b, &[0.5], 0.0, None).is_err());
        assert!(cf_total(1.0, &b, &[0.5, 0.5], -1.0, None).is_err());
    }

    #[test]
    fn cf_total_matches_struct_on_geometry() {
        let positions = hex_layout(1, 1.0).unwrap();
        let sc = Scenario::new(1.0, positions, vec![1.0; 7], vec![4.0; 7], vec![0.5; 6], 1e-3)
            .unwrap();
        let lb = link_budget(&sc, Point::new(0.5, 0.0)).unwrap();
        let cf = CciCf::new(
            lb.interferer_powers().to_vec(),
            sc.loading_rates.clone(),
            sc.noise_variance,
        )
        .unwrap();
        for &w in &[0.0, 0.3, 1.7, 12.0] {
            let direct = cf_total(w, &lb, &sc.loading_rates, sc.noise_variance, None).unwrap();
            assert_relative_eq!(cf.eval(w), direct, max_relative = 1e-14);
        }
    }

    proptest! {
        #[test]
        fn cf_invariants(
            e in proptest::collection::vec(1e-4..10.0f64, 0..6),
            p in proptest::collection::vec(0.0..=1.0f64, 6),
            v in 0.0..2.0f64,
            w in -50.0..50.0f64,
        ) {
            let m = e.len();
            let cf = CciCf::new(e, p[..m].to_vec(), v).unwrap();
            let at0 = cf.eval(0.0);
            prop_assert!((at0 - 1.0).abs() < 1e-12);
            let fw = cf.eval(w);
            let bw = cf.eval(-w);
            prop_assert!((fw - bw).abs() < 1e-12);
            prop_assert!(fw.abs() <= 1.0 + 1e-12);
            prop_assert!(fw + 1e-12 >= cf.atom_mass() * (-0.5 * v * w * w).exp());
        }
    }
}

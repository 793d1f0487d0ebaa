//! System parameters and the utilizations derived from them.
//!
//! Sources are addressed with 1-based indices throughout the crate, so
//! `source = 1` is the first entry of [`SystemParams::arrival_rates`].

use serde::{Deserialize, Serialize};

use crate::error::{AoiError, Result};

/// Rates of a multi-source status-update system with an energy-harvesting
/// transmitter. All rates share one time unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Per-source update generation rates, one entry per source.
    pub arrival_rates: Vec<f64>,
    /// Energy packet arrival rate.
    pub energy_rate: f64,
    /// Service (transmission) rate.
    pub service_rate: f64,
    /// Battery capacity in energy packets.
    pub battery_capacity: usize,
}

/// Aggregate and per-source utilizations as seen from one source of interest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    /// The 1-based source these quantities refer to.
    pub source: usize,
    pub total_rate: f64,
    pub source_rate: f64,
    pub other_rate: f64,
    pub energy_rate: f64,
    pub service_rate: f64,
    /// `total_rate / service_rate`.
    pub server_utilization: f64,
    pub source_utilization: f64,
    pub other_utilization: f64,
    /// `energy_rate / service_rate`.
    pub energy_utilization: f64,
    pub battery_capacity: usize,
}

impl SystemParams {
    pub fn new(arrival_rates: Vec<f64>, energy_rate: f64, service_rate: f64, battery_capacity: usize) -> Result<Self> {
        let params = Self {
            arrival_rates,
            energy_rate,
            service_rate,
            battery_capacity,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds parameters from normalized utilizations with `service_rate` as
    /// the time scale: `λᵢ = ρᵢ·μ`, `η = β·μ`.
    pub fn from_utilizations(
        source_utilizations: &[f64],
        energy_utilization: f64,
        service_rate: f64,
        battery_capacity: usize,
    ) -> Result<Self> {
        Self::new(
            source_utilizations.iter().map(|r| r * service_rate).collect(),
            energy_utilization * service_rate,
            service_rate,
            battery_capacity,
        )
    }

    pub fn n_sources(&self) -> usize {
        self.arrival_rates.len()
    }

    pub fn total_rate(&self) -> f64 {
        self.arrival_rates.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.arrival_rates.is_empty() {
            return Err(AoiError::InvalidParams("at least one source is required".into()));
        }
        for (i, &rate) in self.arrival_rates.iter().enumerate() {
            check_rate(&format!("arrival rate of source {}", i + 1), rate)?;
        }
        check_rate("energy rate", self.energy_rate)?;
        check_rate("service rate", self.service_rate)?;
        if self.battery_capacity == 0 {
            return Err(AoiError::InvalidParams("battery capacity must be at least 1".into()));
        }
        Ok(())
    }

    pub fn check_source(&self, source: usize) -> Result<()> {
        if source == 0 || source > self.n_sources() {
            return Err(AoiError::InvalidSource {
                index: source,
                n_sources: self.n_sources(),
            });
        }
        Ok(())
    }

    /// Derived quantities for `source` (1-based).
    pub fn derive(&self, source: usize) -> Result<DerivedRates> {
        self.validate()?;
        self.check_source(source)?;
        let total_rate = self.total_rate();
        let source_rate = self.arrival_rates[source - 1];
        // Summed directly rather than as `total - source` so a lone source
        // gets an exact zero.
        let other_rate: f64 = self
            .arrival_rates
            .iter()
            .enumerate()
            .filter(|&(i, _)| i + 1 != source)
            .map(|(_, r)| r)
            .sum();
        let mu = self.service_rate;
        Ok(DerivedRates {
            source,
            total_rate,
            source_rate,
            other_rate,
            energy_rate: self.energy_rate,
            service_rate: mu,
            server_utilization: total_rate / mu,
            source_utilization: source_rate / mu,
            other_utilization: other_rate / mu,
            energy_utilization: self.energy_rate / mu,
            battery_capacity: self.battery_capacity,
        })
    }

    /// Same system with every rate multiplied by `factor`.
    pub fn time_scaled(&self, factor: f64) -> Self {
        Self {
            arrival_rates: self.arrival_rates.iter().map(|r| r * factor).collect(),
            energy_rate: self.energy_rate * factor,
            service_rate: self.service_rate * factor,
            battery_capacity: self.battery_capacity,
        }
    }
}

fn check_rate(what: &str, rate: f64) -> Result<()> {
    if !rate.is_finite() || rate <= 0.0 {
        return Err(AoiError::InvalidParams(format!(
            "{what} must be finite and positive, got {rate}"
        )));
    }
    Ok(())
}

/// Relative tolerance of the `ρ = β` branch switch.
pub const EQUAL_UTILIZATION_RTOL: f64 = 1e-9;

/// Whether `ρ` and `β` are close enough to use the `ρ = β` branch of the
/// closed forms.
pub fn utilizations_equal(rho: f64, beta: f64) -> bool {
    (rho - beta).abs() <= EQUAL_UTILIZATION_RTOL * rho.max(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derive_two_sources() {
        let p = SystemParams::new(vec![0.6, 0.4], 1.5, 1.0, 2).unwrap();
        let d = p.derive(1).unwrap();
        assert_relative_eq!(d.total_rate, 1.0);
        assert_relative_eq!(d.server_utilization, 1.0);
        assert_relative_eq!(d.source_utilization, 0.6);
        assert_relative_eq!(d.other_utilization, 0.4);
        assert_relative_eq!(d.energy_utilization, 1.5);
    }

    #[test]
    fn derive_single_source_has_no_competition() {
        let p = SystemParams::new(vec![1.0], 1.0, 1.0, 1).unwrap();
        let d = p.derive(1).unwrap();
        assert_eq!(d.other_utilization, 0.0);
        assert_eq!(d.server_utilization, 1.0);
        assert_eq!(d.source_utilization, 1.0);
        assert_eq!(d.energy_utilization, 1.0);
    }

    #[test]
    fn derive_middle_source() {
        let p = SystemParams::new(vec![1.0, 1.0, 1.0], 2.0, 2.0, 1).unwrap();
        let d = p.derive(2).unwrap();
        assert_relative_eq!(d.server_utilization, 1.5);
        assert_relative_eq!(d.source_utilization, 0.5);
        assert_relative_eq!(d.other_utilization, 1.0);
        assert_relative_eq!(d.energy_utilization, 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SystemParams::new(vec![], 1.0, 1.0, 1).is_err());
        assert!(SystemParams::new(vec![1.0, 0.0], 1.0, 1.0, 1).is_err());
        assert!(SystemParams::new(vec![1.0], f64::NAN, 1.0, 1).is_err());
        assert!(SystemParams::new(vec![1.0], 1.0, -1.0, 1).is_err());
        assert!(SystemParams::new(vec![1.0], 1.0, 1.0, 0).is_err());
        let p = SystemParams::new(vec![1.0, 2.0], 1.0, 1.0, 1).unwrap();
        assert!(matches!(p.derive(0), Err(AoiError::InvalidSource { .. })));
        assert!(matches!(p.derive(3), Err(AoiError::InvalidSource { .. })));
    }

    #[test]
    fn json_round_trip() {
        let p = SystemParams::new(vec![0.5, 0.25], 1.5, 2.0, 3).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: SystemParams = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn utilizations_add_up(rates in prop::collection::vec(0.01f64..10.0, 1..6),
                                   mu in 0.1f64..5.0, pick in 0usize..6) {
                let p = SystemParams::new(rates.clone(), 1.0, mu, 2).unwrap();
                let source = pick % rates.len() + 1;
                let d = p.derive(source).unwrap();
                let sum = d.source_utilization + d.other_utilization;
                prop_assert!((sum - d.server_utilization).abs() <= 1e-12 * d.server_utilization);
                prop_assert_eq!(d.other_utilization == 0.0, rates.len() == 1);
            }

            #[test]
            fn derive_is_permutation_symmetric(rates in prop::collection::vec(0.01f64..10.0, 2..6),
                                                rot in 0usize..6, pick in 0usize..6) {
                let n = rates.len();
                let rot = rot % n;
                let source = pick % n;
                let mut rotated = rates.clone();
                rotated.rotate_left(rot);
                let a = SystemParams::new(rates, 1.3, 1.0, 2).unwrap().derive(source + 1).unwrap();
                let moved = (source + n - rot) % n;
                let b = SystemParams::new(rotated, 1.3, 1.0, 2).unwrap().derive(moved + 1).unwrap();
                prop_assert_eq!(a.source_rate, b.source_rate);
                prop_assert!((a.other_rate - b.other_rate).abs() <= 1e-12 * a.total_rate);
                prop_assert!((a.total_rate - b.total_rate).abs() <= 1e-12 * a.total_rate);
            }
        }
    }
}

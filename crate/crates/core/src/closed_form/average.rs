use serde::{Deserialize, Serialize};

use super::recursion::Recursion;
use super::{idle_levels, is_single_source};
use crate::chains::{energy_ratio_sum, Discipline};
use crate::error::Result;
use crate::linalg::{kahan_sum, KahanSum};
use crate::params::{utilizations_equal, DerivedRates, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GapPair {
    WpPs,
    WpSa,
    SaPs,
}

/// Series pieces shared by the averages and the gaps.
struct Terms {
    idle: Vec<f64>,
    idle_sum: f64,
    weights: Vec<f64>,
}

impl Terms {
    fn new(d: DerivedRates) -> Self {
        let idle = idle_levels(&d);
        let idle_sum = kahan_sum(idle[1..].iter().copied());
        let weights = Recursion::new(&d, 0.0).weights();
        Self {
            idle,
            idle_sum,
            weights,
        }
    }

    /// `Σ_{j=0}^{B} Iⱼ·ωⱼ`
    fn idle_series(&self) -> f64 {
        kahan_sum(self.idle.iter().zip(&self.weights).map(|(i, w)| i * w))
    }

    /// `Σ_{j=0}^{B−1} I_{j+1}·ωⱼ`
    fn busy_series(&self) -> f64 {
        kahan_sum(self.idle[1..].iter().zip(&self.weights).map(|(i, w)| i * w))
    }
}

/// Average age of `source` from the general series, without single-source
/// dispatch. Finite even at `ρ₋ᵢ = 0`.
pub(crate) fn avg_series(discipline: Discipline, d: DerivedRates) -> f64 {
    let t = Terms::new(d);
    let (mu, rho, r1, rm) = (
        d.service_rate,
        d.server_utilization,
        d.source_utilization,
        d.other_utilization,
    );
    let mut acc = KahanSum::new();
    match discipline {
        Discipline::Wp => {
            acc.add((1.0 + rho) / (mu * r1));
            acc.add(rho * t.idle_sum / mu);
            acc.add(t.idle_series());
            acc.add(rho * t.busy_series());
        }
        Discipline::Ps => {
            acc.add((1.0 + rho) / (mu * r1));
            acc.add(t.idle_series());
            acc.add((1.0 + rm) / (1.0 + rho) * rho * t.busy_series());
        }
        Discipline::Sa => {
            acc.add((1.0 + rho) / (mu * r1 * (1.0 + r1)));
            acc.add((1.0 + rho) * (1.0 - r1 * t.idle_sum) / (mu * (1.0 + r1)));
            acc.add(rho * t.idle_sum / mu);
            acc.add(t.idle_series());
            acc.add((r1 / (1.0 + r1) + rm) * t.busy_series());
        }
    }
    acc.value()
}

/// Average age of a lone source.
pub(crate) fn avg_single(discipline: Discipline, d: &DerivedRates) -> f64 {
    let (mu, rho, beta) = (d.service_rate, d.server_utilization, d.energy_utilization);
    let b = d.battery_capacity as f64;
    let bi = d.battery_capacity as i32 + 2;
    match discipline {
        Discipline::Wp => {
            if utilizations_equal(rho, beta) {
                (2.0 * b * rho * rho + 2.0 * (1.0 + b) * rho + b + 2.0) / (mu * (b * rho * rho + (1.0 + b) * rho))
            } else {
                let (pb, pr) = (beta.powi(bi), rho.powi(bi));
                (pb * (2.0 * rho * rho + 2.0 * rho + 1.0) - pr * (2.0 * beta * beta + 2.0 * beta + 1.0))
                    / (mu * (pb * (rho * rho + rho) - pr * (beta * beta + beta)))
            }
        }
        Discipline::Ps | Discipline::Sa => {
            if utilizations_equal(rho, beta) {
                (b * rho.powi(3) + (3.0 * b + 1.0) * rho * rho + (3.0 * b + 4.0) * rho + b + 2.0)
                    / (mu * rho * (1.0 + rho) * (rho * b + b + 1.0))
            } else {
                let (pb, pr) = (beta.powi(bi), rho.powi(bi));
                (pb * (1.0 + rho).powi(3) - pr * ((beta * beta + beta) * (rho + 2.0) + 1.0 + rho))
                    / (mu * (1.0 + rho) * (pb * (rho * rho + rho) - pr * (beta * beta + beta)))
            }
        }
    }
}

/// Average age of `source` under `discipline`.
pub fn avg_aoi_closed(discipline: Discipline, params: &SystemParams, source: usize) -> Result<f64> {
    let d = params.derive(source)?;
    if is_single_source(&d) {
        return Ok(avg_single(discipline, &d));
    }
    Ok(avg_series(discipline, d))
}

/// Average age with unlimited energy (`β → ∞`); the energy rate is ignored.
pub fn avg_aoi_limit(discipline: Discipline, params: &SystemParams, source: usize) -> Result<f64> {
    let d = params.derive(source)?;
    let (mu, rho, r1, rm) = (
        d.service_rate,
        d.server_utilization,
        d.source_utilization,
        d.other_utilization,
    );
    let base = (1.0 + rho) / (mu * r1);
    Ok(match discipline {
        Discipline::Wp => base + rho / (mu * (1.0 + rho)),
        Discipline::Ps => base,
        Discipline::Sa => base + rm / (mu * (1.0 + rho) * (1.0 + r1)),
    })
}

/// Difference between the average ages of two disciplines, evaluated from
/// its own expression rather than by subtraction.
pub fn avg_gap(pair: GapPair, params: &SystemParams, source: usize) -> Result<f64> {
    let d = params.derive(source)?;
    let t = Terms::new(d);
    let (mu, rho, beta, r1, rm) = (
        d.service_rate,
        d.server_utilization,
        d.energy_utilization,
        d.source_utilization,
        d.other_utilization,
    );
    let ratio_sum = energy_ratio_sum(rho, beta, d.battery_capacity);
    let occupied = 1.0 + (1.0 + rho) * ratio_sum;
    Ok(match pair {
        GapPair::WpPs => rho * t.idle_sum / mu + r1 / (1.0 + rho) * rho * t.busy_series(),
        GapPair::WpSa => {
            r1 * (1.0 + rho) * ratio_sum / (mu * (1.0 + r1) * occupied) + r1 * r1 / (1.0 + r1) * t.busy_series()
        }
        GapPair::SaPs => {
            rm * ratio_sum / (mu * (1.0 + r1) * occupied) + r1 * rm / ((1.0 + r1) * (1.0 + rho)) * t.busy_series()
        }
    })
}

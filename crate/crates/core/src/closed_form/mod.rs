//! Closed-form average age, MGF and B = 2 moments for the three disciplines.
//!
//! Every evaluator takes the source of interest explicitly. When the other
//! sources carry no load (`ρ₋ᵢ` below [`SINGLE_SOURCE_THRESHOLD`]) the
//! evaluators switch to the dedicated single-source expressions.

mod average;
mod b2;
mod mgf;
mod recursion;

use serde::Serialize;

pub use average::{avg_aoi_closed, avg_aoi_limit, avg_gap, GapPair};
pub use b2::{moments_b2, CoefficientSet};
pub use mgf::{mgf_closed, mgf_domain_bound_closed, ClosedMgf};
pub use recursion::{c_constants, CConstants, CVariant, SINGLE_SOURCE_THRESHOLD};

use crate::chains::{empty_state_probability, Discipline};
use crate::error::Result;
use crate::params::{utilizations_equal, DerivedRates, SystemParams};

/// Per-source summary produced by the analysis front end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AoiReport {
    pub discipline: Discipline,
    pub source: usize,
    pub mean: f64,
    pub second_moment: f64,
    pub std: f64,
    /// `(s̄, M(s̄))` pairs.
    pub mgf_samples: Vec<(f64, f64)>,
    /// Normalized MGF convergence bound `s̄₀`.
    pub domain_bound: f64,
}

/// `θ = Σ_{k=1}^{B} (β/ρ)ᵏ` written in closed form.
pub fn theta(params: &SystemParams) -> Result<f64> {
    let d = params.derive(1)?;
    Ok(theta_of(d.server_utilization, d.energy_utilization, d.battery_capacity))
}

pub(crate) fn theta_of(rho: f64, beta: f64, b: usize) -> f64 {
    if utilizations_equal(rho, beta) {
        return b as f64;
    }
    let bi = b as i32;
    beta * (beta.powi(bi) - rho.powi(bi)) / (rho.powi(bi) * (beta - rho))
}

/// Idle-state masses `Iₖ = (β/ρ)ᵏ·π̄₁` for `k = 0..=B`.
pub(crate) fn idle_levels(d: &DerivedRates) -> Vec<f64> {
    let (rho, beta, b) = (d.server_utilization, d.energy_utilization, d.battery_capacity);
    let mut level = empty_state_probability(rho, beta, b);
    let mut out = Vec::with_capacity(b + 1);
    out.push(level);
    for _ in 0..b {
        level *= beta / rho;
        out.push(level);
    }
    out
}

pub(crate) fn is_single_source(d: &DerivedRates) -> bool {
    d.other_utilization < SINGLE_SOURCE_THRESHOLD
}

use super::recursion::Recursion;
use super::{idle_levels, is_single_source, theta_of};
use crate::chains::{empty_state_probability, Discipline};
use crate::error::{AoiError, Result};
use crate::linalg::kahan_sum;
use crate::params::{DerivedRates, SystemParams};

const SCAN_STEPS: usize = 2000;

/// Closed-form MGF of one source's age, with its convergence bound computed
/// once. Arguments are normalized, `s̄ = s/μ`.
#[derive(Debug, Clone)]
pub struct ClosedMgf {
    discipline: Discipline,
    rates: DerivedRates,
    idle: Vec<f64>,
    bound: f64,
}

impl ClosedMgf {
    pub fn new(discipline: Discipline, params: &SystemParams, source: usize) -> Result<Self> {
        let rates = params.derive(source)?;
        let bound = bound_of(discipline, &rates);
        Ok(Self {
            discipline,
            rates,
            idle: idle_levels(&rates),
            bound,
        })
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eval(&self, s_bar: f64) -> Result<f64> {
        if s_bar >= self.bound {
            return Err(AoiError::OutsideConvergence {
                s: s_bar,
                bound: self.bound,
            });
        }
        let m = if is_single_source(&self.rates) {
            single(self.discipline, &self.rates, s_bar)
        } else {
            self.series(s_bar)
        };
        if !m.is_finite() {
            return Err(AoiError::NonFinite(format!("MGF at s = {s_bar}")));
        }
        Ok(m)
    }

    /// General expression without single-source dispatch.
    pub(crate) fn series(&self, s_bar: f64) -> f64 {
        let d = &self.rates;
        let (mu, rho, r1, rm) = (
            d.service_rate,
            d.server_utilization,
            d.source_utilization,
            d.other_utilization,
        );
        let weights = Recursion::new(d, s_bar).weights();
        let busy = kahan_sum(self.idle[1..].iter().zip(&weights).map(|(i, w)| i * w));
        let idle_sum = kahan_sum(self.idle[1..].iter().copied());
        let quad = (1.0 - s_bar) * (rho - s_bar) - rm;
        match self.discipline {
            Discipline::Wp => {
                let v = r1 * mu / (1.0 - s_bar) * busy;
                (r1 * (1.0 + rho - s_bar) * idle_sum + v * r1 * (1.0 - s_bar)) / ((1.0 - s_bar) * quad)
            }
            Discipline::Ps => {
                let v = mu * r1 * (1.0 + rho) / (1.0 + rho - s_bar) * busy;
                r1 * (1.0 - self.idle[0] + v) / quad
            }
            Discipline::Sa => {
                let v = mu * r1 * (1.0 + r1) / (1.0 + r1 - s_bar) * busy;
                let served = (1.0 + r1) * idle_sum;
                r1 * ((1.0 + rho - s_bar) * served + (1.0 + r1 - s_bar) * v) / ((1.0 + r1 - s_bar) * quad)
            }
        }
    }
}

pub fn mgf_closed(discipline: Discipline, params: &SystemParams, source: usize, s_bar: f64) -> Result<f64> {
    ClosedMgf::new(discipline, params, source)?.eval(s_bar)
}

/// Normalized convergence bound `s̄₀` of the closed-form MGF.
pub fn mgf_domain_bound_closed(discipline: Discipline, params: &SystemParams, source: usize) -> Result<f64> {
    Ok(bound_of(discipline, &params.derive(source)?))
}

fn single(discipline: Discipline, d: &DerivedRates, s: f64) -> f64 {
    let (rho, beta, b) = (d.server_utilization, d.energy_utilization, d.battery_capacity);
    let theta = theta_of(rho, beta, b);
    let p1 = empty_state_probability(rho, beta, b);
    let bracket = s * s * theta - s * theta * (1.0 + rho + beta) + beta * (1.0 + theta + theta * rho);
    match discipline {
        Discipline::Wp => rho * p1 * bracket / ((1.0 - s).powi(2) * (rho - s) * (beta - s)),
        Discipline::Ps | Discipline::Sa => {
            rho * (1.0 + rho) * p1 * bracket / ((1.0 - s) * (rho - s) * (1.0 + rho - s) * (beta - s))
        }
    }
}

/// Smallest positive singularity: the explicit denominator factors, then the
/// first sign loss of the `cˢ` recursion below them.
fn bound_of(discipline: Discipline, d: &DerivedRates) -> f64 {
    let (rho, beta, r1, rm) = (
        d.server_utilization,
        d.energy_utilization,
        d.source_utilization,
        d.other_utilization,
    );
    if is_single_source(d) {
        return 1.0f64.min(rho).min(beta);
    }
    let disc = (1.0 - rho).powi(2) + 4.0 * rm;
    let root = 2.0 * r1 / ((1.0 + rho) + disc.sqrt());
    let mut hi = root.min(1.0);
    match discipline {
        Discipline::Wp => {}
        Discipline::Ps => hi = hi.min(1.0 + rho),
        Discipline::Sa => hi = hi.min(1.0 + r1),
    }
    let ok = |s: f64| Recursion::new(d, s).positive();
    let mut lo = 0.0;
    let mut found = false;
    for k in 1..=SCAN_STEPS {
        let x = hi * k as f64 / SCAN_STEPS as f64;
        if !ok(x) {
            hi = x;
            found = true;
            break;
        }
        lo = x;
    }
    if found {
        while hi - lo > 1e-14 * hi {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_source_anchor() {
        let p = SystemParams::new(vec![1.0], 1.0, 1.0, 1).unwrap();
        let m = mgf_closed(Discipline::Wp, &p, 1, 0.5).unwrap();
        assert!((m - 28.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            mgf_closed(Discipline::Wp, &p, 1, 1.0),
            Err(AoiError::OutsideConvergence { .. })
        ));
    }

    #[test]
    fn normalized_at_zero() {
        let p = SystemParams::new(vec![0.5, 0.2, 0.8], 1.5, 2.0, 3).unwrap();
        for disc in Discipline::ALL {
            for s in 1..=3 {
                let m = mgf_closed(disc, &p, s, 0.0).unwrap();
                assert!((m - 1.0).abs() < 1e-12, "{disc} {s}: {m}");
            }
        }
    }

    #[test]
    fn series_reduces_to_single_source_forms() {
        for (rho, beta, b) in [(1.0, 1.0, 2), (0.5, 1.5, 3), (3.0, 0.5, 1)] {
            let p = SystemParams::new(vec![rho], beta, 1.0, b).unwrap();
            for disc in Discipline::ALL {
                let m = ClosedMgf::new(disc, &p, 1).unwrap();
                for s in [-0.3, 0.1, 0.25] {
                    let a = m.series(s);
                    let b = single(disc, &m.rates, s);
                    assert!((a - b).abs() < 1e-11 * b, "{disc} {s}: {a} vs {b}");
                }
            }
        }
    }
}

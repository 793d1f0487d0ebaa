//! Explicit first and second moments for a battery of two packets.
//!
//! The polynomial coefficient sets are transcribed as published. Two of the
//! `ρ = β` first-moment branches disagree with the exact moments of the SHS
//! engine; [`CoefficientSet::Amended`] carries the corrected numerators:
//!
//! * WP: the `ρ²(4ρ⁴ + 12ρ + 7)` term is `ρ²(4ρ² + 12ρ + 7)`. The two agree at
//!   `ρ = 1`, so single-source spot checks at `ρ = β = 1` cannot see it.
//! * SA: the numerator is short by `2ρ₁ρ`. At `ρ = ρ₁ = β = 1` the published
//!   value is `44/20` while the reduction to PS requires `46/20`.

use serde::{Deserialize, Serialize};

use crate::chains::Discipline;
use crate::error::{AoiError, Result};
use crate::params::{utilizations_equal, SystemParams};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientSet {
    /// Coefficients exactly as published.
    Verbatim,
    /// Published coefficients with the two `ρ = β` first-moment corrections.
    #[default]
    Amended,
}

/// `(Δ₁, Δ₂)` of `source` when the battery holds two packets.
pub fn moments_b2(
    discipline: Discipline,
    params: &SystemParams,
    source: usize,
    set: CoefficientSet,
) -> Result<(f64, f64)> {
    let d = params.derive(source)?;
    if d.battery_capacity != 2 {
        return Err(AoiError::Precondition(format!(
            "explicit moments need a battery of 2, got {}",
            d.battery_capacity
        )));
    }
    let (mu, r1, rm, beta) = (
        d.service_rate,
        d.source_utilization,
        d.other_utilization,
        d.energy_utilization,
    );
    let rho = d.server_utilization;
    let equal = utilizations_equal(rho, beta);
    let (m1, m2) = match discipline {
        Discipline::Wp => wp(r1, rm, rho, beta, equal, set),
        Discipline::Ps => ps(r1, rm, rho, beta, equal),
        Discipline::Sa => sa(r1, rm, rho, beta, equal, set),
    };
    Ok((m1 / mu, m2 / (mu * mu)))
}

fn poly(x: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn common_denominator(rho: f64, beta: f64) -> f64 {
    rho * rho + beta * (1.0 + rho) * (beta + rho)
}

fn wp(r1: f64, rm: f64, rho: f64, beta: f64, equal: bool, set: CoefficientSet) -> (f64, f64) {
    let r = rho;
    if equal {
        let inner = match set {
            CoefficientSet::Verbatim => 4.0 * r.powi(4) + 12.0 * r + 7.0,
            CoefficientSet::Amended => 4.0 * r * r + 12.0 * r + 7.0,
        };
        let m1 = (r1 * r1 + 4.0 * r1 * r.powi(3) + 2.0 * rm * r + r * r * inner) / (2.0 * r1 * r * r * (3.0 + 2.0 * r));
        let z0 = r.powi(3) * (8.0 * r.powi(3) + 36.0 * r * r + 28.0 * r + 15.0);
        let m2 = (2.0 * r1.powi(3) * (1.0 + r)
            + r1 * r1 * r * (8.0 * r.powi(3) + 2.0 * r + 3.0)
            + 8.0 * r1 * r.powi(5)
            + 2.0 * rm * r * r * (6.0 + 13.0 * r)
            + z0)
            / (2.0 * r1 * r1 * r.powi(3) * (3.0 + 2.0 * r));
        return (m1, m2);
    }
    let g = [
        r.powi(5),
        r.powi(4) * (3.0 + 2.0 * r),
        r1 * r1 * r + r1 * r * r * (r * r - 2.0) + r.powi(3) * (1.0 + r) * (5.0 + r),
        r1 * r1 + r1 * r * (3.0 * r * r - 2.0) + r * r * (1.0 + r) * (5.0 + 3.0 * r),
        3.0 * r1 * r * r + 3.0 * r * (1.0 + r).powi(2),
        r1 * r + (1.0 + r).powi(2),
    ];
    let den = common_denominator(r, beta);
    let m1 = poly(beta, &g) / (r1 * beta * (beta + r).powi(2) * den);
    let p = [
        r.powi(7),
        r.powi(6) * (4.0 + 3.0 * r) - r1 * r.powi(6),
        2.0 * r1 * r1 * r.powi(3) - 4.0 * r1 * r.powi(4) * (1.0 + r) + 3.0 * r.powi(5) * (1.0 + r) * (3.0 + r),
        r1.powi(3) * r * (2.0 + r)
            + r1 * r1 * r * r * (r.powi(3) + r + 1.0)
            + r1 * r.powi(3) * (r.powi(3) - 12.0 * r - 8.0)
            + r.powi(4) * (r.powi(3) + 12.0 * r * r + 24.0 * r + 13.0),
        2.0 * r1.powi(3) * (1.0 + r)
            + r1 * r1 * r * (4.0 * r.powi(3) + 2.0 * r + 1.0)
            + 2.0 * r1 * r * r * (2.0 * r.powi(3) - 9.0 * r - 4.0)
            + r.powi(3) * (1.0 + r).powi(2) * (13.0 + 4.0 * r),
        r1.powi(3)
            + r1 * r1 * (6.0 * r.powi(3) + r + 2.0)
            + 2.0 * r1 * r * (3.0 * r.powi(3) - 6.0 * r - 2.0)
            + 3.0 * r * r * (1.0 + r).powi(2) * (3.0 + 2.0 * r),
        4.0 * r1 * r1 * r * r + 4.0 * r1 * r * (r * r - 1.0) + 4.0 * r * (1.0 + r).powi(3),
        r1 * r1 * r + r1 * (r * r - 1.0) + (1.0 + r).powi(3),
    ];
    let m2 = 2.0 * poly(beta, &p) / (r1 * r1 * beta * beta * (beta + r).powi(3) * den);
    (m1, m2)
}

fn ps(r1: f64, rm: f64, rho: f64, beta: f64, equal: bool) -> (f64, f64) {
    let r = rho;
    if equal {
        let m1 = (r1 * r1 * (1.0 + r)
            + 2.0 * rm * r * (r * r + r + 1.0)
            + r * r * (4.0 * r.powi(3) + 14.0 * r * r + 19.0 * r + 7.0))
            / (2.0 * r1 * r * r * (1.0 + r) * (3.0 + 2.0 * r));
        let z1 = 2.0 * r * r * (1.0 + r) * (8.0 * r.powi(3) + 22.0 * r * r + 19.0 * r + 6.0);
        let z0 = r.powi(3) * (1.0 + r) * (3.0 + 2.0 * r) * (4.0 * r.powi(3) + 8.0 * r * r + 11.0 * r + 5.0);
        let m2 = (2.0 * r1.powi(3) * (1.0 + r) * (1.0 + 2.0 * r)
            + r1 * r1 * r * (2.0 * r.powi(3) + 11.0 * r * r + 8.0 * r + 3.0)
            + rm * z1
            + z0)
            / (2.0 * r1 * r1 * r.powi(3) * (1.0 + r).powi(2) * (3.0 + 2.0 * r));
        return (m1, m2);
    }
    let g = [
        r.powi(5) * (1.0 + r),
        r.powi(4) * (1.0 + r) * (3.0 + 2.0 * r) - r1 * r.powi(5),
        r1 * r1 * r * (1.0 + r) - 2.0 * r1 * r * r * (r * r + r + 1.0) + r.powi(3) * (1.0 + r).powi(2) * (5.0 + r),
        r1 * r1 * (1.0 + r) - r1 * r * (r * r + 2.0 * r + 2.0) + r * r * (1.0 + r).powi(2) * (5.0 + 3.0 * r),
        3.0 * r * (1.0 + r).powi(3),
        (1.0 + r).powi(3),
    ];
    let den = common_denominator(r, beta);
    let m1 = poly(beta, &g) / (r1 * beta * (1.0 + r) * (beta + r).powi(2) * den);
    let p = [
        r.powi(7) * (1.0 + r).powi(2),
        r.powi(6) * (1.0 + r).powi(2) * (4.0 + 3.0 * r) - r1 * r.powi(6) * (1.0 + r) * (1.0 + 2.0 * r),
        r1 * r1 * r.powi(3) * (-r.powi(3) + 2.0 * r * r + 4.0 * r + 2.0)
            - 2.0 * r1 * r.powi(4) * (1.0 + r) * (r.powi(3) + 4.0 * r * r + 4.0 * r + 2.0)
            + 3.0 * r.powi(5) * (1.0 + r).powi(3) * (3.0 + r),
        r1.powi(3) * r * (1.0 + r) * (2.0 + 3.0 * r) + r1 * r1 * r * r * (5.0 * r * r + 3.0 * r + 1.0)
            - r1 * r.powi(3) * (1.0 + r) * (7.0 * r.powi(3) + 20.0 * r * r + 20.0 * r + 8.0)
            + r.powi(4) * (1.0 + r).powi(2) * (r.powi(3) + 12.0 * r * r + 24.0 * r + 13.0),
        2.0 * r1.powi(3) * (1.0 + r) * (1.0 + 2.0 * r) + r1 * r1 * r * (3.0 * r.powi(3) + 9.0 * r * r + 4.0 * r + 1.0)
            - 2.0 * r1 * r * r * (1.0 + r) * (5.0 * r.powi(3) + 14.0 * r * r + 13.0 * r + 4.0)
            + r.powi(3) * (1.0 + r).powi(2) * (4.0 * r.powi(3) + 21.0 * r * r + 30.0 * r + 13.0),
        r1.powi(3) * (1.0 + r) + r1 * r1 * (2.0 * r.powi(3) + 6.0 * r * r + 5.0 * r + 2.0)
            - 4.0 * r1 * r * (1.0 + r) * (2.0 * r.powi(3) + 5.0 * r * r + 4.0 * r + 1.0)
            + 3.0 * r * r * (1.0 + r).powi(4) * (3.0 + 2.0 * r),
        4.0 * r * (1.0 + r).powi(5) - 4.0 * r1 * r * (1.0 + r).powi(3),
        (1.0 + r).powi(5) - r1 * (1.0 + r).powi(3),
    ];
    let m2 = 2.0 * poly(beta, &p) / (r1 * r1 * beta * beta * (beta + r).powi(3) * (1.0 + r).powi(2) * den);
    (m1, m2)
}

fn sa(r1: f64, rm: f64, rho: f64, beta: f64, equal: bool, set: CoefficientSet) -> (f64, f64) {
    let r = rho;
    if equal {
        let missing = match set {
            CoefficientSet::Verbatim => 0.0,
            CoefficientSet::Amended => 2.0 * r1 * r,
        };
        let m1 = (r1.powi(3)
            + r1 * r1
            + r1 * r * r * (4.0 * r * r + 10.0 * r + 7.0)
            + r * r * (4.0 * r * r + 12.0 * r + 5.0)
            + 2.0 * rm * r * (r1 * (3.0 * r + 1.0) + 2.0)
            + missing)
            / (2.0 * r1 * r * r * (1.0 + r1) * (3.0 + 2.0 * r));
        let z = [
            r.powi(3) * (8.0 * r.powi(3) + 36.0 * r * r + 54.0 * r + 15.0),
            r.powi(3) * (16.0 * r.powi(3) + 62.0 * r * r + 61.0 * r + 6.0),
            r * (8.0 * r.powi(5) + 20.0 * r.powi(4) + 3.0),
            2.0 * (4.0 * r + 1.0),
            6.0 * r * r + 5.0 * r + 4.0,
            2.0,
        ];
        let num = poly(r1, &z)
            + rm * r1 * r1 * r * r * (24.0 * r * r + 74.0 * r + 8.0)
            + rm * rm * r1 * r * r * (18.0 * r + 4.0)
            + rm * r1 * r * r * (43.0 * r + 22.0)
            + rm * 12.0 * r * r;
        let m2 = num / (2.0 * r1 * r1 * r.powi(3) * (1.0 + r1).powi(2) * (3.0 + 2.0 * r));
        return (m1, m2);
    }
    let g = [
        r.powi(5) * (1.0 + r1),
        -r1 * r1 * r.powi(4) + r.powi(4) * (2.0 * r + 3.0) * (1.0 + r1),
        r1.powi(3) * r - r1 * r1 * r * (1.0 + r) * (3.0 * r - 1.0)
            + r1 * r * r * (r.powi(3) + 7.0 * r * r + 5.0 * r - 2.0)
            + r.powi(3) * (1.0 + r) * (5.0 + r),
        r1.powi(3)
            + r1 * r1 * (-4.0 * r * r - 2.0 * r + 1.0)
            + r1 * r * (3.0 * r.powi(3) + 11.0 * r * r + 5.0 * r - 2.0)
            + r * r * (1.0 + r) * (5.0 + 3.0 * r),
        -3.0 * r1 * r1 * r + 3.0 * r1 * r * (r * r + 3.0 * r + 1.0) + 3.0 * r * (1.0 + r).powi(2),
        -r1 * r1 + r1 * (r * r + 3.0 * r + 1.0) + (1.0 + r).powi(2),
    ];
    let den = common_denominator(r, beta);
    let m1 = poly(beta, &g) / (r1 * beta * (1.0 + r1) * (beta + r).powi(2) * den);
    let p = [
        r.powi(7) * (1.0 + r1).powi(2),
        -2.0 * r1.powi(3) * r.powi(6)
            + r1 * r1 * r.powi(6) * (1.0 + 3.0 * r)
            + r1 * r.powi(6) * (7.0 + 6.0 * r)
            + r.powi(6) * (4.0 + 3.0 * r),
        2.0 * r1.powi(4) * r.powi(3) - r1.powi(3) * r.powi(3) * (2.0 * r.powi(3) + 9.0 * r * r + 4.0 * r - 4.0)
            + r1 * r1 * r.powi(3) * (3.0 * r.powi(4) + 10.0 * r.powi(3) - 3.0 * r * r - 8.0 * r + 2.0)
            + 2.0 * r1 * r.powi(4) * (3.0 * r.powi(3) + 12.0 * r * r + 7.0 * r - 2.0)
            + 3.0 * r.powi(5) * (1.0 + r) * (3.0 + r),
        2.0 * r1.powi(5) * r + r1.powi(4) * r * (3.0 * r * r + 2.0 * r + 4.0)
            - r1.powi(3) * r * (8.0 * r.powi(4) + 24.0 * r.powi(3) + 4.0 * r * r - 3.0 * r - 2.0)
            + r1 * r1 * r * r * (r.powi(5) + 13.0 * r.powi(4) + 17.0 * r.powi(3) - 19.0 * r * r - 15.0 * r + 1.0)
            + r1 * r.powi(3) * (2.0 * r.powi(4) + 25.0 * r.powi(3) + 48.0 * r * r + 14.0 * r - 8.0)
            + r.powi(4) * (1.0 + r) * (r * r + 11.0 * r + 13.0),
        2.0 * r1.powi(5) + r1.powi(4) * (6.0 * r * r + 3.0 * r + 4.0)
            - r1.powi(3) * (14.0 * r.powi(4) + 35.0 * r.powi(3) - 4.0 * r - 2.0)
            + r1 * r1 * r * (4.0 * r.powi(5) + 25.0 * r.powi(4) + 20.0 * r.powi(3) - 33.0 * r * r - 14.0 * r + 1.0)
            + 2.0 * r1 * r * r * (4.0 * r.powi(4) + 23.0 * r.powi(3) + 30.0 * r * r + 4.0 * r - 4.0)
            + r.powi(3) * (13.0 + 4.0 * r) * (1.0 + r).powi(2),
        3.0 * r1.powi(4) * (1.0 + r) - r1.powi(3) * (14.0 * r.powi(3) + 27.0 * r * r - 5.0)
            + r1 * r1 * (6.0 * r.powi(5) + 27.0 * r.powi(4) + 16.0 * r.powi(3) - 23.0 * r * r - 7.0 * r + 2.0)
            + 2.0 * r1 * r * (6.0 * r.powi(4) + 24.0 * r.powi(3) + 24.0 * r * r + 3.0 * r - 2.0)
            + 3.0 * r * r * (3.0 + 2.0 * r) * (1.0 + r).powi(2),
        -4.0 * r1.powi(3) * r * (3.0 + 2.0 * r)
            + 4.0 * r1 * r1 * r * (r.powi(3) + 4.0 * r * r + 2.0 * r - 2.0)
            + 4.0 * r1 * r * (1.0 + r) * (2.0 * r * r + 5.0 * r + 1.0)
            + 4.0 * r * (1.0 + r).powi(3),
        -r1.powi(3) * (3.0 + 2.0 * r)
            + r1 * r1 * (r.powi(3) + 4.0 * r * r + 2.0 * r - 2.0)
            + r1 * (1.0 + r) * (2.0 * r * r + 5.0 * r + 1.0)
            + (1.0 + r).powi(3),
    ];
    let m2 = 2.0 * poly(beta, &p) / (r1 * r1 * beta * beta * (beta + r).powi(3) * (1.0 + r1).powi(2) * den);
    (m1, m2)
}

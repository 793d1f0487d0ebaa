//! Backward recursions for the `c`, `c̄`, `cˢ` and `c̄ˢ` constants.
//!
//! The barred constants are the unbarred ones with a shifted index
//! (`c̄_h = c_{2(h+1)}`), so both are produced by the same recursion and only
//! the labelling differs.

use serde::Serialize;

use crate::error::{AoiError, Result};
use crate::params::{DerivedRates, SystemParams};

/// Below this `ρ₋ᵢ` a source is treated as the only one in the system.
pub const SINGLE_SOURCE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CVariant {
    /// `c₀, c₂, …, c_{2B}` of the WP and PS averages.
    C,
    /// `c̄₋₁, c̄₀, …, c̄_{B−1}` of the SA average.
    CBar,
    /// `cˢ₀, …, cˢ_{2B}` of the WP and PS MGFs.
    Cs,
    /// `c̄ˢ₋₁, …, c̄ˢ_{B−1}` of the SA MGF.
    CBarS,
}

impl CVariant {
    fn uses_s(&self) -> bool {
        matches!(self, CVariant::Cs | CVariant::CBarS)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CConstants {
    pub variant: CVariant,
    /// `B + 1` values in increasing index order (`c₀` or `c̄₋₁` first).
    pub values: Vec<f64>,
    /// Normalized exponent `s̄` for the `s` variants.
    pub s_bar: Option<f64>,
}

/// Recursion output in a form that stays finite for a lone source: the
/// lowest constant is kept as `d₀ = λ₋ᵢ·c₀`, which removes its `1/λ₋ᵢ`.
#[derive(Debug, Clone)]
pub(crate) struct Recursion {
    /// `c_{2h}` for `h = 1..=B`, at index `h − 1`.
    pub upper: Vec<f64>,
    pub d0: f64,
    /// `λ₋ᵢ/(1 − s̄)`.
    pub ratio: f64,
    pub one_minus_s: f64,
}

impl Recursion {
    pub fn new(d: &DerivedRates, s_bar: f64) -> Self {
        let b = d.battery_capacity;
        let (lam, lm, eta, mu) = (d.total_rate, d.other_rate, d.energy_rate, d.service_rate);
        let s = s_bar * mu;
        let mut upper = vec![0.0; b];
        upper[b - 1] = lam - s;
        for h in (1..b).rev() {
            upper[h - 1] = eta + lam - s - mu * eta * lm / (upper[h] * (mu - s));
        }
        let d0 = (mu - s) * (eta - s) / mu - eta * lm / upper[0];
        Self {
            upper,
            d0,
            ratio: lm / (1.0 - s_bar),
            one_minus_s: 1.0 - s_bar,
        }
    }

    /// `ωⱼ = (λ₋ᵢ/(1−s̄))^{j−1} / ∏_{h=0}^{j} cˢ_{2h}` for `j = 0..=B`, the
    /// weight shared by every series of the closed forms.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.upper.len() + 1);
        let mut acc = self.one_minus_s / self.d0;
        w.push(acc);
        for c in &self.upper {
            acc *= self.ratio / c;
            w.push(acc);
        }
        w
    }

    /// Whether every constant that appears in a denominator is positive.
    pub fn positive(&self) -> bool {
        self.d0 > 0.0 && self.upper.iter().all(|&c| c > 0.0)
    }
}

pub(crate) fn multi_source_rates(params: &SystemParams, source: usize) -> Result<DerivedRates> {
    let d = params.derive(source)?;
    if d.other_utilization < SINGLE_SOURCE_THRESHOLD {
        return Err(AoiError::SingleSource(
            "recursion undefined without competing sources; use the single-source branch".into(),
        ));
    }
    Ok(d)
}

pub fn c_constants(variant: CVariant, params: &SystemParams, source: usize, s_bar: Option<f64>) -> Result<CConstants> {
    let d = multi_source_rates(params, source)?;
    let s = match (variant.uses_s(), s_bar) {
        (true, Some(s)) => s,
        (true, None) => return Err(AoiError::Precondition(format!("{variant:?} needs an s value"))),
        (false, _) => 0.0,
    };
    let r = Recursion::new(&d, s);
    let mut values = vec![r.d0 / d.other_rate];
    values.extend(&r.upper);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AoiError::NonFinite(format!("{variant:?} constants")));
    }
    Ok(CConstants {
        variant,
        values,
        s_bar: variant.uses_s().then_some(s),
    })
}

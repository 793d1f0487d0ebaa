//! Reports built on top of the closed forms, the SHS engine and the
//! simulator.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chains::{build, steady_state_closed, Discipline};
use crate::closed_form::{avg_aoi_closed, avg_gap, moments_b2, AoiReport, ClosedMgf, CoefficientSet, GapPair};
use crate::error::{AoiError, Result};
use crate::params::SystemParams;
use crate::shs::{average_aoi, moment_from_mgf, MgfEvaluator, DEFAULT_DIFF_STEP};
use crate::sim::{replicate, EnergyCounts, SimConfig, TraceEvent, UpdateCounts};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Closed-form expressions.
    #[default]
    Closed,
    /// Generic SHS linear systems on the discipline's chain.
    Shs,
}

impl FromStr for Method {
    type Err = AoiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "closed" => Ok(Method::Closed),
            "shs" => Ok(Method::Shs),
            other => Err(AoiError::InvalidConfig(format!(
                "unknown method {other:?}, expected closed or shs"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Closed => "closed",
            Method::Shs => "shs",
        })
    }
}

/// Jain's fairness index `(ΣΔᵢ)² / (N·ΣΔᵢ²)`.
pub fn jfi(means: &[f64]) -> Result<f64> {
    if means.is_empty() {
        return Err(AoiError::Precondition("fairness index of an empty list".into()));
    }
    if let Some(bad) = means.iter().find(|&&m| !(m > 0.0 && m.is_finite())) {
        return Err(AoiError::Precondition(format!(
            "fairness index needs positive ages, got {bad}"
        )));
    }
    let sum: f64 = means.iter().sum();
    let sq: f64 = means.iter().map(|m| m * m).sum();
    Ok(sum * sum / (means.len() as f64 * sq))
}

/// A normalized MGF with its convergence bound, from either backend.
enum Mgf<'a> {
    Closed(ClosedMgf),
    Shs(MgfEvaluator<'a>, f64),
}

impl Mgf<'_> {
    fn bound(&self) -> f64 {
        match self {
            Mgf::Closed(m) => m.bound(),
            Mgf::Shs(m, mu) => m.bound() / mu,
        }
    }

    fn eval(&self, s_bar: f64) -> Result<f64> {
        match self {
            Mgf::Closed(m) => m.eval(s_bar),
            Mgf::Shs(m, mu) => m.eval(s_bar * mu).map_err(|e| match e {
                AoiError::OutsideConvergence { bound, .. } => AoiError::OutsideConvergence {
                    s: s_bar,
                    bound: bound / mu,
                },
                other => other,
            }),
        }
    }

    fn moment(&self, k: u32, mu: f64) -> Result<f64> {
        let h0 = DEFAULT_DIFF_STEP.min(self.bound() / 4.0);
        moment_from_mgf(|s| self.eval(s), k, mu, h0)
    }
}

/// Mean, second moment, MGF samples and convergence bound for one source.
///
/// With the closed method and a two-packet battery the second moment comes
/// from the explicit polynomials; otherwise it is differentiated from the
/// MGF.
pub fn analyze(
    params: &SystemParams,
    discipline: Discipline,
    source: usize,
    method: Method,
    mgf_at: &[f64],
) -> Result<AoiReport> {
    let mu = params.service_rate;
    let model;
    let (mean, mgf) = match method {
        Method::Closed => (
            avg_aoi_closed(discipline, params, source)?,
            Mgf::Closed(ClosedMgf::new(discipline, params, source)?),
        ),
        Method::Shs => {
            model = build(discipline, params, source)?;
            (average_aoi(&model)?, Mgf::Shs(MgfEvaluator::new(&model)?, mu))
        }
    };
    let second_moment = if method == Method::Closed && params.battery_capacity == 2 {
        moments_b2(discipline, params, source, CoefficientSet::Amended)?.1
    } else {
        mgf.moment(2, mu)?
    };
    let mgf_samples = mgf_at
        .iter()
        .map(|&s| mgf.eval(s).map(|m| (s, m)))
        .collect::<Result<Vec<_>>>()?;
    let report = AoiReport {
        discipline,
        source,
        mean,
        second_moment,
        std: (second_moment - mean * mean).max(0.0).sqrt(),
        mgf_samples,
        domain_bound: mgf.bound(),
    };
    check_finite(&report)?;
    Ok(report)
}

fn check_finite(r: &AoiReport) -> Result<()> {
    let values = [r.mean, r.second_moment, r.std, r.domain_bound]
        .into_iter()
        .chain(r.mgf_samples.iter().flat_map(|&(s, m)| [s, m]));
    for v in values {
        if !v.is_finite() {
            return Err(AoiError::NonFinite(format!(
                "{} report for source {}",
                r.discipline, r.source
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub report: AoiReport,
    /// Mean age of every source, in source order.
    pub source_means: Vec<f64>,
    pub sum_aoi: f64,
    pub jfi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub source: usize,
    pub method: Method,
    pub rows: Vec<CompareRow>,
    /// `(WP−PS, WP−SA, SA−PS)` for the source of interest.
    pub gaps: Vec<(GapPair, f64)>,
}

pub(crate) fn source_means(params: &SystemParams, discipline: Discipline, method: Method) -> Result<Vec<f64>> {
    (1..=params.n_sources())
        .map(|i| match method {
            Method::Closed => avg_aoi_closed(discipline, params, i),
            Method::Shs => average_aoi(&build(discipline, params, i)?),
        })
        .collect()
}

/// All three disciplines side by side, with sum of ages, fairness and gaps.
pub fn compare(params: &SystemParams, source: usize, method: Method, mgf_at: &[f64]) -> Result<Comparison> {
    let rows = Discipline::ALL
        .iter()
        .map(|&disc| {
            let report = analyze(params, disc, source, method, mgf_at)?;
            let means = source_means(params, disc, method)?;
            Ok(CompareRow {
                report,
                sum_aoi: means.iter().sum(),
                jfi: jfi(&means)?,
                source_means: means,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_of = |d: Discipline| {
        rows.iter()
            .find(|r| r.report.discipline == d)
            .map(|r| r.report.mean)
            .unwrap_or(f64::NAN)
    };
    let gaps = [GapPair::WpPs, GapPair::WpSa, GapPair::SaPs]
        .into_iter()
        .map(|pair| {
            let value = match method {
                Method::Closed => avg_gap(pair, params, source)?,
                Method::Shs => match pair {
                    GapPair::WpPs => mean_of(Discipline::Wp) - mean_of(Discipline::Ps),
                    GapPair::WpSa => mean_of(Discipline::Wp) - mean_of(Discipline::Sa),
                    GapPair::SaPs => mean_of(Discipline::Sa) - mean_of(Discipline::Ps),
                },
            };
            Ok((pair, value))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        source,
        method,
        rows,
        gaps,
    })
}

/// A simulated quantity next to its analytical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub simulated: f64,
    pub std_error: f64,
    pub half_width: f64,
    /// `None` when the quantity is infinite.
    pub reference: Option<f64>,
    /// `|simulated − reference| ≤ 3·std_error`, with rounding slack for
    /// quantities the simulator reproduces exactly.
    pub pass: Option<bool>,
}

impl Check {
    fn new(simulated: f64, std_error: f64, half_width: f64, reference: Option<f64>) -> Self {
        Self {
            simulated,
            std_error,
            half_width,
            reference,
            pass: reference.map(|r| (simulated - r).abs() <= 3.0 * std_error + 1e-12 * r.abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgfCheck {
    pub s_bar: f64,
    /// Whether `e^{sΔ}` has finite variance (`s̄ < s̄₀/2`), which the
    /// standard error needs to be meaningful.
    pub finite_variance: bool,
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceCheck {
    pub source: usize,
    pub mean: Check,
    pub second_moment: Check,
    pub mgf: Vec<MgfCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub discipline: Discipline,
    pub params: SystemParams,
    pub config: SimConfig,
    pub sources: Vec<SourceCheck>,
    pub occupancy: Vec<f64>,
    pub occupancy_reference: Vec<f64>,
    pub updates: Vec<UpdateCounts>,
    pub energy: EnergyCounts,
    /// Leading events of the first replication when a trace was requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<TraceEvent>>,
}

/// Second moment from the closed forms.
pub fn closed_second_moment(params: &SystemParams, discipline: Discipline, source: usize) -> Result<f64> {
    analyze(params, discipline, source, Method::Closed, &[]).map(|r| r.second_moment)
}

/// Runs the replications and pairs every estimate with its closed-form
/// value.
pub fn simulate_cmd(params: &SystemParams, discipline: Discipline, config: &SimConfig) -> Result<SimReport> {
    let result = replicate(params, discipline, config)?;
    let sources = result
        .sources
        .iter()
        .map(|est| {
            let i = est.source;
            let report = analyze(params, discipline, i, Method::Closed, &[])?;
            let closed = ClosedMgf::new(discipline, params, i)?;
            let mgf = est
                .mgf
                .iter()
                .map(|m| {
                    let e = m.estimate;
                    let reference = closed.eval(m.s_bar).ok();
                    MgfCheck {
                        s_bar: m.s_bar,
                        finite_variance: m.s_bar < closed.bound() / 2.0,
                        check: Check::new(e.mean, e.std_error, e.half_width, reference),
                    }
                })
                .collect();
            let (m, m2) = (est.mean_aoi, est.second_moment);
            Ok(SourceCheck {
                source: i,
                mean: Check::new(m.mean, m.std_error, m.half_width, Some(report.mean)),
                second_moment: Check::new(m2.mean, m2.std_error, m2.half_width, Some(report.second_moment)),
                mgf,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimReport {
        discipline,
        params: params.clone(),
        config: config.clone(),
        sources,
        occupancy: result.occupancy,
        occupancy_reference: steady_state_closed(discipline, params, 1)?.pi,
        updates: result.updates,
        energy: result.energy,
        trace: result.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jfi_examples() {
        assert_eq!(jfi(&[2.0, 2.0]).unwrap(), 1.0);
        assert!((jfi(&[2.0, 4.0]).unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(jfi(&[7.5]).unwrap(), 1.0);
        assert!(jfi(&[]).is_err());
        assert!(jfi(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn analyze_single_source_wp() {
        let p = SystemParams::new(vec![1.0], 1.0, 1.0, 2).unwrap();
        let r = analyze(&p, Discipline::Wp, 1, Method::Closed, &[0.0]).unwrap();
        assert!((r.mean - 2.8).abs() < 1e-14);
        assert!((r.second_moment - 11.2).abs() < 1e-12);
        assert!((r.std - (11.2f64 - 2.8 * 2.8).sqrt()).abs() < 1e-12);
        assert_eq!(r.mgf_samples, vec![(0.0, 1.0)]);
    }

    #[test]
    fn methods_agree() {
        let p = SystemParams::new(vec![0.3, 0.9], 1.7, 1.2, 3).unwrap();
        for disc in Discipline::ALL {
            let a = analyze(&p, disc, 2, Method::Closed, &[0.05]).unwrap();
            let b = analyze(&p, disc, 2, Method::Shs, &[0.05]).unwrap();
            assert!((a.mean - b.mean).abs() < 1e-9 * a.mean);
            assert!((a.mgf_samples[0].1 - b.mgf_samples[0].1).abs() < 1e-9);
            assert!((a.second_moment - b.second_moment).abs() < 1e-6 * a.second_moment);
            assert!((a.domain_bound - b.domain_bound).abs() < 1e-9);
        }
    }
}

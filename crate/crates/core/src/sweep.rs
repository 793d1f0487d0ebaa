//! Parameter sweeps rendered as CSV.
//!
//! Per-source columns are named `{metric}_{discipline}` with metric one of
//! `delta1` (mean), `delta2` (second moment), `std` or `mgf{s̄}`; when more
//! than one source is requested they gain an `_s{i}` suffix. System-wide
//! columns are `jfi_{discipline}` and `sum_aoi_{discipline}`.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, jfi, source_means, Method};
use crate::chains::Discipline;
use crate::error::{AoiError, Result};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Energy utilization `β`.
    Beta,
    /// Battery capacity `B`.
    Battery,
    /// Utilization `ρ₁` of source 1 at fixed total `ρ`.
    RhoSplit,
    /// Total utilization `ρ`, keeping the relative split.
    Rho,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Beta => "beta",
            SweepParam::Battery => "battery",
            SweepParam::RhoSplit => "rho_split",
            SweepParam::Rho => "rho",
        }
    }
}

impl FromStr for SweepParam {
    type Err = AoiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "beta" => Ok(SweepParam::Beta),
            "battery" => Ok(SweepParam::Battery),
            "rho_split" => Ok(SweepParam::RhoSplit),
            "rho" => Ok(SweepParam::Rho),
            other => Err(AoiError::InvalidConfig(format!("unknown sweep parameter {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Mean,
    SecondMoment,
    Std,
    Mgf(f64),
    Jfi,
    SumAoi,
}

impl FromStr for Output {
    type Err = AoiError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(arg) = s.strip_prefix("mgf@") {
            let v = arg
                .parse()
                .map_err(|_| AoiError::InvalidConfig(format!("bad MGF argument in {s:?}")))?;
            return Ok(Output::Mgf(v));
        }
        match s {
            "mean" => Ok(Output::Mean),
            "second_moment" => Ok(Output::SecondMoment),
            "std" => Ok(Output::Std),
            "jfi" => Ok(Output::Jfi),
            "sum_aoi" => Ok(Output::SumAoi),
            other => Err(AoiError::InvalidConfig(format!("unknown output {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub from: f64,
    pub to: f64,
    /// Grid size; for `battery` the grid is every integer in `[from, to]`.
    pub points: usize,
    /// Parameters the swept one is substituted into.
    pub base: SystemParams,
    pub disciplines: Vec<Discipline>,
    /// 1-based sources whose per-source outputs are written.
    pub sources: Vec<usize>,
    pub outputs: Vec<Output>,
    pub method: Method,
}

impl SweepSpec {
    /// Spec with default disciplines, sources and outputs.
    pub fn new(parameter: SweepParam, from: f64, to: f64, points: usize, base: SystemParams) -> Self {
        Self {
            parameter,
            from,
            to,
            points,
            base,
            disciplines: Discipline::ALL.to_vec(),
            sources: vec![1],
            outputs: vec![Output::Mean, Output::Std, Output::Jfi, Output::SumAoi],
            method: Method::Closed,
        }
    }

    /// Parses `param=from:to:points`, or `battery=from:to`.
    pub fn parse_axis(text: &str, base: SystemParams) -> Result<Self> {
        let bad = || {
            AoiError::InvalidConfig(format!(
                "sweep must look like beta=0.1:10:50 or battery=1:8, got {text:?}"
            ))
        };
        let (name, range) = text.split_once('=').ok_or_else(bad)?;
        let parameter: SweepParam = name.parse()?;
        let parts: Vec<&str> = range.split(':').collect();
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let (from, to, points) = match (parameter, parts.as_slice()) {
            (SweepParam::Battery, [a, b]) => {
                let (a, b) = (num(a)?, num(b)?);
                (a, b, (b - a).max(0.0) as usize + 1)
            }
            (_, [a, b, n]) => (num(a)?, num(b)?, n.trim().parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        Ok(Self::new(parameter, from, to, points, base))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.from < self.to) {
            return Err(AoiError::InvalidConfig(format!(
                "sweep needs from < to, got {} and {}",
                self.from, self.to
            )));
        }
        if self.points < 2 {
            return Err(AoiError::InvalidConfig("sweep needs at least 2 points".into()));
        }
        if self.disciplines.is_empty() || self.outputs.is_empty() || self.sources.is_empty() {
            return Err(AoiError::InvalidConfig(
                "sweep needs disciplines, sources and outputs".into(),
            ));
        }
        for &s in &self.sources {
            self.base.check_source(s)?;
        }
        if self.parameter == SweepParam::Battery
            && (self.from < 1.0 || self.from.fract() != 0.0 || self.to.fract() != 0.0)
        {
            return Err(AoiError::InvalidConfig("battery sweeps need integer bounds ≥ 1".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.parameter == SweepParam::Battery {
            return (self.from as usize..=self.to as usize).map(|b| b as f64).collect();
        }
        let step = (self.to - self.from) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                if k + 1 == self.points {
                    self.to
                } else {
                    self.from + step * k as f64
                }
            })
            .collect()
    }

    /// Base parameters with the swept parameter set to `value`.
    pub fn params_at(&self, value: f64) -> Result<SystemParams> {
        let base = &self.base;
        let mu = base.service_rate;
        match self.parameter {
            SweepParam::Beta => SystemParams::new(base.arrival_rates.clone(), value * mu, mu, base.battery_capacity),
            SweepParam::Battery => SystemParams::new(base.arrival_rates.clone(), base.energy_rate, mu, value as usize),
            SweepParam::Rho => {
                let scale = value * mu / base.total_rate();
                SystemParams::new(
                    base.arrival_rates.iter().map(|r| r * scale).collect(),
                    base.energy_rate,
                    mu,
                    base.battery_capacity,
                )
            }
            SweepParam::RhoSplit => {
                let rho = base.total_rate() / mu;
                let utils = split_utilizations(rho, value, base.n_sources())?;
                SystemParams::from_utilizations(&utils, base.energy_rate / mu, mu, base.battery_capacity)
            }
        }
    }

    pub fn header(&self) -> Vec<String> {
        let mut cols = vec![self.parameter.as_str().to_string()];
        let suffix = |i: usize| {
            if self.sources.len() > 1 {
                format!("_s{i}")
            } else {
                String::new()
            }
        };
        for disc in &self.disciplines {
            for out in &self.outputs {
                let metric = match out {
                    Output::Jfi => {
                        cols.push(format!("jfi_{disc}"));
                        continue;
                    }
                    Output::SumAoi => {
                        cols.push(format!("sum_aoi_{disc}"));
                        continue;
                    }
                    Output::Mean => "delta1".to_string(),
                    Output::SecondMoment => "delta2".to_string(),
                    Output::Std => "std".to_string(),
                    Output::Mgf(s) => format!("mgf{s}"),
                };
                for &i in &self.sources {
                    cols.push(format!("{metric}_{disc}{}", suffix(i)));
                }
            }
        }
        cols
    }
}

/// Utilizations with source 1 at `rho1` and the remainder `ρ − ρ₁` given to
/// source 2 alone when `n = 2`, otherwise 10% to source 2 and the rest split
/// evenly over sources `3..=n`.
pub fn split_utilizations(rho: f64, rho1: f64, n: usize) -> Result<Vec<f64>> {
    if !(rho1 > 0.0 && rho1 < rho) {
        return Err(AoiError::InvalidConfig(format!(
            "source 1 utilization {rho1} must lie in (0, {rho})"
        )));
    }
    let rest = rho - rho1;
    Ok(match n {
        0 | 1 => {
            return Err(AoiError::InvalidConfig(
                "a utilization split needs at least 2 sources".into(),
            ))
        }
        2 => vec![rho1, rest],
        _ => {
            let mut v = vec![rho1, 0.1 * rest];
            v.extend(std::iter::repeat_n(0.9 * rest / (n - 2) as f64, n - 2));
            v
        }
    })
}

/// One CSV row per grid value, in grid order.
pub fn sweep_rows(spec: &SweepSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    spec.grid()
        .into_par_iter()
        .map(|value| {
            sweep_cell(spec, value).map_err(|e| {
                AoiError::InvalidConfig(format!("sweep cell {}={value} failed: {e}", spec.parameter.as_str()))
            })
        })
        .collect()
}

fn sweep_cell(spec: &SweepSpec, value: f64) -> Result<Vec<f64>> {
    let params = spec.params_at(value)?;
    let mgf_at: Vec<f64> = spec
        .outputs
        .iter()
        .filter_map(|o| if let Output::Mgf(s) = o { Some(*s) } else { None })
        .collect();
    let needs_report = spec.outputs.iter().any(|o| !matches!(o, Output::Jfi | Output::SumAoi));
    let mut row = vec![value];
    for &disc in &spec.disciplines {
        let means = source_means(&params, disc, spec.method)?;
        let reports = if needs_report {
            spec.sources
                .iter()
                .map(|&i| analyze(&params, disc, i, spec.method, &mgf_at))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        for out in &spec.outputs {
            match out {
                Output::Jfi => row.push(jfi(&means)?),
                Output::SumAoi => row.push(means.iter().sum()),
                _ => {
                    for r in &reports {
                        row.push(match out {
                            Output::Mean => r.mean,
                            Output::SecondMoment => r.second_moment,
                            Output::Std => r.std,
                            Output::Mgf(s) => r
                                .mgf_samples
                                .iter()
                                .find(|(x, _)| x == s)
                                .map(|&(_, m)| m)
                                .unwrap_or(f64::NAN),
                            Output::Jfi | Output::SumAoi => unreachable!(),
                        });
                    }
                }
            }
        }
    }
    if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
        return Err(AoiError::NonFinite(format!("sweep value {bad}")));
    }
    Ok(row)
}

/// CSV with a header row, `,` separators, `.` decimals and LF endings.
pub fn sweep(spec: &SweepSpec) -> Result<String> {
    let rows = sweep_rows(spec)?;
    Ok(to_csv(&spec.header(), &rows))
}

pub fn to_csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

//! JSON run configuration shared by the command-line front end.
//!
//! ```json
//! { "n_sources": 2, "lambda": [0.5, 0.5], "eta": 1.5, "mu": 1, "battery": 2,
//!   "discipline": "wp", "source": 1, "method": "closed", "mgf_at": [0.1],
//!   "sim": { "horizon": 1e6, "seed": 42, "replications": 8 } }
//! ```
//!
//! Every field is optional so a file and command-line flags can be layered
//! with [`RunConfig::merge`].

use serde::{Deserialize, Serialize};

use crate::analysis::Method;
use crate::chains::Discipline;
use crate::error::{AoiError, Result};
use crate::params::SystemParams;
use crate::sim::SimConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warmup_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batches: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// When `lambda` has a single entry it is repeated this many times.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_sources: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub battery: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discipline: Option<Discipline>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mgf_at: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
}

fn pick<T>(over: Option<T>, base: Option<T>) -> Option<T> {
    over.or(base)
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| AoiError::InvalidConfig(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: RunConfig) -> RunConfig {
        let sim = match (self.sim, over.sim) {
            (Some(b), Some(o)) => Some(SimSection {
                horizon: pick(o.horizon, b.horizon),
                seed: pick(o.seed, b.seed),
                replications: pick(o.replications, b.replications),
                warmup_fraction: pick(o.warmup_fraction, b.warmup_fraction),
                batches: pick(o.batches, b.batches),
            }),
            (b, o) => o.or(b),
        };
        RunConfig {
            n_sources: pick(over.n_sources, self.n_sources),
            lambda: pick(over.lambda, self.lambda),
            eta: pick(over.eta, self.eta),
            mu: pick(over.mu, self.mu),
            battery: pick(over.battery, self.battery),
            discipline: pick(over.discipline, self.discipline),
            source: pick(over.source, self.source),
            method: pick(over.method, self.method),
            mgf_at: pick(over.mgf_at, self.mgf_at),
            sim,
        }
    }

    /// System parameters; `mu` defaults to 1.
    pub fn params(&self) -> Result<SystemParams> {
        let missing = |f: &str| AoiError::InvalidConfig(format!("missing {f}"));
        let mut lambda = self.lambda.clone().ok_or_else(|| missing("lambda"))?;
        if let Some(n) = self.n_sources {
            if lambda.len() == 1 && n > 1 {
                lambda = vec![lambda[0]; n];
            } else if lambda.len() != n {
                return Err(AoiError::InvalidConfig(format!(
                    "n_sources is {n} but lambda has {} entries",
                    lambda.len()
                )));
            }
        }
        SystemParams::new(
            lambda,
            self.eta.ok_or_else(|| missing("eta"))?,
            self.mu.unwrap_or(1.0),
            self.battery.ok_or_else(|| missing("battery"))?,
        )
    }

    pub fn source(&self) -> usize {
        self.source.unwrap_or(1)
    }

    pub fn method(&self) -> Method {
        self.method.unwrap_or_default()
    }

    pub fn mgf_at(&self) -> Vec<f64> {
        self.mgf_at.clone().unwrap_or_default()
    }

    /// Simulator settings over [`SimConfig::default`]; MGF arguments come
    /// from `mgf_at`.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let mut c = SimConfig::default();
        if let Some(s) = &self.sim {
            c.horizon = s.horizon.unwrap_or(c.horizon);
            c.seed = s.seed.unwrap_or(c.seed);
            c.replications = s.replications.unwrap_or(c.replications);
            c.warmup_fraction = s.warmup_fraction.unwrap_or(c.warmup_fraction);
            c.batches = s.batches.unwrap_or(c.batches);
        }
        c.mgf_s_bar = self.mgf_at();
        c.validate()?;
        Ok(c)
    }
}

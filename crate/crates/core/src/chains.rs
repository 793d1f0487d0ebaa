//! Markov chains of the three LCFS disciplines and their closed-form
//! stationary distributions.
//!
//! State ids follow the figure numbering of the chains: for WP and PS state
//! `1` is the empty-battery idle state, `2k` is idle with `k` energy packets
//! and `2k + 1` is busy with `k` packets. For SA, energy level `k` holds an
//! idle state followed by one busy state per source, in source order.
//!
//! Discarded events (an update meeting an idle server with an empty battery,
//! energy meeting a full battery, an update meeting a busy WP server) change
//! neither the discrete state nor the age vector, so they have no transition.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{AoiError, Result};
use crate::params::{utilizations_equal, DerivedRates, SystemParams};
use crate::shs::{RateKind, ResetMap, ServerState, ShsModel, StateDescriptor, SteadyState, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discipline {
    /// LCFS without preemption.
    Wp,
    /// LCFS with source-agnostic preemption in service.
    Ps,
    /// LCFS with source-aware preemption in service.
    Sa,
}

impl Discipline {
    pub const ALL: [Discipline; 3] = [Discipline::Wp, Discipline::Ps, Discipline::Sa];

    pub fn as_str(&self) -> &'static str {
        match self {
            Discipline::Wp => "wp",
            Discipline::Ps => "ps",
            Discipline::Sa => "sa",
        }
    }
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Discipline {
    type Err = AoiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wp" => Ok(Discipline::Wp),
            "ps" => Ok(Discipline::Ps),
            "sa" => Ok(Discipline::Sa),
            other => Err(AoiError::InvalidConfig(format!(
                "unknown discipline {other:?}, expected wp, ps or sa"
            ))),
        }
    }
}

/// 0-based position of the idle state at energy level `k` in the WP/PS chain.
pub fn wp_idle(k: usize) -> usize {
    if k == 0 {
        0
    } else {
        2 * k - 1
    }
}

/// 0-based position of the busy state at energy level `k ≥ 1` in the WP/PS
/// chain.
pub fn wp_busy(k: usize) -> usize {
    2 * k
}

/// 0-based position of the idle state at energy level `k` in the SA chain.
pub fn sa_idle(k: usize, n_sources: usize) -> usize {
    if k == 0 {
        0
    } else {
        1 + (k - 1) * (n_sources + 1)
    }
}

/// 0-based position of the state at energy level `k ≥ 1` serving the
/// 1-based `source` in the SA chain.
pub fn sa_busy(k: usize, source: usize, n_sources: usize) -> usize {
    1 + source + (k - 1) * (n_sources + 1)
}

struct Builder {
    transitions: Vec<Transition>,
}

impl Builder {
    fn push(&mut self, from: usize, to: usize, rate: f64, rate_kind: RateKind, reset: ResetMap) {
        let label = self.transitions.len() + 1;
        self.transitions.push(Transition {
            label,
            from,
            to,
            rate,
            rate_kind,
            reset,
        });
    }
}

fn wp_states(b: usize) -> Vec<StateDescriptor> {
    let mut states = vec![StateDescriptor {
        id: 1,
        energy: 0,
        server: ServerState::Idle,
        row: 1,
    }];
    for k in 1..=b {
        states.push(StateDescriptor {
            id: 2 * k,
            energy: k,
            server: ServerState::Idle,
            row: 1,
        });
        states.push(StateDescriptor {
            id: 2 * k + 1,
            energy: k,
            server: ServerState::Busy,
            row: 2,
        });
    }
    states
}

/// Harvest, arrival and delivery families shared by WP and PS.
fn wp_core(d: &DerivedRates) -> Builder {
    let b = d.battery_capacity;
    let i = d.source;
    let mut builder = Builder {
        transitions: Vec::new(),
    };
    for k in 1..=b {
        builder.push(
            wp_idle(k - 1),
            wp_idle(k),
            d.energy_rate,
            RateKind::Energy,
            ResetMap::KEEP_AGE,
        );
    }
    for k in 1..=b {
        builder.push(
            wp_idle(k),
            wp_busy(k),
            d.source_rate,
            RateKind::Source(i),
            ResetMap::KEEP_AGE,
        );
    }
    if d.other_rate > 0.0 {
        for k in 1..=b {
            builder.push(
                wp_idle(k),
                wp_busy(k),
                d.other_rate,
                RateKind::OthersOf(i),
                ResetMap::COPY_AGE,
            );
        }
    }
    for k in 1..=b {
        builder.push(
            wp_busy(k),
            wp_idle(k - 1),
            d.service_rate,
            RateKind::Service,
            ResetMap::DELIVER,
        );
    }
    builder
}

pub fn build_wp(params: &SystemParams, source: usize) -> Result<ShsModel> {
    let d = params.derive(source)?;
    let builder = wp_core(&d);
    ShsModel::new(wp_states(d.battery_capacity), builder.transitions)
}

pub fn build_ps(params: &SystemParams, source: usize) -> Result<ShsModel> {
    let d = params.derive(source)?;
    let mut builder = wp_core(&d);
    let i = d.source;
    for k in 1..=d.battery_capacity {
        builder.push(
            wp_busy(k),
            wp_busy(k),
            d.source_rate,
            RateKind::Source(i),
            ResetMap::KEEP_AGE,
        );
        if d.other_rate > 0.0 {
            builder.push(
                wp_busy(k),
                wp_busy(k),
                d.other_rate,
                RateKind::OthersOf(i),
                ResetMap::COPY_AGE,
            );
        }
    }
    ShsModel::new(wp_states(d.battery_capacity), builder.transitions)
}

pub fn build_sa(params: &SystemParams, source: usize) -> Result<ShsModel> {
    let d = params.derive(source)?;
    let n = params.n_sources();
    let b = d.battery_capacity;
    let mut states = vec![StateDescriptor {
        id: 1,
        energy: 0,
        server: ServerState::Idle,
        row: 1,
    }];
    for k in 1..=b {
        states.push(StateDescriptor {
            id: sa_idle(k, n) + 1,
            energy: k,
            server: ServerState::Idle,
            row: 1,
        });
        for j in 1..=n {
            states.push(StateDescriptor {
                id: sa_busy(k, j, n) + 1,
                energy: k,
                server: ServerState::Serving(j),
                row: j + 1,
            });
        }
    }
    let mut builder = Builder {
        transitions: Vec::new(),
    };
    for k in 1..=b {
        builder.push(
            sa_idle(k - 1, n),
            sa_idle(k, n),
            d.energy_rate,
            RateKind::Energy,
            ResetMap::KEEP_AGE,
        );
    }
    for k in 1..=b {
        for (j0, &rate) in params.arrival_rates.iter().enumerate() {
            let j = j0 + 1;
            builder.push(
                sa_idle(k, n),
                sa_busy(k, j, n),
                rate,
                RateKind::Source(j),
                ResetMap::KEEP_AGE,
            );
        }
    }
    for k in 1..=b {
        for (j0, &rate) in params.arrival_rates.iter().enumerate() {
            let j = j0 + 1;
            builder.push(
                sa_busy(k, j, n),
                sa_busy(k, j, n),
                rate,
                RateKind::Source(j),
                ResetMap::KEEP_AGE,
            );
        }
    }
    for k in 1..=b {
        for j in 1..=n {
            let reset = if j == source {
                ResetMap::DELIVER
            } else {
                ResetMap::KEEP_AGE
            };
            builder.push(
                sa_busy(k, j, n),
                sa_idle(k - 1, n),
                d.service_rate,
                RateKind::Service,
                reset,
            );
        }
    }
    ShsModel::new(states, builder.transitions)
}

pub fn build(discipline: Discipline, params: &SystemParams, source: usize) -> Result<ShsModel> {
    match discipline {
        Discipline::Wp => build_wp(params, source),
        Discipline::Ps => build_ps(params, source),
        Discipline::Sa => build_sa(params, source),
    }
}

/// `Σ_{k=1}^{B} (β/ρ)ᵏ`, the idle-state mass relative to the empty state.
pub fn energy_ratio_sum(rho: f64, beta: f64, b: usize) -> f64 {
    if utilizations_equal(rho, beta) {
        return b as f64;
    }
    let r = beta / rho;
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..b {
        term *= r;
        sum += term;
    }
    sum
}

/// Probability of the empty-battery idle state.
pub fn empty_state_probability(rho: f64, beta: f64, b: usize) -> f64 {
    if utilizations_equal(rho, beta) {
        return 1.0 / (1.0 + b as f64 * (1.0 + rho));
    }
    let bi = b as i32;
    let (rb, bb) = (rho.powi(bi), beta.powi(bi));
    let num = rb * (beta - rho);
    num / (num + beta * (1.0 + rho) * (bb - rb))
}

/// Stationary distribution in the chain's state order.
pub fn steady_state_closed(discipline: Discipline, params: &SystemParams, source: usize) -> Result<SteadyState> {
    let d = params.derive(source)?;
    let (rho, beta, b) = (d.server_utilization, d.energy_utilization, d.battery_capacity);
    let p1 = empty_state_probability(rho, beta, b);
    let ratio = beta / rho;
    let mut pi = vec![p1];
    let mut level = p1;
    for _ in 1..=b {
        level *= ratio;
        pi.push(level);
        match discipline {
            Discipline::Wp | Discipline::Ps => pi.push(rho * level),
            Discipline::Sa => {
                for &rate in &params.arrival_rates {
                    pi.push(rate / d.service_rate * level);
                }
            }
        }
    }
    Ok(SteadyState { pi })
}

//! Event-driven simulation of the physical system.
//!
//! Between events every rate is constant, so the next event is drawn from the
//! race of exponential clocks: update arrivals of every source at all times,
//! energy arrivals only while the server is idle, and service completion only
//! while busy. Because service is exponential, a preempting packet starts a
//! fresh service period simply by the race continuing.
//!
//! Ages are integrated exactly and lazily: a source's age is a line of slope 1
//! between its deliveries, so its integrals are only advanced when it resets,
//! when a batch boundary is crossed, and at the horizon.
//!
//! Replication `r` draws from `ChaCha8Rng::seed_from_u64(seed)` with stream
//! `r`, so replication 0 reproduces [`simulate`] exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::chains::{sa_busy, sa_idle, wp_busy, wp_idle, Discipline};
use crate::error::{AoiError, Result};
use crate::params::SystemParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Simulated time per replication.
    pub horizon: f64,
    /// Leading fraction of the horizon excluded from every estimate.
    pub warmup_fraction: f64,
    pub seed: u64,
    pub replications: usize,
    /// Normalized MGF arguments `s̄ = s/μ`.
    pub mgf_s_bar: Vec<f64>,
    pub batches: usize,
    /// Record at most this many events of the first replication.
    pub trace_limit: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 1e6,
            warmup_fraction: 0.01,
            seed: 42,
            replications: 1,
            mgf_s_bar: Vec::new(),
            batches: 30,
            trace_limit: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(AoiError::InvalidConfig(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(AoiError::InvalidConfig(format!(
                "warmup fraction must lie in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        if self.batches < 2 {
            return Err(AoiError::InvalidConfig("at least 2 batches are required".into()));
        }
        if self.replications == 0 {
            return Err(AoiError::InvalidConfig("at least 1 replication is required".into()));
        }
        if let Some(s) = self.mgf_s_bar.iter().find(|s| !s.is_finite()) {
            return Err(AoiError::InvalidConfig(format!("MGF argument {s} is not finite")));
        }
        Ok(())
    }
}

/// Point estimate with a 95% confidence half-width from pooled batch means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgfEstimate {
    pub s_bar: f64,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceEstimates {
    pub source: usize,
    pub mean_aoi: Estimate,
    pub second_moment: Estimate,
    pub mgf: Vec<MgfEstimate>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateCounts {
    pub generated: u64,
    pub served: u64,
    pub preempted: u64,
    /// Dropped on arrival, or still in service at the horizon.
    pub discarded: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyCounts {
    pub harvested: u64,
    /// Arrived while idle with a full battery.
    pub discarded: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Energy,
    Arrival,
    Delivery,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: EventKind,
    /// 1-based source for arrivals and deliveries.
    pub source: Option<usize>,
    /// Battery level after the event.
    pub battery: usize,
    pub aoi: Vec<f64>,
}

impl std::fmt::Display for TraceEvent {
    /// `time kind source battery aoi1 aoi2 …`, with `-` for no source.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            EventKind::Energy => "energy",
            EventKind::Arrival => "arrival",
            EventKind::Delivery => "delivery",
        };
        write!(f, "{} {kind} ", self.time)?;
        match self.source {
            Some(i) => write!(f, "{i}")?,
            None => f.write_str("-")?,
        }
        write!(f, " {}", self.battery)?;
        for a in &self.aoi {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub discipline: Discipline,
    pub horizon: f64,
    pub replications: usize,
    pub batches: usize,
    pub sources: Vec<SourceEstimates>,
    /// Time fractions of the chain states, in the chain's state order.
    pub occupancy: Vec<f64>,
    pub updates: Vec<UpdateCounts>,
    pub energy: EnergyCounts,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<TraceEvent>>,
}

/// One replication's raw output.
#[derive(Debug, Clone)]
struct Run {
    /// `[source][metric][batch]` with metrics mean, second moment, MGFs.
    batch_means: Vec<Vec<Vec<f64>>>,
    occupancy_time: Vec<f64>,
    updates: Vec<UpdateCounts>,
    energy: EnergyCounts,
    trace: Option<Vec<TraceEvent>>,
}

/// Per-source integrals over each batch.
struct Integrals {
    start: f64,
    batch_len: f64,
    n_batches: usize,
    s: Vec<f64>,
    /// `[batch][metric]`: duration, ∫Δ, ∫Δ², then ∫e^{sΔ} per s.
    acc: Vec<Vec<f64>>,
}

impl Integrals {
    fn new(start: f64, end: f64, n_batches: usize, s: Vec<f64>) -> Self {
        let width = 3 + s.len();
        Self {
            start,
            batch_len: (end - start) / n_batches as f64,
            n_batches,
            s,
            acc: vec![vec![0.0; width]; n_batches],
        }
    }

    /// Adds the segment `[t0, t1]` on which the age rises from `age0`.
    fn add(&mut self, mut t0: f64, t1: f64, mut age0: f64) {
        if t0 < self.start {
            age0 += self.start - t0;
            t0 = self.start;
        }
        let mut idx = (((t0 - self.start) / self.batch_len) as usize).min(self.n_batches - 1);
        while t0 < t1 {
            let end = if idx + 1 == self.n_batches {
                t1
            } else {
                t1.min(self.start + (idx + 1) as f64 * self.batch_len)
            };
            let tau = end - t0;
            if tau > 0.0 {
                let row = &mut self.acc[idx];
                row[0] += tau;
                row[1] += age0 * tau + 0.5 * tau * tau;
                row[2] += tau * (age0 * age0 + age0 * tau + tau * tau / 3.0);
                for (k, &s) in self.s.iter().enumerate() {
                    row[3 + k] += if s == 0.0 {
                        tau
                    } else {
                        (s * age0).exp() * (s * tau).exp_m1() / s
                    };
                }
            }
            age0 += tau;
            t0 = end;
            if idx + 1 == self.n_batches {
                break;
            }
            idx += 1;
        }
    }

    fn batch_means(&self) -> Vec<Vec<f64>> {
        let width = 2 + self.s.len();
        (0..width)
            .map(|m| self.acc.iter().map(|row| row[m + 1] / row[0]).collect())
            .collect()
    }
}

struct Sim<'a> {
    params: &'a SystemParams,
    discipline: Discipline,
    rng: ChaCha8Rng,
    t: f64,
    battery: usize,
    /// Source (0-based) and generation time of the packet in service.
    in_service: Option<(usize, f64)>,
    last_gen: Vec<f64>,
    mark: Vec<f64>,
    integrals: Vec<Integrals>,
    window_start: f64,
    occupancy_time: Vec<f64>,
    updates: Vec<UpdateCounts>,
    energy: EnergyCounts,
    trace: Option<(usize, Vec<TraceEvent>)>,
}

impl<'a> Sim<'a> {
    fn state_index(&self) -> usize {
        let n = self.params.n_sources();
        match (self.discipline, self.in_service) {
            (Discipline::Sa, None) => sa_idle(self.battery, n),
            (Discipline::Sa, Some((j, _))) => sa_busy(self.battery, j + 1, n),
            (_, None) => wp_idle(self.battery),
            (_, Some(_)) => wp_busy(self.battery),
        }
    }

    fn advance_to(&mut self, t: f64) {
        let from = self.t.max(self.window_start);
        if t > from {
            let q = self.state_index();
            self.occupancy_time[q] += t - from;
        }
        self.t = t;
    }

    fn flush(&mut self, i: usize) {
        let t = self.t;
        let age0 = self.mark[i] - self.last_gen[i];
        self.integrals[i].add(self.mark[i], t, age0);
        self.mark[i] = t;
    }

    fn record(&mut self, kind: EventKind, source: Option<usize>) {
        if let Some((limit, events)) = &mut self.trace {
            if events.len() < *limit {
                events.push(TraceEvent {
                    time: self.t,
                    kind,
                    source: source.map(|j| j + 1),
                    battery: self.battery,
                    aoi: self.last_gen.iter().map(|g| self.t - g).collect(),
                });
            }
        }
    }

    fn run(&mut self, horizon: f64) {
        let rates = &self.params.arrival_rates;
        let lambda: f64 = rates.iter().sum();
        let eta = self.params.energy_rate;
        let mu = self.params.service_rate;
        let b = self.params.battery_capacity;
        loop {
            let busy = self.in_service.is_some();
            let other = if busy { mu } else { eta };
            let total = lambda + other;
            let dt: f64 = self.rng.sample::<f64, _>(Exp1) / total;
            if self.t + dt >= horizon {
                self.advance_to(horizon);
                break;
            }
            self.advance_to(self.t + dt);
            let mut u = self.rng.random::<f64>() * total;
            if u < other {
                if let Some((j, gen)) = self.in_service.take() {
                    self.flush(j);
                    self.last_gen[j] = gen;
                    self.battery -= 1;
                    self.updates[j].served += 1;
                    self.record(EventKind::Delivery, Some(j));
                } else {
                    if self.battery < b {
                        self.battery += 1;
                        self.energy.harvested += 1;
                    } else {
                        self.energy.discarded += 1;
                    }
                    self.record(EventKind::Energy, None);
                }
                continue;
            }
            u -= other;
            let mut j = rates.len() - 1;
            for (k, &r) in rates.iter().enumerate() {
                if u < r {
                    j = k;
                    break;
                }
                u -= r;
            }
            self.updates[j].generated += 1;
            match self.in_service {
                None if self.battery > 0 => self.in_service = Some((j, self.t)),
                None => self.updates[j].discarded += 1,
                Some((k, _)) => {
                    let preempts = match self.discipline {
                        Discipline::Wp => false,
                        Discipline::Ps => true,
                        Discipline::Sa => k == j,
                    };
                    if preempts {
                        self.updates[k].preempted += 1;
                        self.in_service = Some((j, self.t));
                    } else {
                        self.updates[j].discarded += 1;
                    }
                }
            }
            self.record(EventKind::Arrival, Some(j));
        }
        if let Some((j, _)) = self.in_service {
            self.updates[j].discarded += 1;
        }
        for i in 0..self.last_gen.len() {
            self.flush(i);
        }
    }
}

fn n_states(discipline: Discipline, params: &SystemParams) -> usize {
    let b = params.battery_capacity;
    match discipline {
        Discipline::Sa => 1 + b * (params.n_sources() + 1),
        _ => 2 * b + 1,
    }
}

fn run_one(params: &SystemParams, discipline: Discipline, config: &SimConfig, stream: u64) -> Run {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let n = params.n_sources();
    let window_start = config.warmup_fraction * config.horizon;
    let s: Vec<f64> = config.mgf_s_bar.iter().map(|s| s * params.service_rate).collect();
    let mut sim = Sim {
        params,
        discipline,
        rng,
        t: 0.0,
        battery: 0,
        in_service: None,
        last_gen: vec![0.0; n],
        mark: vec![0.0; n],
        integrals: (0..n)
            .map(|_| Integrals::new(window_start, config.horizon, config.batches, s.clone()))
            .collect(),
        window_start,
        occupancy_time: vec![0.0; n_states(discipline, params)],
        updates: vec![UpdateCounts::default(); n],
        energy: EnergyCounts::default(),
        trace: config
            .trace_limit
            .filter(|_| stream == 0)
            .map(|limit| (limit, Vec::new())),
    };
    sim.run(config.horizon);
    Run {
        batch_means: sim.integrals.iter().map(Integrals::batch_means).collect(),
        occupancy_time: sim.occupancy_time,
        updates: sim.updates,
        energy: sim.energy,
        trace: sim.trace.map(|(_, events)| events),
    }
}

fn estimate(samples: &[f64]) -> Estimate {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std_error = (var / n).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 1.0)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(1.96);
    Estimate {
        mean,
        std_error,
        half_width: t * std_error,
    }
}

fn aggregate(params: &SystemParams, discipline: Discipline, config: &SimConfig, runs: Vec<Run>) -> SimResult {
    let n = params.n_sources();
    let sources = (0..n)
        .map(|i| {
            let pooled =
                |m: usize| -> Vec<f64> { runs.iter().flat_map(|r| r.batch_means[i][m].iter().copied()).collect() };
            SourceEstimates {
                source: i + 1,
                mean_aoi: estimate(&pooled(0)),
                second_moment: estimate(&pooled(1)),
                mgf: config
                    .mgf_s_bar
                    .iter()
                    .enumerate()
                    .map(|(k, &s_bar)| MgfEstimate {
                        s_bar,
                        estimate: estimate(&pooled(2 + k)),
                    })
                    .collect(),
            }
        })
        .collect();
    let window = config.horizon * (1.0 - config.warmup_fraction);
    let n_states = runs[0].occupancy_time.len();
    let occupancy = (0..n_states)
        .map(|q| runs.iter().map(|r| r.occupancy_time[q] / window).sum::<f64>() / runs.len() as f64)
        .collect();
    let mut updates = vec![UpdateCounts::default(); n];
    let mut energy = EnergyCounts::default();
    for r in &runs {
        for (acc, u) in updates.iter_mut().zip(&r.updates) {
            acc.generated += u.generated;
            acc.served += u.served;
            acc.preempted += u.preempted;
            acc.discarded += u.discarded;
        }
        energy.harvested += r.energy.harvested;
        energy.discarded += r.energy.discarded;
    }
    SimResult {
        discipline,
        horizon: config.horizon,
        replications: runs.len(),
        batches: config.batches,
        sources,
        occupancy,
        updates,
        energy,
        trace: runs.into_iter().next().and_then(|r| r.trace),
    }
}

/// One replication on stream 0.
pub fn simulate(params: &SystemParams, discipline: Discipline, config: &SimConfig) -> Result<SimResult> {
    params.validate()?;
    config.validate()?;
    let run = run_one(params, discipline, config, 0);
    Ok(aggregate(params, discipline, config, vec![run]))
}

/// `config.replications` independent replications, run in parallel and
/// pooled in replication order.
pub fn replicate(params: &SystemParams, discipline: Discipline, config: &SimConfig) -> Result<SimResult> {
    params.validate()?;
    config.validate()?;
    let runs: Vec<Run> = (0..config.replications as u64)
        .into_par_iter()
        .map(|r| run_one(params, discipline, config, r))
        .collect();
    Ok(aggregate(params, discipline, config, runs))
}

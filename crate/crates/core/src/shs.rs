//! Stochastic hybrid system (SHS) engine for age processes.
//!
//! A model is a finite continuous-time Markov chain whose transitions carry a
//! binary reset map acting on the age vector `x = [x₀, x₁]`, where `x₀` is the
//! age at the monitor and `x₁` the age the monitor would have if the packet in
//! service were delivered now. Both components grow at unit rate between
//! transitions, and a transition `l` resets `x ← x·A_l`.
//!
//! The engine solves three linear systems:
//!
//! * the balance equations for the stationary distribution `π̄`,
//! * `v̄_q·Σ_{out} λ = π̄_q·1 + Σ_{in} λ_l·v̄_{q_l}·A_l` for the first-moment
//!   correlation vectors, whose `x₀` parts sum to the average age,
//! * `v̄ˢ_q·Σ_{out} λ = s·v̄ˢ_q + Σ_{in} λ_l·(v̄ˢ_{q_l}·A_l + π̄_{q_l}·1·Â_l)` for
//!   the exponential correlation vectors, whose `x₀` parts sum to the MGF.
//!
//! Unknowns are laid out as `2·q + c` for state `q` and component `c`.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{AoiError, Result};
use crate::linalg::{self, kahan_sum};

/// Relative residual accepted from the dense solves.
pub const SOLVE_RTOL: f64 = 1e-10;
/// Components of `v̄` below this are treated as genuine infeasibility.
pub const NEGATIVE_TOLERANCE: f64 = -1e-6;

/// Binary 2×2 reset map; the age vector is a row vector, so
/// `x'_c = Σ_k x_k·A[k][c]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResetMap([[u8; 2]; 2]);

impl ResetMap {
    /// `[x₀, x₁] ↦ [x₀, 0]`
    pub const KEEP_AGE: ResetMap = ResetMap([[1, 0], [0, 0]]);
    /// `[x₀, x₁] ↦ [x₀, x₀]`
    pub const COPY_AGE: ResetMap = ResetMap([[1, 1], [0, 0]]);
    /// `[x₀, x₁] ↦ [x₁, 0]`
    pub const DELIVER: ResetMap = ResetMap([[0, 0], [1, 0]]);

    pub fn new(entries: [[u8; 2]; 2]) -> Result<Self> {
        if entries.iter().flatten().any(|&e| e > 1) {
            return Err(AoiError::InvalidModel(format!(
                "reset map entries must be binary: {entries:?}"
            )));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> [[u8; 2]; 2] {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.0[row][col]
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (c, o) in out.iter_mut().enumerate() {
            *o = (0..2).filter(|&k| self.0[k][c] == 1).map(|k| x[k]).sum();
        }
        out
    }

    fn column_is_zero(&self, col: usize) -> bool {
        self.0[0][col] == 0 && self.0[1][col] == 0
    }
}

impl fmt::Display for ResetMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.0;
        write!(f, "[[{a},{b}],[{c},{d}]]")
    }
}

/// `Â(k,j) = 1` iff `k = j` and column `j` of `A` is all zeros.
pub fn hat_matrix(reset: &ResetMap) -> ResetMap {
    let mut out = [[0u8; 2]; 2];
    for (j, row) in out.iter_mut().enumerate() {
        if reset.column_is_zero(j) {
            row[j] = 1;
        }
    }
    ResetMap(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServerState {
    Idle,
    /// Busy with a packet whose source is not tracked.
    Busy,
    /// Busy with a packet from the given 1-based source.
    Serving(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateDescriptor {
    /// 1-based id matching the chain figures.
    pub id: usize,
    pub energy: usize,
    pub server: ServerState,
    /// Row of the chain drawing the state sits on (`r₁` holds idle states).
    pub row: usize,
}

impl fmt::Display for StateDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.server {
            ServerState::Idle => write!(f, "{} (e={}, idle, r{})", self.id, self.energy, self.row),
            ServerState::Busy => write!(f, "{} (e={}, busy, r{})", self.id, self.energy, self.row),
            ServerState::Serving(i) => {
                write!(f, "{} (e={}, source {}, r{})", self.id, self.energy, i, self.row)
            }
        }
    }
}

/// Symbolic name of a transition rate, kept for model dumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Energy,
    /// Arrival rate of one 1-based source.
    Source(usize),
    /// Aggregate arrival rate of every source except the given one.
    OthersOf(usize),
    Service,
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateKind::Energy => write!(f, "eta"),
            RateKind::Source(i) => write!(f, "lambda_{i}"),
            RateKind::OthersOf(i) => write!(f, "lambda_-{i}"),
            RateKind::Service => write!(f, "mu"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// Label `l` in the transition tables.
    pub label: usize,
    /// 0-based index into [`ShsModel::states`].
    pub from: usize,
    pub to: usize,
    pub rate: f64,
    pub rate_kind: RateKind,
    pub reset: ResetMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShsModel {
    states: Vec<StateDescriptor>,
    transitions: Vec<Transition>,
}

impl ShsModel {
    pub fn new(states: Vec<StateDescriptor>, transitions: Vec<Transition>) -> Result<Self> {
        if states.is_empty() {
            return Err(AoiError::InvalidModel("model has no states".into()));
        }
        for t in &transitions {
            if t.from >= states.len() || t.to >= states.len() {
                return Err(AoiError::InvalidModel(format!(
                    "transition {} references a state outside 0..{}",
                    t.label,
                    states.len()
                )));
            }
            if !t.rate.is_finite() || t.rate <= 0.0 {
                return Err(AoiError::InvalidModel(format!(
                    "transition {} has rate {}",
                    t.label, t.rate
                )));
            }
        }
        Ok(Self { states, transitions })
    }

    pub fn states(&self) -> &[StateDescriptor] {
        &self.states
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Copy of the model with one extra transition appended.
    pub fn with_transition(&self, t: Transition) -> Result<Self> {
        let mut transitions = self.transitions.clone();
        transitions.push(t);
        Self::new(self.states.clone(), transitions)
    }

    fn outgoing_rates(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_states()];
        for t in &self.transitions {
            out[t.from] += t.rate;
        }
        out
    }

    /// Deterministic text rendering: one line per state, then one line per
    /// transition with `l`, endpoints (1-based ids), rate name and `A_l`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for st in &self.states {
            s.push_str(&format!("state {st}\n"));
        }
        for t in &self.transitions {
            s.push_str(&format!(
                "l={} {}->{} {} A={}\n",
                t.label, self.states[t.from].id, self.states[t.to].id, t.rate_kind, t.reset
            ));
        }
        s
    }

    /// States not strongly connected with the first state, as 1-based ids.
    pub fn disconnected_states(&self) -> Vec<usize> {
        let n = self.n_states();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(q) = stack.pop() {
                for t in &self.transitions {
                    let (a, b) = if forward { (t.from, t.to) } else { (t.to, t.from) };
                    if a == q && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            seen
        };
        let fwd = reach(true);
        let bwd = reach(false);
        (0..n)
            .filter(|&q| !(fwd[q] && bwd[q]))
            .map(|q| self.states[q].id)
            .collect()
    }

    /// `L` with `L·v = rhs` encoding the correlation-vector equations at
    /// `s = 0` (callers subtract `s·I`).
    fn correlation_operator(&self) -> DMatrix<f64> {
        let n = 2 * self.n_states();
        let mut l = DMatrix::zeros(n, n);
        for t in &self.transitions {
            for c in 0..2 {
                l[(2 * t.from + c, 2 * t.from + c)] += t.rate;
                for k in 0..2 {
                    if t.reset.get(k, c) == 1 {
                        l[(2 * t.to + c, 2 * t.from + k)] -= t.rate;
                    }
                }
            }
        }
        l
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub pi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentVectors {
    pub v: Vec<[f64; 2]>,
    /// Smallest raw component before clamping to zero.
    pub raw_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MgfVectors {
    pub s_value: f64,
    pub vs: Vec<[f64; 2]>,
    /// Convergence bound `s₀` (same units as `s_value`).
    pub bound: f64,
}

/// Stationary distribution. One balance row is replaced by normalization and
/// all balance rows are re-checked afterwards.
pub fn steady_state(model: &ShsModel) -> Result<SteadyState> {
    let unreachable = model.disconnected_states();
    if !unreachable.is_empty() {
        return Err(AoiError::Reducible { unreachable });
    }
    let n = model.n_states();
    let out = model.outgoing_rates();
    // Generator transpose: row q holds inflow into q minus outflow from q.
    let mut g = DMatrix::zeros(n, n);
    for t in &model.transitions {
        g[(t.to, t.from)] += t.rate;
        g[(t.from, t.from)] -= t.rate;
    }
    let mut a = g.clone();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let pi = linalg::solve(&a, &b, "steady-state balance", SOLVE_RTOL)?;
    let scale = out.iter().cloned().fold(0.0, f64::max);
    let residual = (&g * &pi).amax();
    if residual > SOLVE_RTOL * scale {
        return Err(AoiError::Singular(format!(
            "balance residual {residual:e} after normalization"
        )));
    }
    let min = pi.min();
    if min < -SOLVE_RTOL {
        return Err(AoiError::Singular(format!("negative stationary probability {min:e}")));
    }
    Ok(SteadyState {
        pi: pi.iter().map(|p| p.max(0.0)).collect(),
    })
}

pub fn first_moment_vectors(model: &ShsModel, ss: &SteadyState) -> Result<MomentVectors> {
    let l = model.correlation_operator();
    let rhs = DVector::from_iterator(2 * model.n_states(), ss.pi.iter().flat_map(|&p| [p, p]));
    let v = linalg::solve(&l, &rhs, "first-moment correlation system", SOLVE_RTOL)?;
    let raw_min = v.min();
    if raw_min < NEGATIVE_TOLERANCE {
        return Err(AoiError::NegativeSolution { min: raw_min });
    }
    Ok(MomentVectors {
        v: pairs(&v, true),
        raw_min,
    })
}

/// Average age `Σ_q v̄_q0`.
pub fn average_aoi(model: &ShsModel) -> Result<f64> {
    let ss = steady_state(model)?;
    let mv = first_moment_vectors(model, &ss)?;
    Ok(kahan_sum(mv.v.iter().map(|v| v[0])))
}

fn mgf_rhs(model: &ShsModel, ss: &SteadyState) -> DVector<f64> {
    let mut rhs = DVector::zeros(2 * model.n_states());
    for t in &model.transitions {
        let hat = hat_matrix(&t.reset);
        for c in 0..2 {
            if hat.get(c, c) == 1 {
                rhs[2 * t.to + c] += t.rate * ss.pi[t.from];
            }
        }
    }
    rhs
}

/// Indices of the unknowns the `x₀` components depend on, including the `x₀`
/// components themselves.
fn age_ancestors(l: &DMatrix<f64>, n_states: usize) -> Vec<usize> {
    let mut set: BTreeSet<usize> = (0..n_states).map(|q| 2 * q).collect();
    let mut stack: Vec<usize> = set.iter().copied().collect();
    while let Some(i) = stack.pop() {
        for j in 0..l.ncols() {
            if j != i && l[(i, j)] != 0.0 && set.insert(j) {
                stack.push(j);
            }
        }
    }
    set.into_iter().collect()
}

/// Largest `s` for which the exponential correlation system keeps a positive
/// solution, i.e. the MGF convergence bound `s₀`.
///
/// The operator restricted to the unknowns feeding `x₀` is a Z-matrix, so
/// `L − s·I` stays a nonsingular M-matrix exactly for `s` below its smallest
/// real eigenvalue. That property is monotone in `s` and is bisected with a
/// pivot-sign test; the returned value is the inside end of the bracket.
pub fn mgf_domain_bound(model: &ShsModel) -> Result<f64> {
    let l = model.correlation_operator();
    let idx = age_ancestors(&l, model.n_states());
    let sub = l.select_rows(&idx).select_columns(&idx);
    let eye = DMatrix::<f64>::identity(idx.len(), idx.len());
    let valid = |s: f64| linalg::is_nonsingular_m_matrix(&(&sub - &eye * s));
    if !valid(0.0) {
        return Err(AoiError::NegativeSolution { min: f64::NAN });
    }
    let mut lo = 0.0;
    let mut hi = (0..idx.len()).map(|i| sub[(i, i)]).fold(f64::INFINITY, f64::min);
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if valid(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

pub fn mgf_vectors(model: &ShsModel, ss: &SteadyState, s: f64) -> Result<MgfVectors> {
    let bound = mgf_domain_bound(model)?;
    if s >= bound {
        return Err(AoiError::OutsideConvergence { s, bound });
    }
    let vs = solve_mgf_system(model, ss, s)?;
    if s > 0.0 {
        if let Some(bad) = vs.iter().map(|v| v[0]).find(|&v| v <= 0.0) {
            return Err(AoiError::Singular(format!(
                "exponential correlation component {bad:e} at s = {s} below bound {bound}"
            )));
        }
    }
    Ok(MgfVectors { s_value: s, vs, bound })
}

fn solve_mgf_system(model: &ShsModel, ss: &SteadyState, s: f64) -> Result<Vec<[f64; 2]>> {
    let n = 2 * model.n_states();
    let a = model.correlation_operator() - DMatrix::<f64>::identity(n, n) * s;
    let rhs = mgf_rhs(model, ss);
    let v = linalg::solve(&a, &rhs, "exponential correlation system", SOLVE_RTOL)?;
    Ok(pairs(&v, false))
}

/// MGF of the age, `Σ_q v̄ˢ_q0`, at (unnormalized) `s`.
pub fn mgf(model: &ShsModel, s: f64) -> Result<f64> {
    let ss = steady_state(model)?;
    let mv = mgf_vectors(model, &ss, s)?;
    Ok(kahan_sum(mv.vs.iter().map(|v| v[0])))
}

/// Evaluator for repeated MGF queries on one model: the stationary
/// distribution and convergence bound are computed once.
#[derive(Debug, Clone)]
pub struct MgfEvaluator<'a> {
    model: &'a ShsModel,
    ss: SteadyState,
    bound: f64,
}

impl<'a> MgfEvaluator<'a> {
    pub fn new(model: &'a ShsModel) -> Result<Self> {
        let ss = steady_state(model)?;
        let bound = mgf_domain_bound(model)?;
        Ok(Self { model, ss, bound })
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn steady_state(&self) -> &SteadyState {
        &self.ss
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        if s >= self.bound {
            return Err(AoiError::OutsideConvergence { s, bound: self.bound });
        }
        let vs = solve_mgf_system(self.model, &self.ss, s)?;
        Ok(kahan_sum(vs.iter().map(|v| v[0])))
    }
}

/// First and second moments of the age straight from the linear systems:
/// differentiating `(L − s·I)·v̄ˢ = r` gives `v̄ˢ' = (L − s·I)⁻¹·v̄ˢ` and
/// `v̄ˢ'' = 2·(L − s·I)⁻¹·v̄ˢ'`, with `v̄⁰_q = [π̄_q, π̄_q]`.
pub fn exact_moments(model: &ShsModel) -> Result<(f64, f64)> {
    let ss = steady_state(model)?;
    let l = model.correlation_operator();
    let v0 = DVector::from_iterator(2 * model.n_states(), ss.pi.iter().flat_map(|&p| [p, p]));
    let lu = l.lu();
    let d1 = lu
        .solve(&v0)
        .ok_or_else(|| AoiError::Singular("moment system".into()))?;
    let d2 = lu
        .solve(&(&d1 * 2.0))
        .ok_or_else(|| AoiError::Singular("moment system".into()))?;
    let age = |v: &DVector<f64>| kahan_sum((0..model.n_states()).map(|q| v[2 * q]));
    Ok((age(&d1), age(&d2)))
}

/// `k`-th moment `μ⁻ᵏ·dᵏM/ds̄ᵏ` at `s̄ = 0` of a normalized MGF, by central
/// differences refined with Richardson extrapolation. `mgf_fn` is evaluated
/// on `[-h0, h0]`.
pub fn moment_from_mgf<F>(mgf_fn: F, k: u32, mu: f64, h0: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    richardson_derivative(mgf_fn, k, h0).map(|d| d / mu.powi(k as i32))
}

/// Default starting step for [`moment_from_mgf`].
pub const DEFAULT_DIFF_STEP: f64 = 0.02;

fn richardson_derivative<F>(mut f: F, k: u32, h0: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    const LEVELS: usize = 6;
    if !(h0 > 0.0) {
        return Err(AoiError::Precondition(format!("step must be positive, got {h0}")));
    }
    let f0 = if k == 2 { f(0.0)? } else { 0.0 };
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(LEVELS);
    let mut h = h0;
    for i in 0..LEVELS {
        let (fp, fm) = (f(h)?, f(-h)?);
        let d = match k {
            1 => (fp - fm) / (2.0 * h),
            2 => (fp - 2.0 * f0 + fm) / (h * h),
            _ => {
                return Err(AoiError::Precondition(format!(
                    "only first and second moments are supported, got k = {k}"
                )))
            }
        };
        let mut row = vec![d];
        let mut factor = 1.0;
        for j in 1..=i {
            factor *= 4.0;
            let prev = &table[i - 1];
            row.push((factor * row[j - 1] - prev[j - 1]) / (factor - 1.0));
        }
        table.push(row);
        h *= 0.5;
    }
    let last = table[LEVELS - 1][LEVELS - 1];
    if !last.is_finite() {
        return Err(AoiError::NonFinite("finite-difference derivative".into()));
    }
    Ok(last)
}

fn pairs(v: &DVector<f64>, clamp: bool) -> Vec<[f64; 2]> {
    v.as_slice()
        .chunks(2)
        .map(|c| {
            if clamp {
                [c[0].max(0.0), c[1].max(0.0)]
            } else {
                [c[0], c[1]]
            }
        })
        .collect()
}

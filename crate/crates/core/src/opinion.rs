//! Gaussian fuzzy opinions and the bounded-confidence primitives shared by
//! every engine: membership, closeness, neighbor sets and averaging weights.
//!
//! Agent ids are contiguous `0..n` indices. Every sum over a neighbor set
//! runs in ascending id order so runs are bit-for-bit reproducible.

use crate::error::{Error, Result};
use crate::real::Real;

pub type AgentId = usize;

/// A Gaussian fuzzy set `exp(-(x - center)^2 / sigma^2)`.
///
/// `center` is the opinion, `sigma` the agent's uncertainty about it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyOpinion<T = f64> {
    pub center: T,
    pub sigma: T,
}

impl<T: Real> FuzzyOpinion<T> {
    pub fn new(center: T, sigma: T) -> Result<Self> {
        let op = FuzzyOpinion { center, sigma };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() {
            return Err(Error::config(format!("center must be finite, got {}", self.center)));
        }
        if !self.sigma.is_finite() || self.sigma < T::zero() {
            return Err(Error::config(format!(
                "sigma must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Per-agent confidence threshold `d` and uncertainty gain `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentParams<T = f64> {
    pub d: T,
    pub b: T,
}

impl<T: Real> AgentParams<T> {
    pub fn new(d: T, b: T) -> Result<Self> {
        let p = AgentParams { d, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d >= T::zero() && self.d <= T::one()) {
            return Err(Error::config(format!("d must lie in [0, 1], got {}", self.d)));
        }
        if !self.b.is_finite() || self.b <= T::zero() {
            return Err(Error::config(format!("b must be finite and > 0, got {}", self.b)));
        }
        Ok(())
    }
}

/// One time slice of a bounded-confidence network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState<T = f64> {
    agents: Vec<FuzzyOpinion<T>>,
    params: Vec<AgentParams<T>>,
}

impl<T: Real> NetworkState<T> {
    pub fn new(agents: Vec<FuzzyOpinion<T>>, params: Vec<AgentParams<T>>) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::config("a network needs at least one agent"));
        }
        if agents.len() != params.len() {
            return Err(Error::config(format!(
                "{} agents but {} parameter entries",
                agents.len(),
                params.len()
            )));
        }
        for (i, (a, p)) in agents.iter().zip(&params).enumerate() {
            a.validate()
                .and_then(|_| p.validate())
                .map_err(|e| Error::config(format!("agent {i}: {e}")))?;
        }
        Ok(NetworkState { agents, params })
    }

    /// All agents share the same parameters.
    pub fn uniform(agents: Vec<FuzzyOpinion<T>>, params: AgentParams<T>) -> Result<Self> {
        let n = agents.len();
        Self::new(agents, vec![params; n])
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn agents(&self) -> &[FuzzyOpinion<T>] {
        &self.agents
    }

    pub fn params(&self) -> &[AgentParams<T>] {
        &self.params
    }

    pub fn agent(&self, id: AgentId) -> Result<&FuzzyOpinion<T>> {
        self.agents.get(id).ok_or(Error::Address { id, len: self.len() })
    }

    pub fn centers(&self) -> impl Iterator<Item = T> + '_ {
        self.agents.iter().map(|a| a.center)
    }

    pub fn sigmas(&self) -> impl Iterator<Item = T> + '_ {
        self.agents.iter().map(|a| a.sigma)
    }

    /// Replaces every agent's confidence threshold.
    pub fn set_threshold(&mut self, d: T) -> Result<()> {
        for p in &mut self.params {
            AgentParams::new(d, p.b)?;
            p.d = d;
        }
        Ok(())
    }

    /// Engines produce the next slice through here; parameters carry over.
    pub(crate) fn with_agents(&self, agents: Vec<FuzzyOpinion<T>>) -> Self {
        debug_assert_eq!(agents.len(), self.agents.len());
        NetworkState { agents, params: self.params.clone() }
    }
}

/// Membership grade of `x` in the fuzzy opinion.
///
/// With `sigma == 0` the set degenerates to the indicator of its center.
pub fn membership<T: Real>(op: &FuzzyOpinion<T>, x: T) -> T {
    let dx = x - op.center;
    if op.sigma == T::zero() {
        return if dx == T::zero() { T::one() } else { T::zero() };
    }
    (-(dx * dx) / (op.sigma * op.sigma)).exp()
}

/// Height of the intersection of two Gaussian opinions,
/// `exp(-(c_a - c_b)^2 / (s_a + s_b)^2)`.
///
/// Zero total uncertainty gives the indicator of equal centers.
pub fn closeness<T: Real>(a: &FuzzyOpinion<T>, b: &FuzzyOpinion<T>) -> T {
    let dx = a.center - b.center;
    let spread = a.sigma + b.sigma;
    if spread == T::zero() {
        return if dx == T::zero() { T::one() } else { T::zero() };
    }
    (-(dx * dx) / (spread * spread)).exp()
}

/// Ids `j` with `closeness(i, j) >= d_i`, ascending. Always contains `i`.
pub fn neighbor_set<T: Real>(i: AgentId, state: &NetworkState<T>) -> Result<Vec<AgentId>> {
    state.agent(i)?;
    let mut out = Vec::new();
    neighbors_into(state.agents(), i, state.params()[i].d, &mut out);
    Ok(out)
}

/// Row `i` of the averaging matrix: `1/|N_i|` on the neighbor set, zero elsewhere.
pub fn confidence_weights<T: Real>(i: AgentId, state: &NetworkState<T>) -> Result<Vec<T>> {
    let nbrs = neighbor_set(i, state)?;
    let w = T::one() / T::from_count(nbrs.len());
    let mut row = vec![T::zero(); state.len()];
    for j in nbrs {
        row[j] = w;
    }
    Ok(row)
}

pub(crate) fn neighbors_into<T: Real>(
    agents: &[FuzzyOpinion<T>],
    i: AgentId,
    d: T,
    out: &mut Vec<AgentId>,
) {
    out.clear();
    let me = &agents[i];
    out.extend((0..agents.len()).filter(|&j| j == i || closeness(me, &agents[j]) >= d));
}

/// Mean of `value(j)` over `members`, taken as offsets from the first member
/// plus any `extra` terms. Identical inputs reproduce their common value
/// exactly, and two callers with the same member list get the same bits.
pub(crate) fn offset_mean<T: Real>(
    members: &[AgentId],
    value: impl Fn(AgentId) -> T,
    extra: Option<T>,
) -> T {
    let base = value(members[0]);
    let mut acc = T::zero();
    for &j in members {
        acc = acc + (value(j) - base);
    }
    let mut count = members.len();
    if let Some(x) = extra {
        acc = acc + (x - base);
        count += 1;
    }
    base + acc / T::from_count(count)
}

//! Flat bounded-confidence fuzzy opinion networks.
//!
//! Every agent averages the centers and uncertainties of the agents it
//! currently trusts, then adds an uncertainty input measured against either
//! its neighborhood mean (local reference) or an exogenous signal (external
//! reference). Updates are synchronous: the whole time-`t` slice is read
//! before any agent is written.

use crate::error::{Error, Result};
use crate::opinion::{neighbors_into, offset_mean, AgentId, FuzzyOpinion, NetworkState};
use crate::real::Real;
use crate::trajectory::TrajectoryRecord;

/// Exogenous reference values `g_i(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExternalSignal<T = f64> {
    /// One fixed value per agent.
    Constant(Vec<T>),
    /// `rows[t][i]`.
    Series(Vec<Vec<T>>),
}

impl<T: Real> ExternalSignal<T> {
    pub fn value(&self, i: AgentId, t: usize) -> Option<T> {
        match self {
            ExternalSignal::Constant(v) => v.get(i).copied(),
            ExternalSignal::Series(rows) => rows.get(t).and_then(|r| r.get(i)).copied(),
        }
    }
}

/// What an agent measures its own opinion against when computing its
/// uncertainty input. `Leader` only has meaning inside a leader-follower group.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceScheme<T = f64> {
    Local,
    External(ExternalSignal<T>),
    Leader,
}

impl<T> ReferenceScheme<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ReferenceScheme::Local => "local",
            ReferenceScheme::External(_) => "external",
            ReferenceScheme::Leader => "leader",
        }
    }
}

/// One synchronous step of the flat network.
pub fn step_bcfon<T: Real>(
    state: &NetworkState<T>,
    scheme: &ReferenceScheme<T>,
    t: usize,
) -> Result<NetworkState<T>> {
    if let ReferenceScheme::Leader = scheme {
        return Err(Error::config("the leader reference scheme needs a leader-follower group"));
    }
    let agents = state.agents();
    let mut next = Vec::with_capacity(agents.len());
    let mut nbrs = Vec::new();
    for (i, (me, p)) in agents.iter().zip(state.params()).enumerate() {
        neighbors_into(agents, i, p.d, &mut nbrs);
        let center = offset_mean(&nbrs, |j| agents[j].center, None);
        let sigma_avg = offset_mean(&nbrs, |j| agents[j].sigma, None);
        let reference = match scheme {
            ReferenceScheme::Local => center,
            ReferenceScheme::External(g) => g.value(i, t).ok_or_else(|| {
                Error::config(format!("external signal has no value for agent {i} at step {t}"))
            })?,
            ReferenceScheme::Leader => unreachable!(),
        };
        let u = p.b * (me.center - reference).abs();
        next.push(FuzzyOpinion { center, sigma: sigma_avg + u });
    }
    Ok(state.with_agents(next))
}

/// Runs `steps` synchronous steps and records every slice, `t = 0` included.
pub fn run_bcfon<T: Real>(
    initial: &NetworkState<T>,
    scheme: &ReferenceScheme<T>,
    steps: usize,
) -> Result<TrajectoryRecord<T>> {
    let mut record = TrajectoryRecord::flat(initial.len());
    run_into(initial, scheme, 0, steps, &mut record)?;
    Ok(record)
}

/// Advances from `state` at step `t0`, appending steps `t0+1 ..= t0+steps`.
pub(crate) fn run_into<T: Real>(
    state: &NetworkState<T>,
    scheme: &ReferenceScheme<T>,
    t0: usize,
    steps: usize,
    record: &mut TrajectoryRecord<T>,
) -> Result<NetworkState<T>> {
    if record.is_empty() {
        record.push(t0, state.agents());
    }
    let mut cur = state.clone();
    for t in t0..t0 + steps {
        cur = step_bcfon(&cur, scheme, t)?;
        record.push(t + 1, cur.agents());
    }
    Ok(cur)
}

/// Groups agents whose sorted centers form runs with consecutive gaps `<= tol`.
///
/// Blocks come back in ascending center order; ids inside a block ascend.
pub fn detect_consensus_partition<T: Real>(state: &NetworkState<T>, tol: T) -> Vec<Vec<AgentId>> {
    let centers: Vec<T> = state.centers().collect();
    partition_by_gap(&centers, tol)
}

pub fn partition_by_gap<T: Real>(centers: &[T], tol: T) -> Vec<Vec<AgentId>> {
    let tol = tol.max(T::zero());
    let mut order: Vec<AgentId> = (0..centers.len()).collect();
    order.sort_by(|&a, &b| centers[a].partial_cmp(&centers[b]).expect("finite centers"));
    let mut blocks: Vec<Vec<AgentId>> = Vec::new();
    let mut prev: Option<T> = None;
    for id in order {
        let c = centers[id];
        match (prev, blocks.last_mut()) {
            (Some(p), Some(block)) if c - p <= tol => block.push(id),
            _ => blocks.push(vec![id]),
        }
        prev = Some(c);
    }
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks
}

/// Report gap used when the caller does not pick one: 5% of the center range.
pub fn default_gap<T: Real>(centers: impl IntoIterator<Item = T>) -> T {
    let (lo, hi) = centers
        .into_iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), c| (lo.min(c), hi.max(c)));
    if lo > hi {
        return T::zero();
    }
    T::lit(0.05) * (hi - lo)
}

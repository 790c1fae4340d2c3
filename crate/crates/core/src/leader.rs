//! Basic leader-follower groups.
//!
//! `n` followers are connected among themselves by bounded confidence and
//! all hear one exogenous leader. The leader enters each follower's center
//! average as one extra term and never enters a neighbor set or the
//! uncertainty average.
//!
//! Once the followers agree (step `t_N`) the group collapses to a scalar
//! recurrence with ratio `n/(n+1)`; the `predict_*` functions give the
//! closed forms of that recurrence and serve as oracles for simulated runs.

use crate::bcfon::ReferenceScheme;
use crate::error::{Error, Result};
use crate::opinion::{neighbors_into, offset_mean, AgentParams, FuzzyOpinion, NetworkState};
use crate::real::Real;
use crate::trajectory::{ConsensusMark, TrajectoryRecord};

/// The leader's opinion over time.
#[derive(Debug, Clone, PartialEq)]
pub enum LeaderSignal<T = f64> {
    Constant(T),
    Series(Vec<T>),
}

impl<T: Real> LeaderSignal<T> {
    pub fn at(&self, t: usize) -> Result<T> {
        match self {
            LeaderSignal::Constant(x) => Ok(*x),
            LeaderSignal::Series(xs) => xs
                .get(t)
                .copied()
                .ok_or_else(|| Error::config(format!("leader series has no value at step {t}"))),
        }
    }

    pub fn constant(&self) -> Option<T> {
        match self {
            LeaderSignal::Constant(x) => Some(*x),
            LeaderSignal::Series(_) => None,
        }
    }
}

/// Reference a follower measures its uncertainty input against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FollowerReference {
    /// Mean center of the follower's neighbors.
    Local,
    /// The leader's center.
    Leader,
}

impl FollowerReference {
    pub fn from_scheme<T>(scheme: &ReferenceScheme<T>) -> Result<Self> {
        match scheme {
            ReferenceScheme::Local => Ok(FollowerReference::Local),
            ReferenceScheme::Leader => Ok(FollowerReference::Leader),
            ReferenceScheme::External(_) => Err(Error::config(
                "the external reference scheme is not defined for leader-follower groups",
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FollowerReference::Local => "local",
            FollowerReference::Leader => "leader",
        }
    }
}

/// Dynamics of one basic leader-follower group.
///
/// `d` and `b` seed follower states built with [`BlfgConfig::followers`];
/// stepping itself reads each follower's own parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BlfgConfig<T = f64> {
    pub d: T,
    pub b: T,
    pub reference: FollowerReference,
    pub leader: LeaderSignal<T>,
}

impl<T: Real> BlfgConfig<T> {
    pub fn new(d: T, b: T, scheme: &ReferenceScheme<T>, leader: LeaderSignal<T>) -> Result<Self> {
        let reference = FollowerReference::from_scheme(scheme)?;
        check_follower_params(&AgentParams::new(d, b)?)?;
        Ok(BlfgConfig { d, b, reference, leader })
    }

    pub fn followers(&self, opinions: Vec<FuzzyOpinion<T>>) -> Result<NetworkState<T>> {
        NetworkState::uniform(opinions, AgentParams { d: self.d, b: self.b })
    }
}

fn check_follower_params<T: Real>(p: &AgentParams<T>) -> Result<()> {
    if p.d >= T::one() {
        return Err(Error::config(format!(
            "followers need a confidence threshold d < 1, got {}",
            p.d
        )));
    }
    Ok(())
}

/// One synchronous step of every follower, given the leader's time-`t` center.
pub fn step_blfg<T: Real>(
    followers: &NetworkState<T>,
    leader_center: T,
    config: &BlfgConfig<T>,
) -> Result<NetworkState<T>> {
    for p in followers.params() {
        check_follower_params(p)?;
    }
    if !leader_center.is_finite() {
        return Err(Error::config("leader opinion must be finite"));
    }
    let mut next = Vec::with_capacity(followers.len());
    group_step(followers.agents(), followers.params(), leader_center, config.reference, &mut next);
    Ok(followers.with_agents(next))
}

/// Follower update shared with the hierarchical engine. Appends to `out`.
pub(crate) fn group_step<T: Real>(
    agents: &[FuzzyOpinion<T>],
    params: &[AgentParams<T>],
    leader: T,
    reference: FollowerReference,
    out: &mut Vec<FuzzyOpinion<T>>,
) {
    let mut nbrs = Vec::new();
    for (i, (me, p)) in agents.iter().zip(params).enumerate() {
        neighbors_into(agents, i, p.d, &mut nbrs);
        let center = offset_mean(&nbrs, |j| agents[j].center, Some(leader));
        let sigma_avg = offset_mean(&nbrs, |j| agents[j].sigma, None);
        let reference_center = match reference {
            FollowerReference::Local => offset_mean(&nbrs, |j| agents[j].center, None),
            FollowerReference::Leader => leader,
        };
        let u = p.b * (me.center - reference_center).abs();
        out.push(FuzzyOpinion { center, sigma: sigma_avg + u });
    }
}

/// Runs `steps` steps and records every slice including `t = 0`.
pub fn run_blfg<T: Real>(
    initial: &NetworkState<T>,
    config: &BlfgConfig<T>,
    steps: usize,
) -> Result<TrajectoryRecord<T>> {
    let mut record = TrajectoryRecord::flat(initial.len());
    record.push(0, initial.agents());
    let mut cur = initial.clone();
    for t in 0..steps {
        cur = step_blfg(&cur, config.leader.at(t)?, config)?;
        record.push(t + 1, cur.agents());
    }
    Ok(record)
}

/// Outcome of consensus detection on a follower trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusReport<T = f64> {
    /// First recorded step from which every later step agrees within tolerance.
    pub t_n: Option<usize>,
    /// Common opinion one step after `t_n`, when that step was recorded.
    pub next: Option<FuzzyOpinion<T>>,
}

impl<T: Real> ConsensusReport<T> {
    pub fn mark(&self, scope: impl Into<String>) -> Option<ConsensusMark> {
        self.t_n.map(|t| ConsensusMark { scope: scope.into(), t })
    }
}

/// Default agreement tolerance: `1e-9 * max(1, initial center spread)`.
pub fn default_consensus_tol<T: Real>(initial_centers: impl IntoIterator<Item = T>) -> T {
    T::lit(1e-9) * T::one().max(spread(initial_centers))
}

fn spread<T: Real>(xs: impl IntoIterator<Item = T>) -> T {
    let (lo, hi) = xs
        .into_iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if lo > hi {
        T::zero()
    } else {
        hi - lo
    }
}

/// Locates the consensus time of a follower trajectory.
///
/// A step qualifies when the largest pairwise center difference and the
/// largest pairwise sigma difference are both `<= tol`; `t_n` is the first
/// qualifying step such that every later recorded step qualifies as well.
pub fn detect_consensus_time<T: Real>(traj: &TrajectoryRecord<T>, tol: T) -> ConsensusReport<T> {
    let agrees = |k: usize| {
        let f = traj.frame(k);
        spread(f.iter().map(|s| s.center)) <= tol && spread(f.iter().map(|s| s.sigma)) <= tol
    };
    let mut first = traj.len();
    while first > 0 && agrees(first - 1) {
        first -= 1;
    }
    if first == traj.len() {
        return ConsensusReport { t_n: None, next: None };
    }
    let t_n = traj.time(first);
    let next = traj.index_of(t_n + 1).map(|k| {
        let s = traj.frame(k)[0];
        FuzzyOpinion { center: s.center, sigma: s.sigma }
    });
    ConsensusReport { t_n: Some(t_n), next }
}

fn ratio<T: Real>(n: usize) -> T {
    T::from_count(n) / T::from_count(n + 1)
}

fn ratio_pow<T: Real>(n: usize, t_offset: usize) -> T {
    match i32::try_from(t_offset) {
        Ok(k) => ratio::<T>(n).powi(k),
        Err(_) => ratio::<T>(n).powf(T::from_count(t_offset)),
    }
}

/// Common center `t_offset` steps after `t_N + 1` under a constant leader.
pub fn predict_center<T: Real>(consensus_center: T, leader: T, n: usize, t_offset: usize) -> T {
    leader + ratio_pow::<T>(n, t_offset) * (consensus_center - leader)
}

/// Common sigma `t_offset` steps after `t_N + 1` under the leader reference
/// scheme: `sigma + b*|center - leader| * sum_{m < t_offset} (n/(n+1))^m`.
pub fn predict_sigma_leader_ref<T: Real>(
    consensus_sigma: T,
    consensus_center: T,
    leader: T,
    b: T,
    n: usize,
    t_offset: usize,
) -> T {
    let partial = T::from_count(n + 1) * (T::one() - ratio_pow::<T>(n, t_offset));
    consensus_sigma + b * (consensus_center - leader).abs() * partial
}

/// Limit of [`predict_sigma_leader_ref`] as `t_offset` grows without bound.
pub fn predict_sigma_limit<T: Real>(consensus_sigma: T, consensus_center: T, leader: T, b: T, n: usize) -> T {
    consensus_sigma + b * (consensus_center - leader).abs() * T::from_count(n + 1)
}

/// Steps for the post-consensus error to shrink by the factor `epsilon`.
pub fn steps_to_error_fraction(n: usize, epsilon: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("a group needs at least one follower"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let n = n as f64;
    Ok(epsilon.ln() / (n.ln() - (n + 1.0).ln()))
}

/// Row-stochastic `(n+1) x (n+1)` matrix of a leader-follower step, with the
/// leader as the last row and column.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<T = f64> {
    rows: Vec<Vec<T>>,
}

/// Measured quantities behind the three consensus conditions on a weight matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport<T = f64> {
    pub followers: usize,
    pub max_row_sum_error: T,
    pub min_diagonal: T,
    pub min_positive_entry: T,
    /// Smallest follower weight on the leader column.
    pub min_leader_entry: T,
    /// Every pair of nonempty saturated index sets intersects.
    pub saturated_sets_intersect: bool,
}

impl<T: Real> LemmaReport<T> {
    /// Lower bound `1/(n+2)` on positive entries.
    pub fn delta(&self) -> T {
        T::one() / T::from_count(self.followers + 2)
    }

    pub fn holds(&self) -> bool {
        let floor = self.delta() * (T::one() - T::lit(1e-12));
        self.max_row_sum_error <= T::lit(1e-12)
            && self.min_diagonal > T::zero()
            && self.min_positive_entry >= floor
            && self.min_leader_entry >= floor
            && self.saturated_sets_intersect
    }
}

impl<T: Real> WeightMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 || rows.iter().any(|r| r.len() != m) {
            return Err(Error::config("weight matrix must be square and nonempty"));
        }
        Ok(WeightMatrix { rows })
    }

    /// Matrix of the follower center update for the given time-`t` slice.
    pub fn leader_follower(followers: &NetworkState<T>) -> Self {
        Self::from_slice(followers.agents(), followers.params())
    }

    pub(crate) fn from_slice(agents: &[FuzzyOpinion<T>], params: &[AgentParams<T>]) -> Self {
        let n = agents.len();
        let mut rows = vec![vec![T::zero(); n + 1]; n + 1];
        let mut nbrs = Vec::new();
        for (i, row) in rows.iter_mut().enumerate().take(n) {
            neighbors_into(agents, i, params[i].d, &mut nbrs);
            let w = T::one() / T::from_count(nbrs.len() + 1);
            for &j in &nbrs {
                row[j] = w;
            }
            row[n] = w;
        }
        rows[n][n] = T::one();
        WeightMatrix { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn lemma_report(&self) -> LemmaReport<T> {
        let m = self.dim();
        let last = m - 1;
        let mut max_row_sum_error = T::zero();
        let mut min_diagonal = T::infinity();
        let mut min_positive_entry = T::infinity();
        let mut min_leader_entry = T::infinity();
        for (i, row) in self.rows.iter().enumerate() {
            let sum = row.iter().fold(T::zero(), |acc, &w| acc + w);
            max_row_sum_error = max_row_sum_error.max((sum - T::one()).abs());
            min_diagonal = min_diagonal.min(row[i]);
            for &w in row.iter().filter(|w| **w > T::zero()) {
                min_positive_entry = min_positive_entry.min(w);
            }
            if i < last {
                min_leader_entry = min_leader_entry.min(row[last]);
            }
        }
        LemmaReport {
            followers: last,
            max_row_sum_error,
            min_diagonal,
            min_positive_entry,
            min_leader_entry,
            saturated_sets_intersect: self.sink_class_count() == 1,
        }
    }

    /// Number of closed strongly connected classes of the positive-entry graph.
    ///
    /// Each nonempty saturated set contains a closed class and distinct closed
    /// classes are disjoint saturated sets, so all saturated sets intersect
    /// exactly when this is one.
    pub fn sink_class_count(&self) -> usize {
        let m = self.dim();
        let adj: Vec<Vec<usize>> = self
            .rows
            .iter()
            .map(|r| (0..m).filter(|&j| r[j] > T::zero()).collect())
            .collect();
        let comp = strongly_connected(&adj);
        let classes = comp.iter().copied().max().map_or(0, |c| c + 1);
        let mut closed = vec![true; classes];
        for (i, out) in adj.iter().enumerate() {
            if out.iter().any(|&j| comp[j] != comp[i]) {
                closed[comp[i]] = false;
            }
        }
        closed.into_iter().filter(|c| *c).count()
    }
}

/// Kosaraju's algorithm; returns a class index per node.
fn strongly_connected(adj: &[Vec<usize>]) -> Vec<usize> {
    let m = adj.len();
    let mut order = Vec::with_capacity(m);
    let mut seen = vec![false; m];
    for root in 0..m {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((v, next)) = stack.last_mut() {
            if let Some(&w) = adj[*v].get(*next) {
                *next += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(*v);
                stack.pop();
            }
        }
    }
    let mut rev = vec![Vec::new(); m];
    for (v, out) in adj.iter().enumerate() {
        for &w in out {
            rev[w].push(v);
        }
    }
    let mut comp = vec![usize::MAX; m];
    let mut classes = 0;
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = classes;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in &rev[v] {
                if comp[w] == usize::MAX {
                    comp[w] = classes;
                    stack.push(w);
                }
            }
        }
        classes += 1;
    }
    comp
}

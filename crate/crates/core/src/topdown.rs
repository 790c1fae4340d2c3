//! Top-down hierarchical networks: a tree of leader-follower groups.
//!
//! Levels are numbered from the bottom: level 1 holds the rank and file,
//! level `L` is the single top leader whose opinion is held constant. Every
//! node below the top follows exactly one leader one level up and may lead
//! one group one level down. All groups step together from the same global
//! time-`t` snapshot, so a mid-level node moves as a follower while its
//! time-`t` center is what its own group hears.

use crate::bcfon::ReferenceScheme;
use crate::error::{Error, Result};
use crate::leader::{group_step, FollowerReference, WeightMatrix};
use crate::opinion::{AgentParams, FuzzyOpinion};
use crate::real::Real;
use crate::trajectory::{AgentLabel, TrajectoryRecord};
use std::ops::Range;

pub type NodeId = usize;

/// Where a node sits: level (1-based, from the bottom), group within the
/// level and index within the group (both 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeAddress {
    pub level: usize,
    pub group: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeaderRef {
    Top,
    Node(NodeId),
}

/// Group blueprint used to assemble a hierarchy level by level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupDef {
    pub size: usize,
    /// Index of the leading node among the nodes of the next level up,
    /// ignored for the group under the top leader.
    pub leader: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    pub level: usize,
    pub index: usize,
    pub leader: LeaderRef,
    pub members: Range<NodeId>,
}

impl GroupSpec {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Shape of a top-down hierarchy plus the constant top opinion.
///
/// Nodes are numbered level by level from the bottom, then by group, then by
/// index inside the group.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchySpec<T = f64> {
    levels: usize,
    nodes: Vec<NodeAddress>,
    groups: Vec<GroupSpec>,
    top_leader: T,
}

impl<T: Real> HierarchySpec<T> {
    /// `levels[0]` describes the groups at level 1. The last entry must be a
    /// single group; its leader is the top.
    pub fn new(levels: Vec<Vec<GroupDef>>, top_leader: T) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::config("a hierarchy needs at least one level of followers"));
        }
        if !top_leader.is_finite() {
            return Err(Error::config("top leader opinion must be finite"));
        }
        if levels.last().map(Vec::len) != Some(1) {
            return Err(Error::config("the level under the top leader must hold exactly one group"));
        }
        let level_sizes: Vec<usize> = levels.iter().map(|gs| gs.iter().map(|g| g.size).sum()).collect();
        let mut offsets = vec![0usize; levels.len() + 1];
        for (l, n) in level_sizes.iter().enumerate() {
            offsets[l + 1] = offsets[l] + n;
        }
        let mut nodes = Vec::with_capacity(offsets[levels.len()]);
        let mut groups = Vec::new();
        for (l, defs) in levels.iter().enumerate() {
            let level = l + 1;
            let top_level = l + 1 == levels.len();
            if defs.is_empty() {
                return Err(Error::config(format!("level {level} has no groups")));
            }
            let mut led = vec![false; level_sizes.get(l + 1).copied().unwrap_or(0)];
            for (gi, def) in defs.iter().enumerate() {
                if def.size == 0 {
                    return Err(Error::config(format!("group {gi} at level {level} is empty")));
                }
                let leader = if top_level {
                    LeaderRef::Top
                } else {
                    let slot = led.get_mut(def.leader).ok_or_else(|| {
                        Error::config(format!(
                            "group {gi} at level {level}: leader {} does not exist at level {}",
                            def.leader,
                            level + 1
                        ))
                    })?;
                    if *slot {
                        return Err(Error::config(format!(
                            "node {} at level {} leads more than one group",
                            def.leader,
                            level + 1
                        )));
                    }
                    *slot = true;
                    LeaderRef::Node(offsets[l + 1] + def.leader)
                };
                let start = nodes.len();
                nodes.extend((0..def.size).map(|index| NodeAddress { level, group: gi, index }));
                groups.push(GroupSpec { level, index: gi, leader, members: start..nodes.len() });
            }
        }
        Ok(HierarchySpec { levels: levels.len() + 1, nodes, groups, top_leader })
    }

    /// Total number of levels, the top leader's included.
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Number of nodes below the top leader.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeAddress] {
        &self.nodes
    }

    pub fn groups(&self) -> &[GroupSpec] {
        &self.groups
    }

    pub fn top_leader(&self) -> T {
        self.top_leader
    }

    pub fn top_group(&self) -> &GroupSpec {
        self.groups.last().expect("validated hierarchy")
    }

    pub fn max_group_size(&self) -> usize {
        self.groups.iter().map(GroupSpec::size).max().unwrap_or(0)
    }

    pub fn labels(&self) -> Vec<AgentLabel> {
        self.nodes
            .iter()
            .map(|a| AgentLabel { level: Some(a.level), group: Some(a.group) })
            .collect()
    }
}

/// Balanced tree: every node at level `l + 1` leads one group of
/// `sizes[l - 1]` nodes at level `l`, and the top leads one group of
/// `sizes.last()` nodes.
pub fn build_uniform_hierarchy<T: Real>(sizes: &[usize], top_leader: T) -> Result<HierarchySpec<T>> {
    if sizes.is_empty() {
        return Err(Error::config("group size list is empty"));
    }
    if let Some(l) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::config(format!("group size at level {} must be positive", l + 1)));
    }
    let mut levels = Vec::with_capacity(sizes.len());
    for l in 0..sizes.len() {
        let groups: usize = sizes[l + 1..].iter().product();
        levels.push((0..groups).map(|g| GroupDef { size: sizes[l], leader: g }).collect());
    }
    HierarchySpec::new(levels, top_leader)
}

/// Dynamics shared by all groups at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelDynamics<T = f64> {
    pub d: T,
    pub b: T,
    pub reference: FollowerReference,
}

impl<T: Real> LevelDynamics<T> {
    pub fn new(d: T, b: T, scheme: &ReferenceScheme<T>) -> Result<Self> {
        let reference = FollowerReference::from_scheme(scheme)?;
        AgentParams::new(d, b)?;
        if d >= T::one() {
            return Err(Error::config(format!("followers need d < 1, got {d}")));
        }
        Ok(LevelDynamics { d, b, reference })
    }
}

/// Opinions of every node below the top, in node order, plus per-level dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct TdState<T = f64> {
    opinions: Vec<FuzzyOpinion<T>>,
    levels: Vec<LevelDynamics<T>>,
}

impl<T: Real> TdState<T> {
    /// Same `(d, b, scheme)` at every level.
    pub fn uniform(spec: &HierarchySpec<T>, opinions: Vec<FuzzyOpinion<T>>, dynamics: LevelDynamics<T>) -> Result<Self> {
        Self::with_levels(spec, opinions, vec![dynamics; spec.levels() - 1])
    }

    /// `levels[l - 1]` drives the groups at level `l`.
    pub fn with_levels(
        spec: &HierarchySpec<T>,
        opinions: Vec<FuzzyOpinion<T>>,
        levels: Vec<LevelDynamics<T>>,
    ) -> Result<Self> {
        if opinions.len() != spec.node_count() {
            return Err(Error::config(format!(
                "hierarchy has {} nodes but {} opinions were given",
                spec.node_count(),
                opinions.len()
            )));
        }
        if levels.len() != spec.levels() - 1 {
            return Err(Error::config(format!(
                "hierarchy has {} follower levels but {} dynamics entries were given",
                spec.levels() - 1,
                levels.len()
            )));
        }
        for (i, op) in opinions.iter().enumerate() {
            op.validate().map_err(|e| Error::config(format!("node {i}: {e}")))?;
        }
        Ok(TdState { opinions, levels })
    }

    /// Every group starts on the ramp `lo + (hi - lo) * j / (size - 1)`
    /// over its members `j`, all with the same sigma.
    pub fn ramp(spec: &HierarchySpec<T>, lo: T, hi: T, sigma: T, dynamics: LevelDynamics<T>) -> Result<Self> {
        let mut opinions = Vec::with_capacity(spec.node_count());
        for g in spec.groups() {
            opinions.extend(ramp(g.size(), lo, hi).into_iter().map(|center| FuzzyOpinion { center, sigma }));
        }
        Self::uniform(spec, opinions, dynamics)
    }

    pub fn opinions(&self) -> &[FuzzyOpinion<T>] {
        &self.opinions
    }

    pub fn level_dynamics(&self) -> &[LevelDynamics<T>] {
        &self.levels
    }

    fn params_for(&self, level: usize, size: usize) -> (Vec<AgentParams<T>>, FollowerReference) {
        let dy = self.levels[level - 1];
        (vec![AgentParams { d: dy.d, b: dy.b }; size], dy.reference)
    }

    fn conforms(&self, spec: &HierarchySpec<T>) -> Result<()> {
        if self.opinions.len() != spec.node_count() || self.levels.len() != spec.levels() - 1 {
            return Err(Error::config("state does not match the hierarchy it is stepped with"));
        }
        Ok(())
    }

    /// Weight matrix of one group's center update at this slice.
    pub fn group_matrix(&self, spec: &HierarchySpec<T>, group: usize) -> Result<WeightMatrix<T>> {
        self.conforms(spec)?;
        let g = spec.groups().get(group).ok_or_else(|| Error::config(format!("no group {group}")))?;
        let (params, _) = self.params_for(g.level, g.size());
        Ok(WeightMatrix::from_slice(&self.opinions[g.members.clone()], &params))
    }
}

/// `n` evenly spaced points on `[lo, hi]`; a single point sits at `lo`.
pub fn ramp<T: Real>(n: usize, lo: T, hi: T) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let denom = T::from_count(n - 1);
    (0..n).map(|j| lo + (hi - lo) * T::from_count(j) / denom).collect()
}

/// One global step: every group applies the leader-follower update against
/// the same frozen snapshot.
pub fn step_td<T: Real>(state: &TdState<T>, spec: &HierarchySpec<T>) -> Result<TdState<T>> {
    state.conforms(spec)?;
    let snapshot = &state.opinions;
    let mut next = Vec::with_capacity(snapshot.len());
    for g in spec.groups() {
        let leader = match g.leader {
            LeaderRef::Top => spec.top_leader(),
            LeaderRef::Node(id) => snapshot[id].center,
        };
        let (params, reference) = state.params_for(g.level, g.size());
        group_step(&snapshot[g.members.clone()], &params, leader, reference, &mut next);
    }
    Ok(TdState { opinions: next, levels: state.levels.clone() })
}

/// Iterates [`step_td`], recording every node at every step with its
/// level and group.
pub fn run_td<T: Real>(initial: &TdState<T>, spec: &HierarchySpec<T>, steps: usize) -> Result<TrajectoryRecord<T>> {
    initial.conforms(spec)?;
    let mut record = TrajectoryRecord::new(spec.labels());
    record.push(0, initial.opinions());
    let mut cur = initial.clone();
    for t in 0..steps {
        cur = step_td(&cur, spec)?;
        record.push(t + 1, cur.opinions());
    }
    Ok(record)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSigma<T = f64> {
    pub level: usize,
    pub group: usize,
    pub size: usize,
    pub mean: T,
    /// `max - min` of the members' sigmas.
    pub spread: T,
}

/// Per-group sigma mean and spread, in group order (bottom level first).
pub fn group_sigma_report<T: Real>(state: &TdState<T>, spec: &HierarchySpec<T>) -> Vec<GroupSigma<T>> {
    spec.groups()
        .iter()
        .map(|g| {
            let sig: Vec<T> = state.opinions[g.members.clone()].iter().map(|o| o.sigma).collect();
            let sum = sig.iter().fold(T::zero(), |a, &s| a + s);
            let lo = sig.iter().fold(T::infinity(), |a, &s| a.min(s));
            let hi = sig.iter().fold(T::neg_infinity(), |a, &s| a.max(s));
            GroupSigma {
                level: g.level,
                group: g.index,
                size: g.size(),
                mean: sum / T::from_count(sig.len()),
                spread: hi - lo,
            }
        })
        .collect()
}

/// Slice of a hierarchy run at frame `k` as a [`TdState`].
pub fn state_at<T: Real>(traj: &TrajectoryRecord<T>, k: usize, like: &TdState<T>) -> TdState<T> {
    TdState { opinions: traj.opinions(k), levels: like.levels.clone() }
}

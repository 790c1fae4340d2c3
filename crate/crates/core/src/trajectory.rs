use crate::opinion::{AgentId, FuzzyOpinion};
use crate::real::Real;

/// Position of an agent inside a hierarchy. Flat runs leave both empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AgentLabel {
    pub level: Option<usize>,
    pub group: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T = f64> {
    pub t: usize,
    pub agent: AgentId,
    pub level: Option<usize>,
    pub group: Option<usize>,
    pub center: T,
    pub sigma: T,
}

/// Start of a bottom-up phase. `start_t` is the step whose state seeds the phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMark<T = f64> {
    pub phase: usize,
    pub d: T,
    pub start_t: usize,
    pub end_t: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsensusMark {
    pub scope: String,
    pub t: usize,
}

/// Dense per-step, per-agent samples of a run.
///
/// Every recorded step holds exactly one sample per agent, in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<T = f64> {
    labels: Vec<AgentLabel>,
    samples: Vec<Sample<T>>,
    pub phases: Vec<PhaseMark<T>>,
    pub consensus: Vec<ConsensusMark>,
}

impl<T: Real> TrajectoryRecord<T> {
    pub fn new(labels: Vec<AgentLabel>) -> Self {
        TrajectoryRecord { labels, samples: Vec::new(), phases: Vec::new(), consensus: Vec::new() }
    }

    pub fn flat(n: usize) -> Self {
        Self::new(vec![AgentLabel::default(); n])
    }

    pub(crate) fn push(&mut self, t: usize, agents: &[FuzzyOpinion<T>]) {
        assert_eq!(agents.len(), self.labels.len(), "dense record: one sample per agent");
        debug_assert!(self.last_time().is_none_or(|last| t >= last));
        self.samples.extend(agents.iter().zip(&self.labels).enumerate().map(|(agent, (a, l))| {
            Sample { t, agent, level: l.level, group: l.group, center: a.center, sigma: a.sigma }
        }));
    }

    /// Rebuilds a record from raw samples, e.g. ones read back from disk.
    pub fn from_samples(labels: Vec<AgentLabel>, samples: Vec<Sample<T>>) -> Option<Self> {
        let n = labels.len();
        if n == 0 || !samples.len().is_multiple_of(n) {
            return None;
        }
        let dense = samples.chunks(n).all(|frame| {
            frame.iter().enumerate().all(|(i, s)| s.agent == i && s.t == frame[0].t)
        });
        let ordered = samples.chunks(n).zip(samples.chunks(n).skip(1)).all(|(a, b)| a[0].t <= b[0].t);
        (dense && ordered).then(|| TrajectoryRecord {
            labels,
            samples,
            phases: Vec::new(),
            consensus: Vec::new(),
        })
    }

    pub fn agent_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[AgentLabel] {
        &self.labels
    }

    pub fn samples(&self) -> &[Sample<T>] {
        &self.samples
    }

    /// Number of recorded steps.
    pub fn len(&self) -> usize {
        self.samples.len() / self.labels.len().max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn frame(&self, k: usize) -> &[Sample<T>] {
        let n = self.agent_count();
        &self.samples[k * n..(k + 1) * n]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[Sample<T>]> + '_ {
        self.samples.chunks(self.agent_count().max(1))
    }

    pub fn time(&self, k: usize) -> usize {
        self.frame(k)[0].t
    }

    pub fn last_time(&self) -> Option<usize> {
        self.samples.last().map(|s| s.t)
    }

    /// Frame index recorded at step `t`, if any.
    pub fn index_of(&self, t: usize) -> Option<usize> {
        (0..self.len()).find(|&k| self.time(k) == t)
    }

    pub fn opinions(&self, k: usize) -> Vec<FuzzyOpinion<T>> {
        self.frame(k).iter().map(|s| FuzzyOpinion { center: s.center, sigma: s.sigma }).collect()
    }

    pub fn centers(&self, k: usize) -> Vec<T> {
        self.frame(k).iter().map(|s| s.center).collect()
    }

    pub fn sigmas(&self, k: usize) -> Vec<T> {
        self.frame(k).iter().map(|s| s.sigma).collect()
    }

    /// First recorded step at which every agent's center is strictly within
    /// `radius` of `target`.
    pub fn first_time_within(&self, target: T, radius: T) -> Option<usize> {
        self.frames()
            .find(|f| f.iter().all(|s| (s.center - target).abs() < radius))
            .map(|f| f[0].t)
    }

    /// Keeps every `stride`-th step plus the final one. Phase boundaries are kept too.
    pub fn thinned(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let last = self.len().saturating_sub(1);
        let boundaries: Vec<usize> = self.phases.iter().flat_map(|p| [p.start_t, p.end_t]).collect();
        let mut out = TrajectoryRecord {
            labels: self.labels.clone(),
            samples: Vec::new(),
            phases: self.phases.clone(),
            consensus: self.consensus.clone(),
        };
        for k in 0..self.len() {
            if k % stride == 0 || k == last || boundaries.contains(&self.time(k)) {
                out.samples.extend_from_slice(self.frame(k));
            }
        }
        out
    }

    /// Same record with samples restricted to `agents` (renumbered `0..`).
    pub fn select(&self, agents: &[AgentId]) -> Self {
        let labels = agents.iter().map(|&a| self.labels[a]).collect();
        let mut samples = Vec::with_capacity(self.len() * agents.len());
        for frame in self.frames() {
            samples.extend(agents.iter().enumerate().map(|(i, &a)| Sample { agent: i, ..frame[a] }));
        }
        TrajectoryRecord { labels, samples, phases: self.phases.clone(), consensus: Vec::new() }
    }
}

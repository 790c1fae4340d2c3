//! Bottom-up hierarchical networks: phase-scheduled bounded-confidence runs.
//!
//! The same population runs one local-reference network per phase. Each
//! phase lowers (usually) the confidence threshold, and the last slice of
//! one phase is the first slice of the next.

use crate::bcfon::{partition_by_gap, run_into, ReferenceScheme};
use crate::error::{Error, Result};
use crate::opinion::{AgentParams, FuzzyOpinion, NetworkState};
use crate::real::Real;
use crate::trajectory::{PhaseMark, Sample, TrajectoryRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase<T = f64> {
    pub d: T,
    pub steps: usize,
}

/// Ordered `(d, steps)` phases sharing one uncertainty gain `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSchedule<T = f64> {
    phases: Vec<Phase<T>>,
    b: T,
}

impl<T: Real> PhaseSchedule<T> {
    pub fn new(phases: Vec<Phase<T>>, b: T) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::config("a phase schedule needs at least one phase"));
        }
        for (i, p) in phases.iter().enumerate() {
            AgentParams::new(p.d, b).map_err(|e| Error::config(format!("phase {}: {e}", i + 1)))?;
            if p.steps == 0 {
                return Err(Error::config(format!("phase {} must run at least one step", i + 1)));
            }
        }
        Ok(PhaseSchedule { phases, b })
    }

    pub fn phases(&self) -> &[Phase<T>] {
        &self.phases
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn total_steps(&self) -> usize {
        self.phases.iter().map(|p| p.steps).sum()
    }
}

/// Runs every phase in order under the local reference scheme.
///
/// At a phase boundary every agent's `d` becomes the phase's value and `b`
/// the schedule's; centers and sigmas carry over untouched.
pub fn run_bu<T: Real>(initial: &NetworkState<T>, schedule: &PhaseSchedule<T>) -> Result<TrajectoryRecord<T>> {
    let mut record = TrajectoryRecord::flat(initial.len());
    let mut state = initial.clone();
    let mut t = 0;
    for (i, phase) in schedule.phases().iter().enumerate() {
        state = NetworkState::uniform(state.agents().to_vec(), AgentParams { d: phase.d, b: schedule.b() })?;
        state = run_into(&state, &ReferenceScheme::Local, t, phase.steps, &mut record)?;
        record.phases.push(PhaseMark { phase: i + 1, d: phase.d, start_t: t, end_t: t + phase.steps });
        t += phase.steps;
    }
    Ok(record)
}

/// Cluster picture at the end of one phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseClusters<T = f64> {
    pub phase: usize,
    pub d: Option<T>,
    pub end_t: usize,
    pub count: usize,
    /// Mean center of each cluster, ascending.
    pub representatives: Vec<T>,
    pub mean_sigma: T,
    pub max_sigma: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport<T = f64> {
    pub phases: Vec<PhaseClusters<T>>,
}

impl<T: Real> ClusterReport<T> {
    pub fn counts(&self) -> Vec<usize> {
        self.phases.iter().map(|p| p.count).collect()
    }
}

/// Clusters of one recorded slice under the sorted-gap rule.
pub fn frame_clusters<T: Real>(frame: &[Sample<T>], gap: T) -> (Vec<T>, T, T) {
    let centers: Vec<T> = frame.iter().map(|s| s.center).collect();
    let blocks = partition_by_gap(&centers, gap);
    let reps = blocks
        .iter()
        .map(|b| b.iter().fold(T::zero(), |a, &i| a + centers[i]) / T::from_count(b.len()))
        .collect();
    let sum = frame.iter().fold(T::zero(), |a, s| a + s.sigma);
    let max = frame.iter().fold(T::neg_infinity(), |a, s| a.max(s.sigma));
    (reps, sum / T::from_count(frame.len()), max)
}

/// Cluster counts and sigma statistics at each phase's final step. A
/// trajectory without phase marks is summarized as one phase ending at its
/// last step.
pub fn phase_summary<T: Real>(traj: &TrajectoryRecord<T>, gap: T) -> ClusterReport<T> {
    let ends: Vec<(usize, Option<T>, usize)> = if traj.phases.is_empty() {
        traj.last_time().map(|t| (1, None, t)).into_iter().collect()
    } else {
        traj.phases.iter().map(|p| (p.phase, Some(p.d), p.end_t)).collect()
    };
    let phases = ends
        .into_iter()
        .filter_map(|(phase, d, end_t)| {
            let k = traj.index_of(end_t)?;
            let (representatives, mean_sigma, max_sigma) = frame_clusters(traj.frame(k), gap);
            Some(PhaseClusters { phase, d, end_t, count: representatives.len(), representatives, mean_sigma, max_sigma })
        })
        .collect();
    ClusterReport { phases }
}

/// Number of bitwise-distinct `(center, sigma)` pairs in a slice.
pub fn distinct_states<T: Real>(ops: &[FuzzyOpinion<T>]) -> usize {
    let mut v: Vec<(T, T)> = ops.iter().map(|o| (o.center, o.sigma)).collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite states"));
    v.dedup();
    v.len()
}

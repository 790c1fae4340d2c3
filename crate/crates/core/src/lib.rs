//! Hierarchical fuzzy opinion networks.
//!
//! Agents hold Gaussian fuzzy opinions `(center, sigma)` and average with
//! the agents whose opinions are close enough to their own. On top of that
//! bounded-confidence core this crate provides:
//!
//! * [`bcfon`]: flat synchronous networks with local or external reference,
//! * [`leader`]: leader-follower groups, consensus detection and the closed
//!   forms of their post-consensus behavior,
//! * [`topdown`]: trees of leader-follower groups under one top leader,
//! * [`bottomup`]: phase-scheduled runs with shrinking confidence thresholds.
//!
//! Engines are generic over [`Real`] and default to `f64`.

pub mod bcfon;
pub mod bottomup;
pub mod error;
pub mod leader;
pub mod opinion;
pub mod real;
pub mod topdown;
pub mod trajectory;

pub use bcfon::{
    default_gap, detect_consensus_partition, partition_by_gap, run_bcfon, step_bcfon, ExternalSignal,
    ReferenceScheme,
};
pub use bottomup::{
    distinct_states, frame_clusters, phase_summary, run_bu, ClusterReport, Phase, PhaseClusters, PhaseSchedule,
};
pub use error::{Error, Result};
pub use leader::{
    default_consensus_tol, detect_consensus_time, predict_center, predict_sigma_leader_ref,
    predict_sigma_limit, run_blfg, step_blfg, steps_to_error_fraction, BlfgConfig, ConsensusReport,
    FollowerReference, LeaderSignal, LemmaReport, WeightMatrix,
};
pub use opinion::{
    closeness, confidence_weights, membership, neighbor_set, AgentId, AgentParams, FuzzyOpinion,
    NetworkState,
};
pub use real::Real;
pub use topdown::{
    build_uniform_hierarchy, group_sigma_report, ramp, run_td, state_at, step_td, GroupDef, GroupSigma,
    GroupSpec, HierarchySpec, LeaderRef, LevelDynamics, NodeAddress, TdState,
};
pub use trajectory::{AgentLabel, ConsensusMark, PhaseMark, Sample, TrajectoryRecord};

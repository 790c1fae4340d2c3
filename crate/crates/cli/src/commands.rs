//! The `run`, `predict` and `clusters` subcommands, minus argument parsing.

use crate::error::{CliError, Result};
use crate::output::{read_trajectory, write_outputs};
use crate::run::{run_scenario, Overrides, RunOutput};
use crate::scenario::load_unchecked;
use hfon_core::{
    default_gap, frame_clusters, predict_center, predict_sigma_leader_ref, predict_sigma_limit, steps_to_error_fraction,
};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct RunReport {
    pub output: RunOutput,
    pub trajectory_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Loads, validates, runs and writes a scenario. Nothing is written unless
/// the scenario is valid and the run succeeds.
pub fn run_command(scenario: &str, overrides: &Overrides, out_dir: &Path) -> Result<RunReport> {
    let config = overrides.apply(load_unchecked(scenario)?)?;
    let output = run_scenario(&config)?;
    let (trajectory_path, summary_path) = write_outputs(&output, out_dir)?;
    Ok(RunReport { output, trajectory_path, summary_path })
}

/// Common opinion of a group right after consensus, for the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusInputs {
    pub center: f64,
    pub sigma: f64,
    pub leader: f64,
    pub b: f64,
    /// Steps after the first post-consensus step.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub n: usize,
    pub epsilon: f64,
    pub steps_to_error_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_leader_ref: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_limit: Option<f64>,
}

pub fn predict_command(n: usize, epsilon: f64, consensus: Option<ConsensusInputs>) -> Result<Prediction> {
    let steps = steps_to_error_fraction(n, epsilon)?;
    let mut p = Prediction {
        n,
        epsilon,
        steps_to_error_fraction: steps,
        offset: None,
        center: None,
        sigma_leader_ref: None,
        sigma_limit: None,
    };
    if let Some(c) = consensus {
        for (key, x) in [("center", c.center), ("sigma", c.sigma), ("leader", c.leader), ("b", c.b)] {
            if !x.is_finite() {
                return Err(CliError::config(key, format!("must be finite, got {x}")));
            }
        }
        if c.sigma < 0.0 {
            return Err(CliError::config("sigma", "must be non-negative"));
        }
        p.offset = Some(c.offset);
        p.center = Some(predict_center(c.center, c.leader, n, c.offset));
        p.sigma_leader_ref = Some(predict_sigma_leader_ref(c.sigma, c.center, c.leader, c.b, n, c.offset));
        p.sigma_limit = Some(predict_sigma_limit(c.sigma, c.center, c.leader, c.b, n));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameClusters {
    pub t: usize,
    pub gap: f64,
    pub count: usize,
    pub representatives: Vec<f64>,
    pub mean_sigma: f64,
    pub max_sigma: f64,
}

/// Clusters of the last recorded step of a trajectory file. The default gap
/// is 5% of the first recorded step's center range.
pub fn clusters_command(path: &Path, gap: Option<f64>) -> Result<FrameClusters> {
    if let Some(g) = gap {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(CliError::config("gap", format!("must be non-negative and finite, got {g}")));
        }
    }
    let record = read_trajectory(path)?;
    let gap = gap.unwrap_or_else(|| default_gap(record.centers(0)));
    let last = record.len() - 1;
    let (representatives, mean_sigma, max_sigma) = frame_clusters(record.frame(last), gap);
    Ok(FrameClusters {
        t: record.time(last),
        gap,
        count: representatives.len(),
        representatives,
        mean_sigma,
        max_sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predict_examples() {
        let p = predict_command(156, 0.01, None).unwrap();
        assert!((p.steps_to_error_fraction - 720.7).abs() < 0.1);
        assert!((predict_command(1, 0.5, None).unwrap().steps_to_error_fraction - 1.0).abs() < 1e-12);
        assert!((predict_command(12, 0.01, None).unwrap().steps_to_error_fraction - 57.5).abs() < 0.05);
        assert!(predict_command(0, 0.5, None).is_err());
        assert!(predict_command(3, 1.5, None).is_err());
    }

    #[test]
    fn predict_with_consensus_inputs() {
        let c = ConsensusInputs { center: 12.0, sigma: 1.0, leader: 10.0, b: 0.01, offset: 0 };
        let p = predict_command(4, 0.1, Some(c)).unwrap();
        assert_eq!(p.center, Some(12.0));
        assert_eq!(p.sigma_leader_ref, Some(1.0));
        assert!((p.sigma_limit.unwrap() - (1.0 + 0.01 * 2.0 * 5.0)).abs() < 1e-15);
        let one = predict_command(4, 0.1, Some(ConsensusInputs { offset: 1, ..c })).unwrap();
        assert!((one.center.unwrap() - (10.0 + 0.8 * 2.0)).abs() < 1e-15);
        assert!((one.sigma_leader_ref.unwrap() - 1.02).abs() < 1e-15);
    }
}

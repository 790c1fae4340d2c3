//! Executes a validated scenario and assembles its summary.

use crate::error::Result;
use crate::initials::seeded_initials;
use crate::scenario::{ExternalInput, InitialSpec, Kind, LeaderInput, Scheme, ScenarioConfig, SCHEMA_VERSION};
use hfon_core::{
    build_uniform_hierarchy, default_consensus_tol, default_gap, detect_consensus_time, distinct_states,
    phase_summary, predict_center, predict_sigma_leader_ref, predict_sigma_limit, run_bcfon, run_blfg, run_bu,
    run_td, steps_to_error_fraction, AgentParams, BlfgConfig, ExternalSignal, FollowerReference, LeaderSignal,
    LevelDynamics, NetworkState, Phase, PhaseSchedule, ReferenceScheme, TdState, TrajectoryRecord,
};
use serde::{Deserialize, Serialize};

/// Post-consensus steps whose per-step ratio is checked.
const RATIO_WINDOW: usize = 50;
const RATIO_TOL: f64 = 1e-9;
const PREDICTION_TOL: f64 = 1e-9;
const SIGMA_CONSTANT_TOL: f64 = 1e-12;
const SIGMA_LIMIT_TOL: f64 = 1e-6;
/// The limit is compared once this many multiples of `n + 1` post-consensus
/// steps have passed; the neglected tail is then below `e^-20` of the gain.
const LIMIT_HORIZON: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusSummary {
    pub scope: String,
    pub tolerance: f64,
    pub t_n: Option<usize>,
    pub center: Option<f64>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    /// Absolute tolerance on `|actual - expected|`.
    pub tolerance: f64,
    pub pass: bool,
}

impl PredictorCheck {
    fn new(name: &str, expected: f64, actual: f64, tolerance: f64) -> Self {
        let pass = (actual - expected).abs() <= tolerance;
        PredictorCheck { name: name.to_string(), expected, actual, tolerance, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseClusterSummary {
    pub phase: usize,
    pub d: Option<f64>,
    pub end_t: usize,
    pub gap: f64,
    pub count: usize,
    pub representatives: Vec<f64>,
    pub mean_sigma: f64,
    pub max_sigma: f64,
    pub distinct_states: usize,
}

/// First step at which every agent is within `radius` of the leader.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepsToTarget {
    pub target: f64,
    pub radius: f64,
    pub t: Option<usize>,
    /// Largest group in the run and its post-consensus steps to a 1% error.
    pub group_size: usize,
    pub predicted_steps_to_1pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    /// The scenario as run, with every default filled in.
    pub scenario: ScenarioConfig,
    pub seed: Option<u64>,
    pub consensus: Option<ConsensusSummary>,
    pub predictor_checks: Vec<PredictorCheck>,
    pub clusters: Vec<PhaseClusterSummary>,
    pub steps_to_target: Option<StepsToTarget>,
}

impl Summary {
    pub fn checks_pass(&self) -> bool {
        self.predictor_checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Every step at full resolution; output thinning happens when writing.
    pub record: TrajectoryRecord,
    pub summary: Summary,
}

/// Group with a constant leader whose post-consensus behavior has closed forms.
struct LeaderGroup {
    record: TrajectoryRecord,
    scope: String,
    leader: f64,
    b: f64,
    reference: FollowerReference,
    largest_group: usize,
}

fn reference_scheme(config: &ScenarioConfig, n: usize) -> ReferenceScheme {
    match config.dynamics.scheme {
        Scheme::Local => ReferenceScheme::Local,
        Scheme::Leader => ReferenceScheme::Leader,
        Scheme::External => ReferenceScheme::External(match config.dynamics.external.clone() {
            Some(ExternalInput::Shared(g)) => ExternalSignal::Constant(vec![g; n]),
            Some(ExternalInput::PerAgent(g)) => ExternalSignal::Constant(g),
            Some(ExternalInput::Series(rows)) => ExternalSignal::Series(rows),
            None => ExternalSignal::Constant(Vec::new()),
        }),
    }
}

fn leader_signal(config: &ScenarioConfig) -> LeaderSignal {
    match config.dynamics.leader.clone() {
        Some(LeaderInput::Constant(x)) => LeaderSignal::Constant(x),
        Some(LeaderInput::Series(xs)) => LeaderSignal::Series(xs),
        None => LeaderSignal::Constant(f64::NAN),
    }
}

/// Runs a scenario. The config is validated again, so hand-built configs are safe.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutput> {
    config.validate()?;
    let n = config.population()?;
    let seed = config.seed.unwrap_or(0);
    let dy = &config.dynamics;
    let scheme = reference_scheme(config, n);
    let steps = config.steps.unwrap_or(0);

    let (record, group) = match config.kind {
        Kind::Blfg => {
            let d = dy.d.unwrap_or_default();
            let blfg = BlfgConfig::new(d, dy.b, &scheme, leader_signal(config))?;
            let state = blfg.followers(seeded_initials(&config.initial, seed, n))?;
            let record = run_blfg(&state, &blfg, steps)?;
            let group = blfg.leader.constant().map(|leader| LeaderGroup {
                record: record.clone(),
                scope: "followers".into(),
                leader,
                b: dy.b,
                reference: blfg.reference,
                largest_group: n,
            });
            (record, group)
        }
        Kind::Bcfon => {
            let params = AgentParams::new(dy.d.unwrap_or_default(), dy.b)?;
            let state = NetworkState::uniform(seeded_initials(&config.initial, seed, n), params)?;
            (run_bcfon(&state, &scheme, steps)?, None)
        }
        Kind::Topdown => {
            let sizes = config.structure.group_sizes.clone().unwrap_or_default();
            let leader = leader_signal(config).constant().unwrap_or(f64::NAN);
            let spec = build_uniform_hierarchy(&sizes, leader)?;
            let level = LevelDynamics::new(dy.d.unwrap_or_default(), dy.b, &scheme)?;
            let state = match &config.initial {
                InitialSpec::Ramp { lo, hi, sigma } => TdState::ramp(&spec, *lo, *hi, *sigma, level)?,
                other => TdState::uniform(&spec, seeded_initials(other, seed, n), level)?,
            };
            let record = run_td(&state, &spec, steps)?;
            let top: Vec<usize> = spec.top_group().members.clone().collect();
            let group = LeaderGroup {
                record: record.select(&top),
                scope: "top group".into(),
                leader,
                b: dy.b,
                reference: level.reference,
                largest_group: spec.max_group_size(),
            };
            (record, Some(group))
        }
        Kind::Bottomup => {
            let phases = config.structure.phases.clone().unwrap_or_default();
            let schedule =
                PhaseSchedule::new(phases.iter().map(|p| Phase { d: p.d, steps: p.steps }).collect(), dy.b)?;
            let first = phases.first().map_or(0.0, |p| p.d);
            let state = NetworkState::uniform(seeded_initials(&config.initial, seed, n), AgentParams::new(first, dy.b)?)?;
            (run_bu(&state, &schedule)?, None)
        }
    };

    let mut scenario = config.clone();
    let gap = *scenario.output.gap.get_or_insert_with(|| default_gap(record.centers(0)));
    let scope_record = group.as_ref().map_or(&record, |g| &g.record);
    let tol = *scenario.output.tol.get_or_insert_with(|| default_consensus_tol(scope_record.centers(0)));

    let report = detect_consensus_time(scope_record, tol);
    let consensus = ConsensusSummary {
        scope: group.as_ref().map_or_else(|| "all".to_string(), |g| g.scope.clone()),
        tolerance: tol,
        t_n: report.t_n,
        center: report.next.map(|o| o.center),
        sigma: report.next.map(|o| o.sigma),
    };

    let (predictor_checks, steps_to_target) = match &group {
        Some(g) => (leader_group_checks(g, report.t_n), Some(steps_to_target(&record, g)?)),
        None => (Vec::new(), None),
    };

    let clusters = phase_summary(&record, gap)
        .phases
        .into_iter()
        .map(|p| PhaseClusterSummary {
            phase: p.phase,
            d: p.d,
            end_t: p.end_t,
            gap,
            count: p.count,
            distinct_states: record.index_of(p.end_t).map_or(0, |k| distinct_states(&record.opinions(k))),
            representatives: p.representatives,
            mean_sigma: p.mean_sigma,
            max_sigma: p.max_sigma,
        })
        .collect();

    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        seed: config.seed,
        scenario,
        consensus: Some(consensus),
        predictor_checks,
        clusters,
        steps_to_target,
    };
    Ok(RunOutput { record, summary })
}

fn steps_to_target(record: &TrajectoryRecord, g: &LeaderGroup) -> Result<StepsToTarget> {
    let (lo, hi) = record.centers(0).iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    let radius = 0.01 * (hi - lo);
    Ok(StepsToTarget {
        target: g.leader,
        radius,
        t: record.first_time_within(g.leader, radius),
        group_size: g.largest_group,
        predicted_steps_to_1pct: steps_to_error_fraction(g.largest_group, 0.01)?,
    })
}

/// Compares the simulated post-consensus group against the closed forms.
fn leader_group_checks(g: &LeaderGroup, t_n: Option<usize>) -> Vec<PredictorCheck> {
    let rec = &g.record;
    let Some(k1) = t_n.and_then(|t| rec.index_of(t + 1)) else {
        return vec![PredictorCheck::new("consensus_detected", 1.0, 0.0, 0.0)];
    };
    let n = rec.agent_count();
    let a = g.leader;
    let r = n as f64 / (n + 1) as f64;
    let last = rec.len() - 1;
    let t1 = rec.time(k1);
    let center = |k: usize| rec.frame(k)[0].center;
    let (c0, s0) = (center(k1), rec.frame(k1)[0].sigma);
    let e0 = c0 - a;
    let mut checks = Vec::new();

    let worst_ratio = (k1..last.min(k1 + RATIO_WINDOW))
        .filter(|&k| center(k) != a)
        .map(|k| (center(k + 1) - a) / (center(k) - a))
        .max_by(|x, y| (x - r).abs().total_cmp(&(y - r).abs()));
    if let Some(ratio) = worst_ratio {
        checks.push(PredictorCheck::new("center_ratio", r, ratio, RATIO_TOL * r));
    }

    let offset = rec.time(last) - t1;
    if offset > 0 {
        checks.push(PredictorCheck::new("center_prediction", predict_center(c0, a, n, offset), center(last), PREDICTION_TOL));
    }

    match g.reference {
        FollowerReference::Local => {
            let worst = (k1..=last)
                .flat_map(|k| rec.frame(k).iter().map(|s| s.sigma))
                .max_by(|x, y| (x - s0).abs().total_cmp(&(y - s0).abs()))
                .unwrap_or(s0);
            checks.push(PredictorCheck::new("sigma_constant", s0, worst, SIGMA_CONSTANT_TOL));
        }
        FollowerReference::Leader => {
            let sigma_last = rec.frame(last)[0].sigma;
            if offset > 0 {
                let expected = predict_sigma_leader_ref(s0, c0, a, g.b, n, offset);
                checks.push(PredictorCheck::new("sigma_prediction", expected, sigma_last, PREDICTION_TOL));
            }
            if offset >= LIMIT_HORIZON * (n + 1) {
                let expected = predict_sigma_limit(s0, c0, a, g.b, n);
                checks.push(PredictorCheck::new("sigma_limit", expected, sigma_last, SIGMA_LIMIT_TOL));
            }
        }
    }

    if e0 != 0.0 {
        for (name, eps) in [("steps_to_10pct", 0.1), ("steps_to_1pct", 0.01)] {
            let reached = (k1..=last).find(|&k| (center(k) - a).abs() <= eps * e0.abs());
            if let (Some(k), Ok(predicted)) = (reached, steps_to_error_fraction(n, eps)) {
                let measured = (rec.time(k) - t1) as f64;
                checks.push(PredictorCheck::new(name, predicted.round(), measured, 1.0));
            }
        }
    }
    checks
}

/// Applies command-line overrides and revalidates.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub stride: Option<usize>,
    pub gap: Option<f64>,
    pub tol: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut config: ScenarioConfig) -> Result<ScenarioConfig> {
        if let Some(seed) = self.seed {
            config.seed = Some(seed);
        }
        if let Some(stride) = self.stride {
            config.output.stride = stride;
        }
        if let Some(gap) = self.gap {
            config.output.gap = Some(gap);
        }
        if let Some(tol) = self.tol {
            config.output.tol = Some(tol);
        }
        config.validate()?;
        Ok(config)
    }
}


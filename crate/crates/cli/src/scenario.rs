//! Scenario documents: a versioned TOML schema, validation and the built-ins.

use crate::error::{CliError, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Scenario documents shipped with the binary, by name.
pub const BUILTINS: &[(&str, &str)] = &[
    ("example1-local", include_str!("../scenarios/example1-local.toml")),
    ("example1-leader", include_str!("../scenarios/example1-leader.toml")),
    ("example2-3level-local", include_str!("../scenarios/example2-3level-local.toml")),
    ("example2-3level-leader", include_str!("../scenarios/example2-3level-leader.toml")),
    ("example2-4level-local", include_str!("../scenarios/example2-4level-local.toml")),
    ("example2-4level-leader", include_str!("../scenarios/example2-4level-leader.toml")),
    ("example3", include_str!("../scenarios/example3.toml")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Blfg,
    Bcfon,
    Topdown,
    Bottomup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Local,
    Leader,
    External,
}

/// A constant leader opinion or one value per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LeaderInput {
    Constant(f64),
    Series(Vec<f64>),
}

/// External reference values: one for everybody, one per agent, or one row per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExternalInput {
    Shared(f64),
    PerAgent(Vec<f64>),
    Series(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dynamics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    pub b: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leader: Option<LeaderInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<ExternalInput>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDef {
    pub d: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Structure {
    /// Population size of flat and bottom-up runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub followers: Option<usize>,
    /// Group size at each follower level, bottom first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<PhaseDef>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialSpec {
    /// Evenly spaced centers on `[lo, hi]` with a common sigma. Hierarchies
    /// lay one ramp over each group.
    Ramp { lo: f64, hi: f64, sigma: f64 },
    /// Seeded draws: centers on `[center[0], center[1]]`, sigmas on the open
    /// interval `(sigma[0], sigma[1])`.
    Uniform { center: [f64; 2], sigma: [f64; 2] },
    Explicit { centers: Vec<f64>, sigmas: Vec<f64> },
}

impl InitialSpec {
    pub fn is_random(&self) -> bool {
        matches!(self, InitialSpec::Uniform { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Cluster gap; 5% of the initial center range when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    /// Consensus tolerance; `1e-9 * max(1, initial spread)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

fn default_stride() -> usize {
    1
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions { stride: 1, gap: None, tol: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub dynamics: Dynamics,
    #[serde(default)]
    pub structure: Structure,
    pub initial: InitialSpec,
    #[serde(default)]
    pub output: OutputOptions,
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let config = deserialize(text)?;
    config.validate()?;
    Ok(config)
}

fn deserialize(text: &str) -> Result<ScenarioConfig> {
    toml::from_str(text).map_err(|e| CliError::Config(format!("invalid scenario document: {e}")))
}

pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Resolves a `run` argument: an existing file first, then a built-in name.
pub fn load_scenario(arg: &str) -> Result<ScenarioConfig> {
    let config = load_unchecked(arg)?;
    config.validate()?;
    Ok(config)
}

/// Like [`load_scenario`] but leaves validation to the caller, so that
/// command-line overrides can complete a document first.
pub fn load_unchecked(arg: &str) -> Result<ScenarioConfig> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {arg}"), e))?;
        return deserialize(&text);
    }
    match builtin(arg) {
        Some(text) => deserialize(text),
        None => {
            let names: Vec<&str> = BUILTINS.iter().map(|(n, _)| *n).collect();
            Err(CliError::Config(format!(
                "no scenario file or built-in named `{arg}` (built-ins: {})",
                names.join(", ")
            )))
        }
    }
}

fn finite(key: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(key, format!("must be finite, got {x}")))
    }
}

fn unit_interval(key: &str, d: f64) -> Result<()> {
    if (0.0..=1.0).contains(&d) {
        Ok(())
    } else {
        Err(CliError::config(key, format!("must lie in [0, 1], got {d}")))
    }
}

fn absent<T>(key: &str, v: &Option<T>, why: &str) -> Result<()> {
    match v {
        Some(_) => Err(CliError::config(key, why)),
        None => Ok(()),
    }
}

fn required<'a, T>(key: &str, v: &'a Option<T>, kind: Kind) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| CliError::config(key, format!("required for kind `{}`", kind.name())))
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Local => "local",
            Scheme::Leader => "leader",
            Scheme::External => "external",
        }
    }
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Blfg => "blfg",
            Kind::Bcfon => "bcfon",
            Kind::Topdown => "topdown",
            Kind::Bottomup => "bottomup",
        }
    }

    fn has_leader(self) -> bool {
        matches!(self, Kind::Blfg | Kind::Topdown)
    }
}

impl ScenarioConfig {
    /// Checks every parameter against the invariants of the engine it feeds.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(
                "schema_version",
                format!("unsupported version {} (this build reads {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return Err(CliError::config("name", "must be non-empty and use only letters, digits, `-`, `_` or `.`"));
        }
        let kind = self.kind;
        let dy = &self.dynamics;

        if !(dy.b > 0.0 && dy.b.is_finite()) {
            return Err(CliError::config("dynamics.b", format!("must be positive and finite, got {}", dy.b)));
        }
        if kind == Kind::Bottomup {
            absent("dynamics.d", &dy.d, "bottomup runs take d from structure.phases")?;
            absent("steps", &self.steps, "bottomup runs take their length from structure.phases")?;
        } else {
            let d = *required("dynamics.d", &dy.d, kind)?;
            unit_interval("dynamics.d", d)?;
            if kind.has_leader() && d >= 1.0 {
                return Err(CliError::config("dynamics.d", format!("followers need d < 1, got {d}")));
            }
            required("steps", &self.steps, kind)?;
        }

        let allowed: &[Scheme] = match kind {
            Kind::Blfg | Kind::Topdown => &[Scheme::Local, Scheme::Leader],
            Kind::Bcfon => &[Scheme::Local, Scheme::External],
            Kind::Bottomup => &[Scheme::Local],
        };
        if !allowed.contains(&dy.scheme) {
            return Err(CliError::config(
                "dynamics.scheme",
                format!("`{}` is not available for kind `{}`", dy.scheme.name(), kind.name()),
            ));
        }

        let steps = self.steps.unwrap_or(0);
        if kind.has_leader() {
            match required("dynamics.leader", &dy.leader, kind)? {
                LeaderInput::Constant(x) => finite("dynamics.leader", *x)?,
                LeaderInput::Series(xs) => {
                    if kind == Kind::Topdown {
                        return Err(CliError::config("dynamics.leader", "the top leader of a hierarchy is a constant"));
                    }
                    if xs.len() < steps {
                        return Err(CliError::config(
                            "dynamics.leader",
                            format!("series has {} values but the run takes {steps} steps", xs.len()),
                        ));
                    }
                    xs.iter().try_for_each(|&x| finite("dynamics.leader", x))?;
                }
            }
        } else {
            absent("dynamics.leader", &dy.leader, "only blfg and topdown runs have a leader")?;
        }

        let n = self.population()?;
        if dy.scheme == Scheme::External {
            match required("dynamics.external", &dy.external, kind)? {
                ExternalInput::Shared(g) => finite("dynamics.external", *g)?,
                ExternalInput::PerAgent(g) => {
                    if g.len() != n {
                        return Err(CliError::config(
                            "dynamics.external",
                            format!("has {} values for {n} agents", g.len()),
                        ));
                    }
                    g.iter().try_for_each(|&x| finite("dynamics.external", x))?;
                }
                ExternalInput::Series(rows) => {
                    if rows.len() < steps {
                        return Err(CliError::config(
                            "dynamics.external",
                            format!("series has {} rows but the run takes {steps} steps", rows.len()),
                        ));
                    }
                    for row in rows {
                        if row.len() != n {
                            return Err(CliError::config(
                                "dynamics.external",
                                format!("row has {} values for {n} agents", row.len()),
                            ));
                        }
                        row.iter().try_for_each(|&x| finite("dynamics.external", x))?;
                    }
                }
            }
        } else {
            absent("dynamics.external", &dy.external, "only the external scheme reads an external signal")?;
        }

        self.validate_initial(n)?;

        let out = &self.output;
        if out.stride == 0 {
            return Err(CliError::config("output.stride", "must be at least 1"));
        }
        if let Some(gap) = out.gap {
            if !(gap >= 0.0 && gap.is_finite()) {
                return Err(CliError::config("output.gap", format!("must be non-negative and finite, got {gap}")));
            }
        }
        if let Some(tol) = out.tol {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(CliError::config("output.tol", format!("must be non-negative and finite, got {tol}")));
            }
        }
        Ok(())
    }

    /// Number of agents the run evolves (every node below the top for hierarchies).
    pub fn population(&self) -> Result<usize> {
        let s = &self.structure;
        let n = match self.kind {
            Kind::Topdown => {
                absent("structure.followers", &s.followers, "topdown runs are sized by structure.group_sizes")?;
                absent("structure.phases", &s.phases, "only bottomup runs have phases")?;
                let sizes = required("structure.group_sizes", &s.group_sizes, self.kind)?;
                if sizes.is_empty() || sizes.contains(&0) {
                    return Err(CliError::config("structure.group_sizes", "needs at least one level and no empty groups"));
                }
                let mut groups = 1usize;
                let mut total = 0usize;
                for &size in sizes.iter().rev() {
                    groups = groups
                        .checked_mul(size)
                        .filter(|&g| g <= 10_000_000)
                        .ok_or_else(|| CliError::config("structure.group_sizes", "hierarchy is too large"))?;
                    total += groups;
                }
                total
            }
            kind => {
                absent("structure.group_sizes", &s.group_sizes, "only topdown runs have group sizes")?;
                if kind == Kind::Bottomup {
                    let phases = required("structure.phases", &s.phases, kind)?;
                    if phases.is_empty() {
                        return Err(CliError::config("structure.phases", "needs at least one phase"));
                    }
                    for (i, p) in phases.iter().enumerate() {
                        unit_interval(&format!("structure.phases[{i}].d"), p.d)?;
                        if p.steps == 0 {
                            return Err(CliError::config(&format!("structure.phases[{i}].steps"), "must be at least 1"));
                        }
                    }
                } else {
                    absent("structure.phases", &s.phases, "only bottomup runs have phases")?;
                }
                *required("structure.followers", &s.followers, kind)?
            }
        };
        if n == 0 {
            return Err(CliError::config("structure.followers", "must be at least 1"));
        }
        Ok(n)
    }

    fn validate_initial(&self, n: usize) -> Result<()> {
        match &self.initial {
            InitialSpec::Ramp { lo, hi, sigma } => {
                finite("initial.lo", *lo)?;
                finite("initial.hi", *hi)?;
                if lo > hi {
                    return Err(CliError::config("initial.hi", format!("must not be below lo ({lo}), got {hi}")));
                }
                if !(*sigma >= 0.0 && sigma.is_finite()) {
                    return Err(CliError::config("initial.sigma", format!("must be non-negative and finite, got {sigma}")));
                }
            }
            InitialSpec::Uniform { center, sigma } => {
                if !(center[0].is_finite() && center[1].is_finite() && center[0] <= center[1]) {
                    return Err(CliError::config("initial.center", format!("needs finite bounds lo <= hi, got {center:?}")));
                }
                if !(sigma[0] >= 0.0 && sigma[1].is_finite() && sigma[0] < sigma[1]) {
                    return Err(CliError::config("initial.sigma", format!("needs finite bounds 0 <= lo < hi, got {sigma:?}")));
                }
                if self.seed.is_none() {
                    return Err(CliError::config("seed", "required because the initial opinions are random"));
                }
            }
            InitialSpec::Explicit { centers, sigmas } => {
                if centers.len() != n {
                    return Err(CliError::config("initial.centers", format!("has {} values for {n} agents", centers.len())));
                }
                if sigmas.len() != n {
                    return Err(CliError::config("initial.sigmas", format!("has {} values for {n} agents", sigmas.len())));
                }
                centers.iter().try_for_each(|&c| finite("initial.centers", c))?;
                for &s in sigmas {
                    if !(s >= 0.0 && s.is_finite()) {
                        return Err(CliError::config("initial.sigmas", format!("must be non-negative and finite, got {s}")));
                    }
                }
            }
        }
        Ok(())
    }
}

//! Trajectory CSV and summary JSON files.

use crate::error::{CliError, Result};
use crate::run::{RunOutput, Summary};
use hfon_core::{AgentLabel, Sample, TrajectoryRecord};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const TRAJECTORY_HEADER: [&str; 6] = ["t", "agent", "level", "group", "center", "sigma"];

/// 17 significant digits, enough to round-trip any `f64`.
fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_trajectory<W: Write>(record: &TrajectoryRecord, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let csv_err = |e: csv::Error| CliError::Output(format!("writing trajectory: {e}"));
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    for s in record.samples() {
        w.write_record([
            s.t.to_string(),
            s.agent.to_string(),
            fmt_opt(s.level),
            fmt_opt(s.group),
            fmt_real(s.center),
            fmt_real(s.sigma),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("writing trajectory", e))
}

pub fn read_trajectory(path: &Path) -> Result<TrajectoryRecord> {
    let shown = path.display().to_string();
    let bad = |msg: String| CliError::Output(format!("{shown}: {msg}"));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(bad(format!("expected header `{}`", TRAJECTORY_HEADER.join(","))));
    }
    let mut samples = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let at = |what: &str| bad(format!("row {}: bad {what}", line + 2));
        let count = |i: usize, what: &str| field(i).parse::<usize>().map_err(|_| at(what));
        let opt = |i: usize, what: &str| match field(i) {
            "" => Ok(None),
            s => s.parse::<usize>().map(Some).map_err(|_| at(what)),
        };
        let real = |i: usize, what: &str| field(i).parse::<f64>().map_err(|_| at(what));
        samples.push(Sample {
            t: count(0, "t")?,
            agent: count(1, "agent")?,
            level: opt(2, "level")?,
            group: opt(3, "group")?,
            center: real(4, "center")?,
            sigma: real(5, "sigma")?,
        });
    }
    let first_t = samples.first().map(|s| s.t).ok_or_else(|| bad("no samples".into()))?;
    let labels = samples
        .iter()
        .take_while(|s| s.t == first_t)
        .map(|s| AgentLabel { level: s.level, group: s.group })
        .collect();
    TrajectoryRecord::from_samples(labels, samples)
        .ok_or_else(|| bad("rows must hold every agent once per step, in order".into()))
}

pub fn summary_json(summary: &Summary) -> Result<String> {
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// File stem of a run's outputs. Seeded runs carry their seed in the name
/// so the trajectory file records it too.
pub fn output_stem(summary: &Summary) -> String {
    let sc = &summary.scenario;
    match summary.seed {
        Some(seed) if sc.initial.is_random() => format!("{}.seed-{seed}", sc.name),
        _ => sc.name.clone(),
    }
}

/// Writes `<stem>.trajectory.csv` (thinned by the scenario's stride) and
/// `<stem>.summary.json` into `dir`, creating it if needed.
pub fn write_outputs(run: &RunOutput, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let stem = output_stem(&run.summary);
    let traj_path = dir.join(format!("{stem}.trajectory.csv"));
    let summary_path = dir.join(format!("{stem}.summary.json"));

    let thinned = run.record.thinned(run.summary.scenario.output.stride);
    let mut buf = Vec::new();
    write_trajectory(&thinned, &mut buf)?;
    fs::write(&traj_path, buf).map_err(|e| CliError::io(format!("writing {}", traj_path.display()), e))?;
    fs::write(&summary_path, summary_json(&run.summary)?)
        .map_err(|e| CliError::io(format!("writing {}", summary_path.display()), e))?;
    Ok((traj_path, summary_path))
}

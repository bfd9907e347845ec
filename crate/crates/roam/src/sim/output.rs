//! Run artifacts: `trajectories.csv`, `outcomes.json`, `metrics.json`, and a
//! copy of the scenario as `scenario.json`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::sim::field::FieldSample;
use crate::sim::metrics::{compute_metrics, Metrics};
use crate::sim::run::{classify, Outcome, RunResult, Trajectory};
use crate::sim::scenario::Scenario;
use crate::Vector;

fn header(dim: usize) -> Vec<String> {
    let mut h = vec!["trajectory_id".to_string(), "step".into(), "t".into()];
    h.extend((1..=dim).map(|i| format!("x_{i}")));
    h.extend((1..=dim).map(|i| format!("v_{i}")));
    h.push("gamma_min".into());
    h
}

pub fn write_trajectories<W: Write>(out: W, trajectories: &[Trajectory], dim: usize, dt: f64) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(dim))?;
    for traj in trajectories {
        for (k, x) in traj.states.iter().enumerate() {
            let mut row = vec![traj.id.to_string(), k.to_string(), (k as f64 * dt).to_string()];
            row.extend(x.iter().map(f64::to_string));
            row.extend(traj.velocities[k].iter().map(f64::to_string));
            row.push(traj.gamma_min[k].to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads trajectories back; outcomes are reclassified against `scenario`.
pub fn read_trajectories(path: &Path, scenario: &Scenario) -> io::Result<Vec<Trajectory>> {
    let dim = scenario.dimension;
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().collect::<Vec<_>>() != header(dim) {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "unexpected trajectories.csv header"));
    }
    let bad = |e: String| io::Error::new(io::ErrorKind::InvalidData, e);
    let mut out: Vec<Trajectory> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("column {i}: {e}")));
        let id: usize = rec[0].parse().map_err(|e| bad(format!("trajectory_id: {e}")))?;
        let x = Vector::from_iterator(dim, (3..3 + dim).map(num).collect::<io::Result<Vec<_>>>()?);
        let v = Vector::from_iterator(dim, (3 + dim..3 + 2 * dim).map(num).collect::<io::Result<Vec<_>>>()?);
        let g = num(3 + 2 * dim)?;
        if out.last().map_or(true, |t| t.id != id) {
            out.push(Trajectory {
                id,
                states: Vec::new(),
                velocities: Vec::new(),
                gamma_min: Vec::new(),
                outcome: Outcome::MaxSteps,
            });
        }
        let t = out.last_mut().unwrap();
        t.states.push(x);
        t.velocities.push(v);
        t.gamma_min.push(g);
    }
    for t in &mut out {
        t.outcome = classify(t, scenario);
    }
    Ok(out)
}

#[derive(Serialize)]
struct OutcomeRow<'a> {
    id: usize,
    outcome: Outcome,
    steps: usize,
    final_state: &'a [f64],
}

#[derive(Serialize)]
struct SkippedRow<'a> {
    id: usize,
    start: &'a [f64],
    gamma_min: f64,
}

#[derive(Serialize)]
struct Outcomes<'a> {
    integrated: usize,
    counts: BTreeMap<&'static str, usize>,
    trajectories: Vec<OutcomeRow<'a>>,
    skipped: Vec<SkippedRow<'a>>,
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Converged => "converged",
        Outcome::LocalMinimum => "local_minimum",
        Outcome::Collision => "collision",
        Outcome::MaxSteps => "max_steps",
    }
}

pub fn outcomes_json(run: &RunResult) -> String {
    let mut counts = BTreeMap::new();
    for o in [Outcome::Converged, Outcome::LocalMinimum, Outcome::Collision, Outcome::MaxSteps] {
        counts.insert(outcome_name(o), run.trajectories.iter().filter(|t| t.outcome == o).count());
    }
    let doc = Outcomes {
        integrated: run.trajectories.len(),
        counts,
        trajectories: run
            .trajectories
            .iter()
            .map(|t| OutcomeRow {
                id: t.id,
                outcome: t.outcome,
                steps: t.states.len() - 1,
                final_state: t.states.last().unwrap().as_slice(),
            })
            .collect(),
        skipped: run
            .skipped
            .iter()
            .map(|s| SkippedRow { id: s.id, start: s.start.as_slice(), gamma_min: s.gamma_min })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes") + "\n"
}

pub fn metrics_json(metrics: &Metrics) -> String {
    serde_json::to_string_pretty(metrics).expect("plain data serializes") + "\n"
}

/// Writes all run artifacts into `dir` (created if missing).
pub fn write_run(dir: &Path, scenario_source: &str, scenario: &Scenario, run: &RunResult) -> io::Result<Metrics> {
    fs::create_dir_all(dir)?;
    let file = io::BufWriter::new(fs::File::create(dir.join("trajectories.csv"))?);
    write_trajectories(file, &run.trajectories, scenario.dimension, scenario.integration.dt)?;
    fs::write(dir.join("outcomes.json"), outcomes_json(run))?;
    let metrics = compute_metrics(&run.trajectories, scenario);
    fs::write(dir.join("metrics.json"), metrics_json(&metrics))?;
    fs::write(dir.join("scenario.json"), scenario_source)?;
    Ok(metrics)
}

pub fn write_field<W: Write>(out: W, samples: &[FieldSample]) -> io::Result<()> {
    let dim = samples.first().map_or(2, |s| s.position.len());
    let mut w = csv::Writer::from_writer(out);
    let mut h: Vec<String> = (1..=dim).map(|i| format!("x_{i}")).collect();
    h.extend((1..=dim).map(|i| format!("v_{i}")));
    h.push("gamma_min".into());
    h.push("h".into());
    w.write_record(&h)?;
    for s in samples {
        let mut row: Vec<String> = s.position.iter().map(f64::to_string).collect();
        match &s.velocity {
            Some(v) => row.extend(v.iter().map(f64::to_string)),
            None => row.extend(std::iter::repeat(String::new()).take(dim)),
        }
        row.push(s.gamma_min.to_string());
        row.push(s.h.map_or(String::new(), |h| h.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

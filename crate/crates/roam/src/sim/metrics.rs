use serde::Serialize;

use crate::sim::run::{Outcome, ReferenceSet, Trajectory};
use crate::sim::scenario::Scenario;
use crate::Vector;

/// Mean and (population) standard deviation across trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Order-independent: values are sorted before summation.
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let mut dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
        dev.sort_by(f64::total_cmp);
        Some(Stat { mean, std: (dev.iter().sum::<f64>() / n).sqrt() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub n_trajectories: usize,
    pub n_local_minima_ratio: Option<Stat>,
    /// `None` when the dynamics have no reference point or cycle.
    pub rmse_pos_to_reference: Option<Stat>,
    pub rmse_vel_to_f0: Option<Stat>,
    pub nics_vel_to_f0: Option<Stat>,
    pub rmse_step: Option<Stat>,
    pub nics_step: Option<Stat>,
}

/// Root mean square of `‖a_t − b_t‖`.
pub fn rmse(a: &[Vector], b: &[Vector]) -> Option<f64> {
    if a.is_empty() {
        return None;
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_squared()).sum();
    Some((sum / a.len() as f64).sqrt())
}

/// `(1 − mean cosine)/2`; pairs containing a zero vector are left out.
pub fn nics(a: &[Vector], b: &[Vector]) -> Option<f64> {
    let cos: Vec<f64> = a
        .iter()
        .zip(b)
        .filter(|(x, y)| x.norm() > 0.0 && y.norm() > 0.0)
        .map(|(x, y)| (x.dot(y) / (x.norm() * y.norm())).clamp(-1.0, 1.0))
        .collect();
    if cos.is_empty() {
        return None;
    }
    Some(0.5 * (1.0 - cos.iter().sum::<f64>() / cos.len() as f64))
}

/// Per-trajectory values, in the order of `Metrics`' fields.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMetrics {
    pub local_minimum: bool,
    pub rmse_pos: Option<f64>,
    pub rmse_vel: Option<f64>,
    pub nics_vel: Option<f64>,
    pub rmse_step: Option<f64>,
    pub nics_step: Option<f64>,
}

pub fn trajectory_metrics(traj: &Trajectory, scenario: &Scenario) -> TrajectoryMetrics {
    let dt = scenario.integration.dt;
    let nominal: Vec<Vector> =
        traj.states.iter().enumerate().map(|(k, x)| scenario.dynamics.evaluate(x, k as f64 * dt)).collect();
    let rmse_pos = ReferenceSet::of(scenario).map(|r| {
        let sum: f64 = traj.states.iter().map(|x| r.distance(x).powi(2)).sum();
        (sum / traj.states.len() as f64).sqrt()
    });
    let v = &traj.velocities;
    let (prev, next) = if v.len() >= 2 { (&v[..v.len() - 1], &v[1..]) } else { (&v[..0], &v[..0]) };
    TrajectoryMetrics {
        local_minimum: traj.outcome == Outcome::LocalMinimum,
        rmse_pos: rmse_pos.filter(|_| !traj.states.is_empty()),
        rmse_vel: rmse(v, &nominal),
        nics_vel: nics(v, &nominal),
        rmse_step: rmse(prev, next),
        nics_step: nics(prev, next),
    }
}

pub fn compute_metrics(trajectories: &[Trajectory], scenario: &Scenario) -> Metrics {
    let per: Vec<TrajectoryMetrics> = trajectories.iter().map(|t| trajectory_metrics(t, scenario)).collect();
    let collect = |f: fn(&TrajectoryMetrics) -> Option<f64>| Stat::of(&per.iter().filter_map(f).collect::<Vec<_>>());
    Metrics {
        n_trajectories: trajectories.len(),
        n_local_minima_ratio: Stat::of(
            &per.iter().map(|m| if m.local_minimum { 1.0 } else { 0.0 }).collect::<Vec<_>>(),
        ),
        rmse_pos_to_reference: collect(|m| m.rmse_pos),
        rmse_vel_to_f0: collect(|m| m.rmse_vel),
        nics_vel_to_f0: collect(|m| m.nics_vel),
        rmse_step: collect(|m| m.rmse_step),
        nics_step: collect(|m| m.nics_step),
    }
}

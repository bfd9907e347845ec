use serde::Serialize;

use crate::dynamics::{DynamicsKind, TimedDynamics};
use crate::par::{self, Execution};
use crate::sim::scenario::Scenario;
use crate::Vector;

/// Γ below `1 − COLLISION_TOL` counts as a collision.
pub const COLLISION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    LocalMinimum,
    Collision,
    MaxSteps,
}

/// What trajectories are expected to reach.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSet {
    Point(Vector),
    Circle { center: Vector, radius: f64 },
}

impl ReferenceSet {
    pub fn of(scenario: &Scenario) -> Option<Self> {
        match &scenario.dynamics.kind {
            DynamicsKind::LimitCycle2D { radius, center } => {
                Some(Self::Circle { center: center.clone(), radius: *radius })
            }
            _ => scenario.dynamics.attractor(0.0).map(Self::Point),
        }
    }

    /// Distance to the point, or radial offset from the circle.
    pub fn distance(&self, x: &Vector) -> f64 {
        match self {
            Self::Point(a) => (x - a).norm(),
            Self::Circle { center, radius } => ((x - center).norm() - radius).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: usize,
    /// `states[k]` at `t = k·dt`.
    pub states: Vec<Vector>,
    /// Commanded velocity at each state.
    pub velocities: Vec<Vector>,
    pub gamma_min: Vec<f64>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone)]
pub struct SkippedStart {
    pub id: usize,
    pub start: Vector,
    pub gamma_min: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trajectories: Vec<Trajectory>,
    /// Starts outside free space; not integrated.
    pub skipped: Vec<SkippedStart>,
}

/// Explicit Euler integration from every free-space start point.
pub fn integrate(scenario: &Scenario, exec: Execution) -> RunResult {
    let starts: Vec<(usize, Vector)> = scenario.integration.start_points.iter().cloned().enumerate().collect();
    let (free, blocked): (Vec<_>, Vec<_>) =
        starts.into_iter().partition(|(_, x)| scenario.environment.gamma_min(x) >= 1.0);
    let trajectories = par::map(&free, exec, |(id, x)| integrate_one(scenario, *id, x));
    let skipped = blocked
        .into_iter()
        .map(|(id, start)| SkippedStart { gamma_min: scenario.environment.gamma_min(&start), id, start })
        .collect();
    RunResult { trajectories, skipped }
}

/// Integrates a single start point.
pub fn integrate_one(scenario: &Scenario, id: usize, start: &Vector) -> Trajectory {
    let it = &scenario.integration;
    let reference = ReferenceSet::of(scenario);
    let moving = scenario.environment.is_moving();
    let mut traj = Trajectory {
        id,
        states: Vec::new(),
        velocities: Vec::new(),
        gamma_min: Vec::new(),
        outcome: Outcome::MaxSteps,
    };
    let mut x = start.clone();
    for k in 0..=it.max_steps {
        let t = k as f64 * it.dt;
        let env = if moving { scenario.environment.at_time(t) } else { scenario.environment.clone() };
        let gamma = env.gamma_min(&x);
        let field = TimedDynamics::new(&scenario.dynamics, t);
        let v = if gamma < 1.0 - COLLISION_TOL {
            Vector::zeros(x.len())
        } else {
            // Degenerate configurations (e.g. exactly at a reference point)
            // stop the agent rather than abort the run.
            env.velocity(&field, &x, &scenario.avoidance).unwrap_or_else(|_| Vector::zeros(x.len()))
        };
        traj.states.push(x.clone());
        traj.velocities.push(v.clone());
        traj.gamma_min.push(gamma);
        if gamma < 1.0 - COLLISION_TOL {
            break;
        }
        if let Some(ReferenceSet::Point(a)) = &reference {
            if (&x - a).norm() < it.convergence_radius {
                break;
            }
        }
        if k == it.max_steps {
            break;
        }
        x += v * it.dt;
    }
    traj.outcome = classify(&traj, scenario);
    traj
}

/// Collision beats convergence, which beats a stall; otherwise the run
/// simply ran out of steps.
pub fn classify(traj: &Trajectory, scenario: &Scenario) -> Outcome {
    let it = &scenario.integration;
    if traj.gamma_min.iter().any(|g| *g < 1.0 - COLLISION_TOL) {
        return Outcome::Collision;
    }
    let reference = ReferenceSet::of(scenario);
    match &reference {
        Some(ReferenceSet::Point(a)) => {
            if traj.states.iter().any(|x| (x - a).norm() < it.convergence_radius) {
                return Outcome::Converged;
            }
        }
        Some(ReferenceSet::Circle { center, radius }) => {
            let n = traj.states.len();
            if n >= it.cycle_window {
                let tail = &traj.states[n - it.cycle_window..];
                if tail.iter().all(|x| ((x - center).norm() - radius).abs() <= it.cycle_tolerance) {
                    return Outcome::Converged;
                }
            }
        }
        None => {}
    }
    let mut run = 0;
    for k in 0..traj.states.len() {
        let away = reference.as_ref().map_or(true, |r| r.distance(&traj.states[k]) > it.convergence_radius);
        let stalled = traj.velocities[k].norm() < it.stall_speed && traj.gamma_min[k] < it.stall_gamma && away;
        run = if stalled { run + 1 } else { 0 };
        if run >= it.stall_steps {
            return Outcome::LocalMinimum;
        }
    }
    Outcome::MaxSteps
}

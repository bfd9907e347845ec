//! Scenario files: a JSON document with `dimension`, `obstacles`,
//! `dynamics`, `avoidance` and `integration`. Unknown keys are rejected.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::avoidance::{AvoidanceParams, WeightMode};
use crate::dynamics::{DynamicsKind, DynamicsSpec, MovingPoint, Perpendicular, Segment, DEFAULT_MAX_SPEED};
use crate::obstacle::{Obstacle, ObstacleTree, Shape};
use crate::sim::environment::Environment;
use crate::{Matrix, Result, RoamError, Vector};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub dimension: usize,
    #[serde(default)]
    pub obstacles: Vec<ObstacleEntry>,
    pub dynamics: DynamicsEntry,
    #[serde(default)]
    pub avoidance: AvoidanceEntry,
    pub integration: IntegrationEntry,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Ellipse,
    Sphere,
    Polygon,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Orientation {
    /// Rotation angle in radians (2D).
    Angle(f64),
    /// Rotation matrix, row-major.
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(rename = "type")]
    pub kind: ShapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_axes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Orientation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default)]
    pub inverted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_max: Option<f64>,
}

/// `type` is one of `straight`, `linear_matrix`, `limit_cycle`, `spiral`,
/// `wavy`, `line_following`, `local_pf`, `global_pf`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsEntry {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attractor: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    /// Spiral: 2×N projection onto the rotation plane.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<Vec<Vec<f64>>>,
    /// Spiral: constant velocity along the axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_velocity: Option<Vec<f64>>,
    /// Spiral: gain pulling toward the center along the axis (replaces
    /// `axis_velocity`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_amplitude: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<Vec<f64>>,
    /// Global path following: waypoints from start to goal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waypoints: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_speed: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvoidanceEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangent_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_mode: Option<WeightModeEntry>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightModeEntry {
    Reconciled,
    Literal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartPoints {
    List(Vec<Vec<f64>>),
    Grid { grid: GridEntry },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsEntry {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    pub start_points: StartPoints,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stall_speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stall_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stall_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workspace: Option<BoundsEntry>,
}

/// Axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub min: Vector,
    pub max: Vector,
}

impl Bounds {
    pub fn center(&self) -> Vector {
        (&self.min + &self.max) * 0.5
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integration {
    pub dt: f64,
    pub max_steps: usize,
    pub start_points: Vec<Vector>,
    pub convergence_radius: f64,
    /// Speed below which a step counts as stalled.
    pub stall_speed: f64,
    /// Consecutive stalled steps that make a local minimum.
    pub stall_steps: usize,
    /// Stalls only count close to an obstacle (`Γ` below this).
    pub stall_gamma: f64,
    /// Limit-cycle convergence: the final `cycle_window` states stay within
    /// `cycle_tolerance` of the cycle radius.
    pub cycle_window: usize,
    pub cycle_tolerance: f64,
    pub workspace: Option<Bounds>,
}

impl Default for Integration {
    fn default() -> Self {
        Self {
            dt: 0.01,
            max_steps: 500,
            start_points: Vec::new(),
            convergence_radius: 0.1,
            stall_speed: 1e-4,
            stall_steps: 50,
            stall_gamma: 1.5,
            cycle_window: 100,
            cycle_tolerance: 0.2,
            workspace: None,
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: Option<String>,
    pub dimension: usize,
    pub environment: Environment,
    pub dynamics: DynamicsSpec,
    pub avoidance: AvoidanceParams,
    pub integration: Integration,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| RoamError::ScenarioInvalid(vec![e.to_string()]))?;
        file.build()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RoamError::ScenarioInvalid(vec![format!("{}: {e}", path.display())]))?;
        Self::from_json(&text)
    }

    /// The same scenario without obstacles.
    pub fn unobstructed(&self) -> Self {
        Self { environment: Environment::default(), ..self.clone() }
    }
}

/// Collects violations instead of stopping at the first one.
struct Check {
    errors: Vec<String>,
}

impl Check {
    fn push(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn vector(&mut self, what: &str, v: &[f64], dim: usize) -> Option<Vector> {
        if v.len() != dim {
            self.push(format!("{what}: expected {dim} entries, got {}", v.len()));
            return None;
        }
        if v.iter().any(|x| !x.is_finite()) {
            self.push(format!("{what}: non-finite entry"));
            return None;
        }
        Some(Vector::from_column_slice(v))
    }

    fn required<'a, T>(&mut self, what: &str, v: &'a Option<T>) -> Option<&'a T> {
        if v.is_none() {
            self.push(format!("{what} is required"));
        }
        v.as_ref()
    }

    fn matrix(&mut self, what: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Option<Matrix> {
        if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
            self.push(format!("{what}: expected a {nrows}x{ncols} matrix"));
            return None;
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Some(Matrix::from_row_slice(nrows, ncols, &flat))
    }
}

impl ScenarioFile {
    pub fn build(&self) -> Result<Scenario> {
        let mut ck = Check { errors: Vec::new() };
        let dim = self.dimension;
        if dim < 2 {
            ck.push(format!("dimension must be at least 2, got {dim}"));
            return Err(RoamError::ScenarioInvalid(ck.errors));
        }
        let environment = self.environment(&mut ck, dim);
        let dynamics = self.dynamics_spec(&mut ck, dim);
        let avoidance = self.avoidance_params(&mut ck);
        let integration = self.integration(&mut ck, dim);
        if !ck.errors.is_empty() {
            return Err(RoamError::ScenarioInvalid(ck.errors));
        }
        Ok(Scenario {
            name: self.name.clone(),
            dimension: dim,
            environment: environment.expect("checked"),
            dynamics: dynamics.expect("checked"),
            avoidance,
            integration: integration.expect("checked"),
        })
    }

    fn environment(&self, ck: &mut Check, dim: usize) -> Option<Environment> {
        let before = ck.errors.len();
        let mut built = Vec::with_capacity(self.obstacles.len());
        for (i, entry) in self.obstacles.iter().enumerate() {
            let label = entry.id.clone().unwrap_or_else(|| format!("obstacle {i}"));
            built.push(obstacle(ck, entry, &label, dim));
        }
        let mut ids: HashMap<&str, usize> = HashMap::new();
        for (i, entry) in self.obstacles.iter().enumerate() {
            if let Some(id) = &entry.id {
                if ids.insert(id.as_str(), i).is_some() {
                    ck.push(format!("duplicate obstacle id {id:?}"));
                }
            }
        }
        let mut parent = vec![None; self.obstacles.len()];
        for (i, entry) in self.obstacles.iter().enumerate() {
            if let Some(p) = &entry.parent {
                match ids.get(p.as_str()) {
                    Some(&j) if j != i => parent[i] = Some(j),
                    Some(_) => ck.push(format!("obstacle {i} is its own parent")),
                    None => ck.push(format!("obstacle {i}: unknown parent {p:?}")),
                }
            }
        }
        if ck.errors.len() > before {
            return None;
        }
        let obstacles: Vec<Obstacle> = built.into_iter().map(|o| o.expect("checked")).collect();

        // Connected components of the parent relation form trees.
        let n = obstacles.len();
        let mut group: Vec<usize> = (0..n).collect();
        fn find(g: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while g[r] != r {
                r = g[r];
            }
            g[i] = r;
            r
        }
        for i in 0..n {
            if let Some(p) = parent[i] {
                let (a, b) = (find(&mut group, i), find(&mut group, p));
                group[a] = b;
            }
        }
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for i in 0..n {
            let g = find(&mut group, i);
            let k = *slot.entry(g).or_insert_with(|| {
                members.push(Vec::new());
                members.len() - 1
            });
            members[k].push(i);
        }
        let mut env = Environment::default();
        for m in members {
            if m.len() == 1 && parent[m[0]].is_none() {
                env.singles.push(obstacles[m[0]].clone());
                continue;
            }
            let local: HashMap<usize, usize> = m.iter().enumerate().map(|(k, &i)| (i, k)).collect();
            let comps = m.iter().map(|&i| obstacles[i].clone()).collect();
            let parents = m.iter().map(|&i| parent[i].map(|p| local[&p])).collect();
            let tree = ObstacleTree::new(comps, parents);
            for v in tree.validate() {
                ck.push(format!("tree component {}: {:?}: {}", m[v.component], v.kind, v.detail));
            }
            env.trees.push(tree);
        }
        Some(env)
    }

    fn dynamics_spec(&self, ck: &mut Check, dim: usize) -> Option<DynamicsSpec> {
        let d = &self.dynamics;
        let before = ck.errors.len();
        let vec_of = |ck: &mut Check, what: &str, v: &Option<Vec<f64>>| {
            ck.required(&format!("dynamics.{what}"), v).and_then(|v| ck.vector(&format!("dynamics.{what}"), v, dim))
        };
        let kind = match d.kind.as_str() {
            "straight" => {
                let attractor = vec_of(ck, "attractor", &d.attractor);
                attractor.map(|attractor| DynamicsKind::Straight { attractor, scaling: d.scaling.unwrap_or(1.0) })
            }
            "linear_matrix" => {
                let attractor = vec_of(ck, "attractor", &d.attractor);
                let matrix =
                    ck.required("dynamics.matrix", &d.matrix).and_then(|m| ck.matrix("dynamics.matrix", m, dim, dim));
                attractor.zip(matrix).map(|(attractor, matrix)| DynamicsKind::LinearMatrix { matrix, attractor })
            }
            "limit_cycle" | "wavy" | "line_following" if dim != 2 => {
                ck.push(format!("dynamics {:?} is two-dimensional", d.kind));
                None
            }
            "limit_cycle" => {
                let center = match &d.center {
                    Some(c) => ck.vector("dynamics.center", c, dim),
                    None => Some(Vector::zeros(dim)),
                };
                let radius = ck.required("dynamics.radius", &d.radius).copied();
                center.zip(radius).map(|(center, radius)| DynamicsKind::LimitCycle2D { radius, center })
            }
            "wavy" => vec_of(ck, "attractor", &d.attractor).map(|attractor| DynamicsKind::Wavy { attractor }),
            "line_following" => Some(DynamicsKind::LineFollowing),
            "spiral" => self.spiral(ck, dim),
            "local_pf" => {
                let start = vec_of(ck, "start", &d.start);
                let end = vec_of(ck, "end", &d.end);
                start.zip(end).map(|(start, end)| DynamicsKind::LocalPF { segment: Segment { start, end } })
            }
            "global_pf" => {
                let points: Option<Vec<Vector>> = ck
                    .required("dynamics.waypoints", &d.waypoints)
                    .map(|w| {
                        w.iter()
                            .enumerate()
                            .map(|(i, p)| ck.vector(&format!("dynamics.waypoints[{i}]"), p, dim))
                            .collect::<Vec<_>>()
                    })
                    .and_then(|v| v.into_iter().collect());
                match points {
                    Some(p) if p.len() >= 2 => {
                        let segments =
                            p.windows(2).rev().map(|w| Segment { start: w[0].clone(), end: w[1].clone() }).collect();
                        let attractor = p.last().unwrap().clone();
                        Some(DynamicsKind::GlobalPF { segments, attractor, speed: d.speed.unwrap_or(1.0) })
                    }
                    Some(_) => {
                        ck.push("dynamics.waypoints needs at least two points");
                        None
                    }
                    None => None,
                }
            }
            other => {
                ck.push(format!("unknown dynamics type {other:?}"));
                None
            }
        };
        let max_speed = d.max_speed.unwrap_or(DEFAULT_MAX_SPEED);
        if !(max_speed > 0.0) {
            ck.push("dynamics.max_speed must be positive");
        }
        if ck.errors.len() > before {
            return None;
        }
        kind.map(|kind| DynamicsSpec { kind, max_speed })
    }

    fn spiral(&self, ck: &mut Check, dim: usize) -> Option<DynamicsKind> {
        let d = &self.dynamics;
        let radius = *ck.required("dynamics.radius", &d.radius)?;
        let center = ck_required_vec(ck, "dynamics.center", &d.center)?;
        let base = ck.vector("dynamics.center", center, dim)?;
        let basis = match &d.plane {
            Some(rows) => ck.matrix("dynamics.plane", rows, 2, dim)?,
            None if dim == 3 => Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            None => {
                ck.push("dynamics.plane is required outside three dimensions");
                return None;
            }
        };
        let amplitude = match &d.center_amplitude {
            Some(a) => ck.vector("dynamics.center_amplitude", a, dim)?,
            None => Vector::zeros(dim),
        };
        let center = MovingPoint { base, amplitude, angular_frequency: d.center_frequency.unwrap_or(0.0) };
        let perpendicular = match (&d.axis_velocity, d.axis_gain) {
            (Some(_), Some(_)) => {
                ck.push("dynamics: give either axis_velocity or axis_gain");
                return None;
            }
            (Some(v), None) => Perpendicular::Constant(ck.vector("dynamics.axis_velocity", v, dim)?),
            (None, Some(gain)) => Perpendicular::Attracting { gain },
            (None, None) => Perpendicular::Constant(Vector::zeros(dim)),
        };
        Some(DynamicsKind::Spiral3D { radius, center, basis, perpendicular })
    }

    fn avoidance_params(&self, ck: &mut Check) -> AvoidanceParams {
        let a = &self.avoidance;
        let params = AvoidanceParams {
            tangent_radius: a.tangent_radius.unwrap_or(FRAC_PI_2),
            smoothness: a.smoothness.unwrap_or(0.3),
            weight_mode: match a.weight_mode {
                Some(WeightModeEntry::Literal) => WeightMode::Literal,
                _ => WeightMode::Reconciled,
            },
        };
        if let Err(RoamError::ScenarioInvalid(v)) = params.validate() {
            ck.errors.extend(v.into_iter().map(|m| format!("avoidance: {m}")));
        }
        params
    }

    fn integration(&self, ck: &mut Check, dim: usize) -> Option<Integration> {
        let e = &self.integration;
        let before = ck.errors.len();
        let d = Integration::default();
        let it = Integration {
            dt: e.dt.unwrap_or(d.dt),
            max_steps: e.max_steps.unwrap_or(d.max_steps),
            start_points: Vec::new(),
            convergence_radius: e.convergence_radius.unwrap_or(d.convergence_radius),
            stall_speed: e.stall_speed.unwrap_or(d.stall_speed),
            stall_steps: e.stall_steps.unwrap_or(d.stall_steps),
            stall_gamma: e.stall_gamma.unwrap_or(d.stall_gamma),
            cycle_window: e.cycle_window.unwrap_or(d.cycle_window),
            cycle_tolerance: e.cycle_tolerance.unwrap_or(d.cycle_tolerance),
            workspace: None,
        };
        if !(it.dt > 0.0 && it.dt.is_finite()) {
            ck.push(format!("integration.dt must be positive, got {}", it.dt));
        }
        if it.max_steps < 1 {
            ck.push("integration.max_steps must be at least 1");
        }
        if !(it.convergence_radius > 0.0) {
            ck.push("integration.convergence_radius must be positive");
        }
        if it.stall_steps < 1 {
            ck.push("integration.stall_steps must be at least 1");
        }
        let workspace = e.workspace.as_ref().and_then(|b| {
            let min = ck.vector("integration.workspace.min", &b.min, dim)?;
            let max = ck.vector("integration.workspace.max", &b.max, dim)?;
            if min.iter().zip(max.iter()).any(|(a, b)| a >= b) {
                ck.push("integration.workspace: min must be below max");
                return None;
            }
            Some(Bounds { min, max })
        });
        let starts = match &e.start_points {
            StartPoints::List(points) => points
                .iter()
                .enumerate()
                .filter_map(|(i, p)| ck.vector(&format!("integration.start_points[{i}]"), p, dim))
                .collect(),
            StartPoints::Grid { grid } => grid_points(ck, grid, dim),
        };
        if ck.errors.len() > before {
            return None;
        }
        if starts.is_empty() {
            ck.push("integration.start_points is empty");
            return None;
        }
        Some(Integration { start_points: starts, workspace, ..it })
    }
}

fn ck_required_vec<'a>(ck: &mut Check, what: &str, v: &'a Option<Vec<f64>>) -> Option<&'a [f64]> {
    ck.required(what, v).map(|v| v.as_slice())
}

/// Grid nodes including both ends of each axis, first axis varying fastest.
fn grid_points(ck: &mut Check, g: &GridEntry, dim: usize) -> Vec<Vector> {
    let (Some(min), Some(max)) = (ck.vector("grid.min", &g.min, dim), ck.vector("grid.max", &g.max, dim)) else {
        return Vec::new();
    };
    if g.counts.len() != dim || g.counts.contains(&0) {
        ck.push(format!("grid.counts: expected {dim} positive entries"));
        return Vec::new();
    }
    lattice(&min, &max, &g.counts)
}

pub(crate) fn lattice(min: &Vector, max: &Vector, counts: &[usize]) -> Vec<Vector> {
    let total: usize = counts.iter().product();
    (0..total)
        .map(|mut k| {
            let mut p = Vector::zeros(counts.len());
            for (axis, &n) in counts.iter().enumerate() {
                let i = k % n;
                k /= n;
                let t = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
                p[axis] = min[axis] + t * (max[axis] - min[axis]);
            }
            p
        })
        .collect()
}

fn obstacle(ck: &mut Check, e: &ObstacleEntry, label: &str, dim: usize) -> Option<Obstacle> {
    let before = ck.errors.len();
    let shape = match e.kind {
        ShapeKind::Ellipse => {
            let center = ck
                .required(&format!("{label}: center"), &e.center)
                .and_then(|c| ck.vector(&format!("{label}: center"), c, dim));
            let axes = ck
                .required(&format!("{label}: semi_axes"), &e.semi_axes)
                .and_then(|a| ck.vector(&format!("{label}: semi_axes"), a, dim));
            let orientation = match &e.orientation {
                None => Some(Matrix::identity(dim, dim)),
                Some(Orientation::Angle(a)) if dim == 2 => {
                    let (s, c) = a.sin_cos();
                    Some(Matrix::from_row_slice(2, 2, &[c, -s, s, c]))
                }
                Some(Orientation::Angle(_)) => {
                    ck.push(format!("{label}: an orientation angle needs dimension 2"));
                    None
                }
                Some(Orientation::Matrix(rows)) => ck.matrix(&format!("{label}: orientation"), rows, dim, dim),
            };
            match (center, axes, orientation) {
                (Some(center), Some(semi_axes), Some(orientation)) => {
                    let orthonormal = (orientation.transpose() * &orientation - Matrix::identity(dim, dim)).norm()
                        < 1e-9
                        && orientation.determinant() > 0.0;
                    if !orthonormal {
                        ck.push(format!("{label}: orientation is not a rotation"));
                        None
                    } else {
                        Some(Shape::Ellipse { center, semi_axes, orientation })
                    }
                }
                _ => None,
            }
        }
        ShapeKind::Sphere => {
            let center = ck
                .required(&format!("{label}: center"), &e.center)
                .and_then(|c| ck.vector(&format!("{label}: center"), c, dim));
            let radius = ck.required(&format!("{label}: radius"), &e.radius).copied();
            center.zip(radius).map(|(center, radius)| Shape::Sphere { center, radius })
        }
        ShapeKind::Polygon => {
            if dim != 2 {
                ck.push(format!("{label}: polygons are two-dimensional"));
                None
            } else {
                ck.required(&format!("{label}: vertices"), &e.vertices).and_then(|vs| {
                    let pts: Option<Vec<Vector>> = vs
                        .iter()
                        .enumerate()
                        .map(|(i, v)| ck.vector(&format!("{label}: vertices[{i}]"), v, 2))
                        .collect();
                    pts.map(Shape::polygon)
                })
            }
        }
    };
    if ck.errors.len() > before {
        return None;
    }
    let push = |ck: &mut Check, r: Result<Obstacle>| match r {
        Ok(o) => Some(o),
        Err(err) => {
            ck.push(format!("{label}: {err}"));
            None
        }
    };
    let mut obs = push(ck, Obstacle::new(shape?))?;
    if let Some(m) = e.margin {
        obs = push(ck, obs.with_margin(m))?;
    }
    if let Some(d0) = e.d0 {
        obs = push(ck, obs.with_d0(d0))?;
    }
    if let Some(r) = &e.reference_point {
        let r = ck.vector(&format!("{label}: reference_point"), r, dim)?;
        obs = push(ck, obs.with_reference(r))?;
    }
    if e.distance_max.is_some() {
        obs = push(ck, obs.with_influence(e.distance_max))?;
    }
    if let Some(v) = &e.velocity {
        let v = ck.vector(&format!("{label}: velocity"), v, dim)?;
        obs = push(ck, obs.with_velocity(v))?;
    }
    Some(obs.inverted(e.inverted))
}

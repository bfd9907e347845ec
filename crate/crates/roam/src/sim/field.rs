use crate::dynamics::TimedDynamics;
use crate::par::{self, Execution};
use crate::sim::scenario::{lattice, Bounds, Scenario};
use crate::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub position: Vector,
    /// `None` inside obstacles.
    pub velocity: Option<Vector>,
    pub gamma_min: f64,
    /// Speed relative to the nominal field.
    pub h: Option<f64>,
}

/// Bounds used when sampling: the configured workspace, otherwise the box
/// around the start points padded by one unit.
pub fn sampling_bounds(scenario: &Scenario) -> Bounds {
    if let Some(w) = &scenario.integration.workspace {
        return w.clone();
    }
    let pts = &scenario.integration.start_points;
    let mut min = pts[0].clone();
    let mut max = pts[0].clone();
    for p in pts {
        min = min.inf(p);
        max = max.sup(p);
    }
    Bounds { min: min.add_scalar(-1.0), max: max.add_scalar(1.0) }
}

/// Samples the modulated field at `t = 0` on an `nx × ny` grid over the
/// first two coordinates; other coordinates sit at the middle of `bounds`.
pub fn sample_field(scenario: &Scenario, bounds: &Bounds, nx: usize, ny: usize, exec: Execution) -> Vec<FieldSample> {
    let mid = bounds.center();
    let lo = Vector::from_column_slice(&[bounds.min[0], bounds.min[1]]);
    let hi = Vector::from_column_slice(&[bounds.max[0], bounds.max[1]]);
    let points: Vec<Vector> = lattice(&lo, &hi, &[nx, ny])
        .into_iter()
        .map(|p| {
            let mut x = mid.clone();
            x[0] = p[0];
            x[1] = p[1];
            x
        })
        .collect();
    let field = TimedDynamics::new(&scenario.dynamics, 0.0);
    par::map(&points, exec, |x| {
        let gamma_min = scenario.environment.gamma_min(x);
        if gamma_min < 1.0 {
            return FieldSample { position: x.clone(), velocity: None, gamma_min, h: None };
        }
        let v = scenario.environment.velocity(&field, x, &scenario.avoidance).ok();
        let nominal = scenario.dynamics.evaluate(x, 0.0).norm();
        let h = v.as_ref().map(|v| if nominal > 0.0 { v.norm() / nominal } else { 1.0 });
        FieldSample { position: x.clone(), velocity: v, gamma_min, h }
    })
}

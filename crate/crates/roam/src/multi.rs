//! Several obstacles at once, several enclosing hulls, and moving obstacles.

use crate::avoidance::{avoid_single, compose, obstacle_contribution, AvoidanceParams, WeightMode};
use crate::convergence::convergence_with;
use crate::direction_space::{DirectionFrame, DirectionPoint, UnitVector};
use crate::dynamics::{RelativeField, VectorField};
use crate::obstacle::Obstacle;
use crate::rotation::rotational_sum;
use crate::{Result, RoamError, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleWeights {
    pub weights: Vec<f64>,
    /// `1 − Σ w_o`, the share left to the nominal field.
    pub residual: f64,
}

impl ObstacleWeights {
    /// Weights rescaled to sum to one (all zero if nothing is active).
    pub fn proportions(&self) -> Vec<f64> {
        let sum: f64 = self.weights.iter().sum();
        if sum > 0.0 {
            self.weights.iter().map(|w| w / sum).collect()
        } else {
            self.weights.clone()
        }
    }
}

/// Per-obstacle weights. On an obstacle surface that obstacle takes all of
/// the weight; far away the weights vanish and the sum stays at most one.
pub fn obstacle_weights(gammas: &[f64], mode: WeightMode) -> ObstacleWeights {
    let n = gammas.len();
    let on_surface: Vec<usize> = (0..n).filter(|&i| gammas[i] <= 1.0).collect();
    let weights: Vec<f64> = if !on_surface.is_empty() {
        let share = 1.0 / on_surface.len() as f64;
        (0..n).map(|i| if gammas[i] <= 1.0 { share } else { 0.0 }).collect()
    } else {
        let raw: Vec<f64> = gammas
            .iter()
            .map(|&g| match mode {
                _ if g.is_infinite() => 0.0,
                WeightMode::Reconciled => 1.0 / (g - 1.0),
                WeightMode::Literal => 1.0 / g,
            })
            .collect();
        let sum: f64 = raw.iter().sum();
        let normalize = match mode {
            WeightMode::Reconciled => sum > 1.0,
            WeightMode::Literal => sum > 0.0,
        };
        if normalize {
            raw.iter().map(|w| w / sum).collect()
        } else {
            raw
        }
    };
    let residual = (1.0 - weights.iter().sum::<f64>()).max(0.0);
    ObstacleWeights { weights, residual }
}

fn gamma_or_inf(obs: &Obstacle, x: &Vector) -> Result<f64> {
    match obs.gamma(x) {
        Err(RoamError::AtReferencePoint) => Ok(f64::INFINITY),
        other => other,
    }
}

/// Avoidance among several (static) obstacles.
pub fn avoid_multi<F: VectorField + ?Sized>(
    obstacles: &[Obstacle],
    field: &F,
    x: &Vector,
    params: &AvoidanceParams,
) -> Result<Vector> {
    let f = field.eval(x);
    if f.norm() == 0.0 {
        return Ok(f);
    }
    let gammas = obstacles.iter().map(|o| gamma_or_inf(o, x)).collect::<Result<Vec<_>>>()?;
    let weights = obstacle_weights(&gammas, params.weight_mode).proportions();
    let active: Vec<usize> = (0..obstacles.len()).filter(|&i| weights[i] > 0.0).collect();
    match active.len() {
        0 => Ok(f),
        1 => {
            let o = &obstacles[active[0]];
            let c = convergence_with(field, o, x, &f)?;
            avoid_single(o, &f, &c, x, params)
        }
        _ => {
            let mut targets = Vec::with_capacity(active.len());
            for &i in &active {
                targets.push((weights[i], convergence_with(field, &obstacles[i], x, &f)?.into_inner()));
            }
            let c = rotational_sum(&f, &targets)?;
            blend_avoidance(obstacles, &active, &weights, &gammas, &c, &f, x, params)
        }
    }
}

/// `k̄(c, Σ ŵ_o κ_o) · ‖f‖ · Π h_o^ŵ_o` over the active obstacles.
#[allow(clippy::too_many_arguments)]
fn blend_avoidance(
    obstacles: &[Obstacle],
    active: &[usize],
    weights: &[f64],
    gammas: &[f64],
    c: &UnitVector,
    f: &Vector,
    x: &Vector,
    params: &AvoidanceParams,
) -> Result<Vector> {
    let frame = DirectionFrame::new(c);
    let kappa_f = frame.to_dir(f)?;
    let mut kappa = DirectionPoint::zeros(kappa_f.len());
    let mut h = 1.0;
    for &i in active {
        let dirs = obstacles[i].directions(x)?;
        let part = obstacle_contribution(&dirs, &frame, c, &kappa_f, gammas[i], params)?;
        kappa.axpy(weights[i], &part.kappa, 1.0);
        h *= part.info.h.powf(weights[i]);
    }
    Ok(compose(&frame, &kappa, f.norm() * h))
}

/// Adds the weighted obstacle velocities to a statically avoided velocity.
pub fn compose_moving_frame(static_result: &Vector, velocities: &[Vector], weights: &[f64]) -> Vector {
    let mut out = static_result.clone();
    for (v, w) in velocities.iter().zip(weights) {
        if *w != 0.0 {
            out.axpy(*w, v, 1.0);
        }
    }
    out
}

/// Avoidance of moving obstacles: the field is avoided in the frame moving
/// with the weighted obstacle velocity, then transported back.
pub fn avoid_multi_moving<F: VectorField + ?Sized>(
    obstacles: &[Obstacle],
    field: &F,
    x: &Vector,
    params: &AvoidanceParams,
) -> Result<Vector> {
    if !obstacles.iter().any(Obstacle::is_moving) {
        return avoid_multi(obstacles, field, x, params);
    }
    let gammas = obstacles.iter().map(|o| gamma_or_inf(o, x)).collect::<Result<Vec<_>>>()?;
    let weights = obstacle_weights(&gammas, params.weight_mode).weights;
    let velocities: Vec<Vector> = obstacles.iter().map(|o| o.velocity().clone()).collect();
    let frame = compose_moving_frame(&Vector::zeros(x.len()), &velocities, &weights);
    let relative = RelativeField { inner: field, frame: frame.clone() };
    let avoided = avoid_multi(obstacles, &relative, x, params)?;
    Ok(avoided + frame)
}

/// Weights across enclosing hulls: a hull fades out as its boundary is
/// approached from inside while another hull still contains the point.
pub fn boundary_weights(gammas: &[f64]) -> Result<Vec<f64>> {
    if gammas.iter().all(|g| *g <= 1.0) {
        return Err(RoamError::AllBoundariesViolated);
    }
    if gammas.iter().any(|g| g.is_infinite()) {
        let k = gammas.iter().filter(|g| g.is_infinite()).count() as f64;
        return Ok(gammas.iter().map(|g| if g.is_infinite() { 1.0 / k } else { 0.0 }).collect());
    }
    let excess: Vec<f64> = gammas.iter().map(|g| g.max(1.0) - 1.0).collect();
    let sum: f64 = excess.iter().sum();
    Ok(excess.iter().map(|e| e / sum).collect())
}

/// Local attractor per hull: the global one where the hull contains it,
/// otherwise a point just outside the hull in its direction.
pub fn default_local_attractors(boundaries: &[Obstacle], attractor: &Vector) -> Result<Vec<Vector>> {
    boundaries
        .iter()
        .map(|b| {
            if gamma_or_inf(b, attractor)? > 1.0 {
                return Ok(attractor.clone());
            }
            let r = b.reference_point();
            let edge = b.boundary_point_toward(&(attractor - r))?;
            Ok(r + (edge - r) * 1.05)
        })
        .collect()
}

/// Avoidance inside a union of inverted (hull) obstacles.
pub fn avoid_multihull<F: VectorField + ?Sized>(
    boundaries: &[Obstacle],
    field: &F,
    x: &Vector,
    local_attractors: &[Vector],
    params: &AvoidanceParams,
) -> Result<Vector> {
    let gammas = boundaries.iter().map(|b| gamma_or_inf(b, x)).collect::<Result<Vec<_>>>()?;
    let weights = boundary_weights(&gammas)?;
    let f = field.eval(x);
    if f.norm() == 0.0 {
        return Ok(f);
    }
    let active: Vec<usize> = (0..boundaries.len()).filter(|&i| weights[i] > 0.0).collect();
    let mut targets = Vec::with_capacity(active.len());
    for &i in &active {
        let to_local = &local_attractors[i] - x;
        if to_local.norm() > 0.0 {
            targets.push((weights[i], to_local));
        }
    }
    let c = match rotational_sum(&f, &targets) {
        Ok(c) => c,
        Err(RoamError::AntiCollinear { .. }) => {
            UnitVector::new(targets.iter().fold(Vector::zeros(x.len()), |acc, (w, t)| acc + t.normalize() * *w))?
        }
        Err(e) => return Err(e),
    };
    blend_avoidance(boundaries, &active, &weights, &gammas, &c, &f, x, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_examples() {
        let w = obstacle_weights(&[11.0], WeightMode::Reconciled);
        assert!((w.weights[0] - 0.1).abs() < 1e-15);
        assert!((w.residual - 0.9).abs() < 1e-15);
        let w = obstacle_weights(&[1.0, 2.0, 5.0], WeightMode::Reconciled);
        assert_eq!(w.weights, vec![1.0, 0.0, 0.0]);
        let w = obstacle_weights(&[2.0, 3.0], WeightMode::Reconciled);
        assert!((w.weights[0] - 2.0 / 3.0).abs() < 1e-15 && (w.weights[1] - 1.0 / 3.0).abs() < 1e-15);
        let w = obstacle_weights(&[2.0, 2.0], WeightMode::Literal);
        assert_eq!(w.weights, vec![0.5, 0.5]);
    }

    #[test]
    fn boundary_weight_examples() {
        assert_eq!(boundary_weights(&[3.0, 0.5]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(boundary_weights(&[1.0, 4.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(boundary_weights(&[2.0, 2.0]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(boundary_weights(&[0.5, 1.0]), Err(RoamError::AllBoundariesViolated));
    }

    #[test]
    fn moving_frame_examples() {
        let s = Vector::from_column_slice(&[1.0, 2.0]);
        let u1 = Vector::from_column_slice(&[1.0, 0.0]);
        let u2 = Vector::from_column_slice(&[0.0, 4.0]);
        assert_eq!(compose_moving_frame(&s, &[Vector::zeros(2)], &[0.7]), s);
        let out = compose_moving_frame(&s, &[u1, u2], &[0.5, 0.25]);
        assert_eq!(out, Vector::from_column_slice(&[1.5, 3.0]));
    }
}

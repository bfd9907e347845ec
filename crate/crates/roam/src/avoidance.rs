//! Single-obstacle avoidance: rotate the nominal velocity in direction space
//! toward a pseudo-tangent and slow down where it points into the obstacle.

use std::f64::consts::FRAC_PI_2;

use crate::direction_space::{DirectionFrame, DirectionPoint, UnitVector};
use crate::obstacle::{Directions, Obstacle};
use crate::{Result, RoamError, Vector};

/// How per-obstacle weights are formed from Γ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// `1/(Γ−1)`, normalized only when the sum exceeds one.
    #[default]
    Reconciled,
    /// `1/Γ`, always normalized.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvoidanceParams {
    /// `R^e ∈ [π/2, π]`; larger values push the flow away from surfaces.
    pub tangent_radius: f64,
    pub smoothness: f64,
    pub weight_mode: WeightMode,
}

impl Default for AvoidanceParams {
    fn default() -> Self {
        Self { tangent_radius: FRAC_PI_2, smoothness: 0.3, weight_mode: WeightMode::Reconciled }
    }
}

impl AvoidanceParams {
    pub fn validate(&self) -> Result<()> {
        let re = self.tangent_radius;
        if !(FRAC_PI_2 - 1e-12..=std::f64::consts::PI).contains(&re) {
            return Err(RoamError::ScenarioInvalid(vec![format!("tangent_radius {re} outside [pi/2, pi]")]));
        }
        if !(self.smoothness > 0.0) {
            return Err(RoamError::ScenarioInvalid(vec!["smoothness must be positive".into()]));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AvoidanceIntermediates {
    pub lambda: f64,
    pub q: f64,
    pub r_r: f64,
    pub delta_k: f64,
    pub h: f64,
}

/// Pseudo-tangent together with the quantities the weights are built from.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tangent {
    pub e: UnitVector,
    pub delta_k: f64,
    pub r_r: f64,
}

/// Positive root `b` of `‖a + b·d‖ = radius`, if any.
pub(crate) fn radius_crossing(a: &DirectionPoint, d: &DirectionPoint, radius: f64) -> Option<f64> {
    let dd = d.norm_squared();
    if dd == 0.0 {
        return None;
    }
    let ad = a.dot(d);
    let disc = ad * ad - dd * (a.norm_squared() - radius * radius);
    if disc < 0.0 {
        return None;
    }
    let b = (disc.sqrt() - ad) / dd;
    (b > 0.0).then_some(b)
}

/// Regular pseudo-tangent; the saddle case (`c` along `r_in`) is reported
/// through `delta_k = 0` with `e = c`.
pub(crate) fn tangent(n: &UnitVector, r_in: &UnitVector, c: &UnitVector, re: f64) -> Tangent {
    let frame = DirectionFrame::new(&n.neg());
    let a = frame.to_dir(r_in).expect("inward reference opposes the normal");
    let r_r = (re - a.norm()).min(FRAC_PI_2);
    let Ok(p) = frame.to_dir(c) else {
        // c points straight out of the surface.
        return Tangent { e: c.clone(), delta_k: std::f64::consts::PI, r_r };
    };
    let d = &p - &a;
    let delta_k = d.norm();
    if p.norm() >= re || delta_k < 1e-9 {
        return Tangent { e: c.clone(), delta_k, r_r };
    }
    let b = radius_crossing(&a, &d, re).expect("reference image lies inside the tangent sphere");
    Tangent { e: frame.from_dir(&(a + d * b)), delta_k, r_r }
}

/// Point where the ray from `k(−n, r_in)` through `k(−n, c)` meets the
/// sphere of radius `R^e`; `c` itself when already outside.
pub fn pseudo_tangent(n: &UnitVector, r_in: &UnitVector, c: &UnitVector, re: f64) -> Result<UnitVector> {
    let t = tangent(n, r_in, c, re);
    if t.delta_k < 1e-9 {
        return Err(RoamError::DegenerateSaddle);
    }
    Ok(t.e)
}

/// `λ = Γ^(−q)` with `q = max(1, R^r/Δk)^s`.
pub fn rotation_weight(gamma: f64, delta_k: f64, r_r: f64, s: f64) -> (f64, f64) {
    let gamma = gamma.max(1.0);
    if delta_k <= 0.0 {
        return (0.0, f64::INFINITY);
    }
    let q = (r_r / delta_k).max(1.0).powf(s);
    (gamma.powf(-q).min(1.0), q)
}

pub fn speed_scaling(delta_k: f64, r_r: f64, gamma: f64) -> f64 {
    let gamma = gamma.max(1.0);
    let inv = 1.0 - 1.0 / gamma;
    ((delta_k / r_r).powi(2) + inv * inv).min(1.0)
}

/// Per-obstacle contribution expressed in the direction space around `c`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Contribution {
    /// `(1−λ)k(c,f) + λk(c,e)`.
    pub kappa: DirectionPoint,
    pub info: AvoidanceIntermediates,
}

pub(crate) fn contribution(
    frame_c: &DirectionFrame,
    kappa_f: &DirectionPoint,
    gamma: f64,
    tangent: &Tangent,
    s: f64,
) -> Result<Contribution> {
    let (lambda, q) = rotation_weight(gamma, tangent.delta_k, tangent.r_r, s);
    let h = speed_scaling(tangent.delta_k, tangent.r_r, gamma);
    let kappa = if lambda == 0.0 {
        kappa_f.clone()
    } else {
        let kappa_e = match frame_c.to_dir(&tangent.e) {
            Ok(k) => k,
            Err(RoamError::AntiCollinear { .. }) => antipodal_coords(frame_c, &tangent.e),
            Err(e) => return Err(e),
        };
        kappa_f * (1.0 - lambda) + kappa_e * lambda
    };
    Ok(Contribution {
        kappa,
        info: AvoidanceIntermediates { lambda, q, r_r: tangent.r_r, delta_k: tangent.delta_k, h },
    })
}

/// Direction-space coordinates of a tangent that lies (almost) opposite the
/// anchor. The tangent can legitimately land there when `c` grazes the
/// surface on the far side of `r_in`; the rotation plane is kept from the
/// residual offset so the result stays continuous with its neighbours.
fn antipodal_coords(frame_c: &DirectionFrame, e: &UnitVector) -> DirectionPoint {
    let local = frame_c.basis().matrix().tr_mul(e.as_vector());
    let n = local.len();
    let mut tail = local.rows(1, n - 1).into_owned();
    let tail_norm = tail.norm();
    if tail_norm > 0.0 {
        tail /= tail_norm;
    } else {
        tail[0] = 1.0;
    }
    tail * tail_norm.atan2(local[0])
}

pub(crate) fn obstacle_contribution(
    dirs: &Directions,
    frame_c: &DirectionFrame,
    c: &UnitVector,
    kappa_f: &DirectionPoint,
    gamma: f64,
    params: &AvoidanceParams,
) -> Result<Contribution> {
    let t = tangent(&dirs.normal, &dirs.r_in, c, params.tangent_radius);
    contribution(frame_c, kappa_f, gamma, &t, params.smoothness)
}

/// Avoided velocity around one obstacle, with the intermediate quantities.
pub fn avoid_single_detailed(
    obs: &Obstacle,
    f: &Vector,
    c: &UnitVector,
    x: &Vector,
    params: &AvoidanceParams,
) -> Result<(Vector, AvoidanceIntermediates)> {
    let speed = f.norm();
    let idle = AvoidanceIntermediates { h: 1.0, ..Default::default() };
    if speed == 0.0 {
        return Ok((f.clone(), idle));
    }
    let gamma = match obs.gamma(x) {
        Ok(g) => g,
        Err(RoamError::AtReferencePoint) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    if gamma.is_infinite() {
        return Ok((f.clone(), idle));
    }
    let dirs = obs.directions(x)?;
    let frame_c = DirectionFrame::new(c);
    let kappa_f = frame_c.to_dir(f)?;
    let contrib = obstacle_contribution(&dirs, &frame_c, c, &kappa_f, gamma, params)?;
    Ok((compose(&frame_c, &contrib.kappa, speed * contrib.info.h), contrib.info))
}

pub fn avoid_single(
    obs: &Obstacle,
    f: &Vector,
    c: &UnitVector,
    x: &Vector,
    params: &AvoidanceParams,
) -> Result<Vector> {
    avoid_single_detailed(obs, f, c, x, params).map(|(v, _)| v)
}

pub(crate) fn compose(frame_c: &DirectionFrame, kappa: &DirectionPoint, magnitude: f64) -> Vector {
    frame_c.from_dir(kappa).into_inner() * magnitude
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obstacle::Shape;

    fn u(s: &[f64]) -> UnitVector {
        UnitVector::from_slice(s).unwrap()
    }

    #[test]
    fn tangent_examples() {
        let n = u(&[1.0, 0.0]);
        let r = u(&[-1.0, 0.0]);
        let e = pseudo_tangent(&n, &r, &u(&[0.0, 1.0]), FRAC_PI_2).unwrap();
        assert!((e.as_vector() - u(&[0.0, 1.0]).as_vector()).norm() < 1e-12);
        let e = pseudo_tangent(&n, &r, &u(&[-1.0, 1.0]), FRAC_PI_2).unwrap();
        assert!((e.as_vector() - u(&[0.0, 1.0]).as_vector()).norm() < 1e-12);
        let out = u(&[1.0, 0.2]);
        assert_eq!(pseudo_tangent(&n, &r, &out, FRAC_PI_2).unwrap(), out);
        assert_eq!(pseudo_tangent(&n, &r, &r, FRAC_PI_2), Err(RoamError::DegenerateSaddle));
    }

    #[test]
    fn weight_examples() {
        assert_eq!(rotation_weight(1.0, 0.3, 1.0, 0.3).0, 1.0);
        assert!(rotation_weight(1e12, 0.3, 1.0, 0.3).0 < 1e-9);
        assert!(rotation_weight(2.0, 1e-12, 1.0, 0.3).0 < 1e-3);
        assert_eq!(rotation_weight(2.0, 0.0, 1.0, 0.3).0, 0.0);
        assert_eq!(speed_scaling(0.0, 1.0, 1.0), 0.0);
        assert_eq!(speed_scaling(1.0, 1.0, 2.0), 1.0);
        assert!((speed_scaling(0.0, 1.0, 1e12) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn stationary_and_far_field() {
        let obs = Obstacle::new(Shape::sphere(Vector::from_column_slice(&[0.0, 0.0]), 1.0)).unwrap();
        let c = u(&[-1.0, 0.3]);
        let p = AvoidanceParams::default();
        let x = Vector::from_column_slice(&[2.0, 0.5]);
        assert_eq!(avoid_single(&obs, &Vector::zeros(2), &c, &x, &p).unwrap(), Vector::zeros(2));
        let f = Vector::from_column_slice(&[-1.0, 0.2]);
        let far = Vector::from_column_slice(&[99.0, 5.0]);
        let out = avoid_single(&obs, &f, &c, &far, &p).unwrap();
        assert!((&out - &f).norm() / f.norm() < 1e-2);
    }
}

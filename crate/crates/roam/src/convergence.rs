//! Convergence dynamics `c(ξ)`: a direction field that equals the nominal
//! field far away and is straight on the obstacle surface. Fields with an
//! attractor are first unfolded (shrink → fold → inflate) so the attractor
//! sits at infinity.

use crate::direction_space::{complete_basis, rotation_from_pair, OrthonormalBasis, UnitVector};
use crate::dynamics::VectorField;
use crate::obstacle::Obstacle;
use crate::rotation::rotational_sum;
use crate::{Result, RoamError, Vector, TOL_ANTICOLLINEAR};

/// Width of the band in which the mapping weight fades out before the
/// folding singularity.
pub const FOLD_FADE: f64 = 1e-3;

/// Collapses the obstacle onto its reference point.
pub fn shrink(obs: &Obstacle, x: &Vector) -> Result<Vector> {
    let r = obs.reference_point();
    let d = x - r;
    let dist = d.norm();
    if !(dist > 1e-12) {
        return Err(RoamError::AtReferencePoint);
    }
    let radius = (obs.boundary_point(x)? - r).norm();
    Ok(r + d * ((dist - radius) / dist))
}

/// Inverse of [`shrink`].
pub fn inflate(obs: &Obstacle, x: &Vector) -> Result<Vector> {
    let r = obs.reference_point();
    let d = x - r;
    let dist = d.norm();
    if !(dist > 1e-12) {
        return Err(RoamError::AtReferencePoint);
    }
    let radius = (obs.boundary_point(x)? - r).norm();
    Ok(r + d * ((dist + radius) / dist))
}

/// Frame of the folding map: the first axis points from the attractor to the
/// reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldingFrame {
    pub attractor: Vector,
    pub reference: Vector,
    pub basis: OrthonormalBasis,
    pub power: f64,
}

impl FoldingFrame {
    pub fn new(attractor: Vector, reference: Vector) -> Result<Self> {
        let axis = UnitVector::new(&reference - &attractor).map_err(|_| RoamError::AtAttractor)?;
        Ok(Self { basis: complete_basis(&axis), attractor, reference, power: 2.0 })
    }

    fn scale(&self) -> f64 {
        (&self.reference - &self.attractor).norm()
    }

    /// Position relative to the attractor as (distance, local unit direction).
    fn polar(&self, x: &Vector) -> Result<(f64, Vector)> {
        let d = x - &self.attractor;
        let rho = d.norm();
        if !(rho > 1e-12) {
            return Err(RoamError::AtAttractor);
        }
        Ok((rho, self.basis.matrix().tr_mul(&d) / rho))
    }

    /// Alignment `p ∈ [−1, 1]` of `x − ξ^a` with the reference axis.
    pub fn alignment(&self, x: &Vector) -> Result<f64> {
        self.polar(x).map(|(_, l)| l[0])
    }
}

/// Folding map. Radial distance from the attractor is stretched
/// logarithmically along the axis (the attractor goes to −∞), and the angle
/// from the axis is opened up so the opposite ray goes to infinity
/// sideways. The reference point is a fixed point where the map is
/// conformal to first order.
pub fn fold(frame: &FoldingFrame, x: &Vector) -> Result<Vector> {
    let (rho, local) = frame.polar(x)?;
    let p = local[0];
    if p <= -1.0 + TOL_ANTICOLLINEAR {
        return Err(RoamError::FoldSingularity { p });
    }
    let a = frame.scale();
    let s1 = a * (1.0 + (rho / a).ln());
    let n = local.len();
    let tail = local.rows(1, n - 1).into_owned();
    let tn = tail.norm();
    // (1−p)/(1+p) written through the perpendicular part, which stays
    // accurate next to the axis where 1−p cancels.
    let ratio = (tn / (1.0 + p)).powi(2);
    let sp = 2.0 * a * ratio.powf(frame.power / 4.0);
    let mut out = Vector::zeros(n);
    out[0] = s1;
    if tn > 0.0 {
        out.rows_mut(1, n - 1).copy_from(&(tail * (sp / tn)));
    }
    Ok(&frame.attractor + frame.basis.matrix() * out)
}

/// Inverse of [`fold`].
pub fn unfold(frame: &FoldingFrame, m: &Vector) -> Vector {
    let a = frame.scale();
    let local = frame.basis.matrix().tr_mul(&(m - &frame.attractor));
    let n = local.len();
    let rho = a * (local[0] / a - 1.0).exp();
    let tail = local.rows(1, n - 1).into_owned();
    let sp = tail.norm();
    let k = (sp / (2.0 * a)).powf(4.0 / frame.power);
    let p = (1.0 - k) / (1.0 + k);
    let mut dir = Vector::zeros(n);
    dir[0] = p;
    if sp > 0.0 {
        let sin = (1.0 - p * p).max(0.0).sqrt();
        dir.rows_mut(1, n - 1).copy_from(&(tail * (sin / sp)));
    }
    &frame.attractor + frame.basis.matrix() * dir * rho
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappedPoint {
    pub point: Vector,
    /// `w^m ∈ [0, 1]`, already faded near the folding singularity.
    pub weight: f64,
}

/// `m = inflate ∘ fold ∘ shrink` and the mapping weight
/// `w^m = 1/√((Γ(ξ)−1)(Γ(m)−1) + 1)`.
///
/// The folding frame uses the shrunk attractor so that approaching the
/// attractor in the original space sends `m` to infinity.
pub fn total_map(obs: &Obstacle, attractor: &Vector, x: &Vector) -> Result<MappedPoint> {
    let gamma = obs.global_gamma(x)?;
    if gamma <= 1.0 {
        return Ok(MappedPoint { point: x.clone(), weight: 1.0 });
    }
    let frame = FoldingFrame::new(shrink(obs, attractor)?, obs.reference_point().clone())?;
    let y = shrink(obs, x)?;
    let p = frame.alignment(&y)?;
    let folded = fold(&frame, &y)?;
    let point = match inflate(obs, &folded) {
        Ok(m) => m,
        Err(RoamError::AtReferencePoint) => obs.boundary_point(x)?,
        Err(e) => return Err(e),
    };
    let gamma_m = obs.global_gamma(&point)?;
    let mut weight = 1.0 / ((gamma - 1.0) * (gamma_m - 1.0) + 1.0).sqrt();
    if !weight.is_finite() {
        weight = 0.0;
    }
    weight *= ((p + 1.0) / FOLD_FADE).clamp(0.0, 1.0);
    Ok(MappedPoint { point, weight })
}

/// `f̂ +̂ w·target`. An exactly opposing target is taken only at full
/// weight (the surface); elsewhere `f̂` is kept so `c` never opposes `f`.
pub(crate) fn blend(f: &UnitVector, weight: f64, target: &Vector) -> Result<UnitVector> {
    match rotational_sum(f, &[(weight, target.clone())]) {
        Err(RoamError::AntiCollinear { .. }) if weight >= 1.0 => UnitVector::new(target.clone()),
        Err(RoamError::AntiCollinear { .. }) => Ok(f.clone()),
        other => other,
    }
}

/// `w^c = min(1, 1/Γ)`, with full weight inside the obstacle.
pub fn convergence_weight(gamma: f64) -> f64 {
    if gamma <= 1.0 {
        1.0
    } else {
        1.0 / gamma
    }
}

/// Nominal direction at the reference point; when the obstacle covers the
/// attractor it is replaced by the straight field through the reference.
pub(crate) fn reference_velocity<F: VectorField + ?Sized>(field: &F, obs: &Obstacle) -> Vector {
    let r = obs.reference_point();
    let f_r = field.eval(r);
    let Some(a) = field.attractor() else { return f_r };
    if obs.is_inverted() {
        return f_r;
    }
    let Ok(gamma_a) = obs.global_gamma(&a) else { return f_r };
    if gamma_a > 1.0 {
        return f_r;
    }
    let w = if gamma_a > 0.0 { (1.0 / gamma_a).min(1.0) } else { 1.0 };
    let straight = (r - &a) * field.attractor_sign();
    if straight.norm() == 0.0 {
        return f_r;
    }
    straight * w + f_r * (1.0 - w)
}

/// Whether the unfolding pipeline applies to this obstacle/field pair.
pub(crate) fn unfolding_attractor<F: VectorField + ?Sized>(field: &F, obs: &Obstacle) -> Option<Vector> {
    let a = field.attractor()?;
    if obs.is_inverted() {
        return None;
    }
    match obs.global_gamma(&a) {
        Ok(g) if g > 1.0 => Some(a),
        _ => None,
    }
}

/// Convergence direction for a single obstacle.
pub fn convergence_dynamics<F: VectorField + ?Sized>(field: &F, obs: &Obstacle, x: &Vector) -> Result<UnitVector> {
    let f = field.eval(x);
    convergence_with(field, obs, x, &f)
}

pub(crate) fn convergence_with<F: VectorField + ?Sized>(
    field: &F,
    obs: &Obstacle,
    x: &Vector,
    f: &Vector,
) -> Result<UnitVector> {
    let gamma = match obs.gamma(x) {
        Ok(g) => g,
        Err(RoamError::AtReferencePoint) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let target = reference_velocity(field, obs);
    let Ok(f_hat) = UnitVector::new(f.clone()) else {
        return UnitVector::new(target);
    };
    if target.norm() == 0.0 || gamma.is_infinite() {
        return Ok(f_hat);
    }

    if obs.is_inverted() {
        // Inside a hull the straight field toward the attractor plays the
        // role of f(ξ^r): it is straight on the whole boundary.
        let straight = field.attractor().map(|a| a - x).filter(|d| d.norm() > 0.0);
        return blend(&f_hat, convergence_weight(gamma), &straight.unwrap_or(target));
    }

    let Some(a) = unfolding_attractor(field, obs) else {
        return blend(&f_hat, convergence_weight(gamma), &target);
    };
    if gamma <= 1.0 {
        return UnitVector::new(target);
    }
    let mapped = match total_map(obs, &a, x) {
        Ok(m) => m,
        Err(RoamError::FoldSingularity { .. }) | Err(RoamError::AtAttractor) => return Ok(f_hat),
        Err(e) => return Err(e),
    };
    if mapped.weight == 0.0 {
        return Ok(f_hat);
    }
    let back = match rotation_from_pair(&(&mapped.point - &a), &(x - &a)) {
        Ok(r) => r,
        Err(RoamError::AntiCollinear { .. }) => return Ok(f_hat),
        Err(e) => return Err(e),
    };
    blend(&f_hat, mapped.weight, &back.rotate(&target))
}

//! Initial dynamics `f(ξ, t)`: the nominal vector fields that get modulated.

use crate::direction_space::UnitVector;
use crate::rotation::{reduce_tree, RotationTree};
use crate::{Matrix, Result, Vector};

pub const DEFAULT_MAX_SPEED: f64 = 10.0;

/// A point that may oscillate: `base + amplitude · sin(ω t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingPoint {
    pub base: Vector,
    pub amplitude: Vector,
    pub angular_frequency: f64,
}

impl MovingPoint {
    pub fn fixed(base: Vector) -> Self {
        let n = base.len();
        Self { base, amplitude: Vector::zeros(n), angular_frequency: 0.0 }
    }

    pub fn at(&self, t: f64) -> Vector {
        if self.angular_frequency == 0.0 {
            return self.base.clone();
        }
        &self.base + &self.amplitude * (self.angular_frequency * t).sin()
    }
}

/// Motion along the spiral axis.
#[derive(Debug, Clone, PartialEq)]
pub enum Perpendicular {
    Constant(Vector),
    /// `gain · (I − BᵀB)(ξ^a − ξ)`: pulls toward the center along the axis.
    Attracting {
        gain: f64,
    },
}

/// One path segment; its local attractor is the `end` point.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: Vector,
    pub end: Vector,
}

impl Segment {
    pub fn direction(&self) -> Vector {
        (&self.end - &self.start).normalize()
    }

    pub fn distance(&self, x: &Vector) -> f64 {
        let d = &self.end - &self.start;
        let t = ((x - &self.start).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
        (x - (&self.start + d * t)).norm()
    }

    /// Local path-following field: converge onto the line, move along it.
    pub fn local_field(&self, x: &Vector) -> Vector {
        let u = self.direction();
        let delta = x - &self.end;
        &u + &u * delta.dot(&u) - delta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsKind {
    /// `q (ξ^a − ξ)` with constant `q`.
    Straight {
        attractor: Vector,
        scaling: f64,
    },
    /// `A (ξ − ξ^a)`.
    LinearMatrix {
        matrix: Matrix,
        attractor: Vector,
    },
    LimitCycle2D {
        radius: f64,
        center: Vector,
    },
    /// `basis` is a 2×N projection onto the rotation plane.
    Spiral3D {
        radius: f64,
        center: MovingPoint,
        basis: Matrix,
        perpendicular: Perpendicular,
    },
    /// Straight field rotated by `sin‖ξ^a − ξ‖` (2D).
    Wavy {
        attractor: Vector,
    },
    /// `[1, −ξ₂]`.
    LineFollowing,
    LocalPF {
        segment: Segment,
    },
    /// Segments ordered from the goal backwards: the first ends at `attractor`.
    GlobalPF {
        segments: Vec<Segment>,
        attractor: Vector,
        speed: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsSpec {
    pub kind: DynamicsKind,
    pub max_speed: f64,
}

impl DynamicsSpec {
    pub fn new(kind: DynamicsKind) -> Self {
        Self { kind, max_speed: DEFAULT_MAX_SPEED }
    }

    pub fn straight(attractor: Vector) -> Self {
        Self::new(DynamicsKind::Straight { attractor, scaling: 1.0 })
    }

    pub fn limit_cycle(radius: f64, center: Vector) -> Self {
        Self::new(DynamicsKind::LimitCycle2D { radius, center })
    }

    /// Spiral: rotate in the x–z plane, advance along +y.
    pub fn spiral(radius: f64, center: Vector) -> Self {
        Self::new(DynamicsKind::Spiral3D {
            radius,
            center: MovingPoint::fixed(center),
            basis: Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            perpendicular: Perpendicular::Constant(Vector::from_column_slice(&[0.0, 1.0, 0.0])),
        })
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            DynamicsKind::Straight { attractor, .. }
            | DynamicsKind::LinearMatrix { attractor, .. }
            | DynamicsKind::GlobalPF { attractor, .. } => Some(attractor.len()),
            DynamicsKind::Spiral3D { basis, .. } => Some(basis.ncols()),
            DynamicsKind::LocalPF { segment } => Some(segment.end.len()),
            _ => Some(2),
        }
    }

    /// Field value, saturated at `max_speed`.
    pub fn evaluate(&self, x: &Vector, t: f64) -> Vector {
        let v = self.raw(x, t);
        let n = v.norm();
        if n > self.max_speed {
            v * (self.max_speed / n)
        } else {
            v
        }
    }

    fn raw(&self, x: &Vector, t: f64) -> Vector {
        match &self.kind {
            DynamicsKind::Straight { attractor, scaling } => (attractor - x) * *scaling,
            DynamicsKind::LinearMatrix { matrix, attractor } => matrix * (x - attractor),
            DynamicsKind::LimitCycle2D { radius, center } => cycle(&(x - center), *radius),
            DynamicsKind::Spiral3D { radius, center, basis, perpendicular } => {
                let c = center.at(t);
                let rel = x - &c;
                let planar = basis * &rel;
                let mut v = basis.tr_mul(&cycle(&planar, *radius));
                match perpendicular {
                    Perpendicular::Constant(p) => v += p,
                    Perpendicular::Attracting { gain } => {
                        let along = -&rel + basis.tr_mul(&planar);
                        v += along * *gain;
                    }
                }
                v
            }
            DynamicsKind::Wavy { attractor } => {
                let d = attractor - x;
                let (s, c) = d.norm().sin().sin_cos();
                Vector::from_column_slice(&[c * d[0] - s * d[1], s * d[0] + c * d[1]])
            }
            DynamicsKind::LineFollowing => Vector::from_column_slice(&[1.0, -x[1]]),
            DynamicsKind::LocalPF { segment } => segment.local_field(x),
            DynamicsKind::GlobalPF { segments, attractor, speed } => {
                let to_goal = attractor - x;
                let dist = to_goal.norm();
                if dist == 0.0 {
                    return to_goal;
                }
                let dir = global_pf_direction(segments, attractor, x).unwrap_or_else(|_| {
                    // Degenerate tree: follow the nearest segment.
                    let s = segments
                        .iter()
                        .min_by(|a, b| a.distance(x).total_cmp(&b.distance(x)))
                        .expect("at least one segment");
                    UnitVector::new(s.local_field(x)).unwrap_or_else(|_| UnitVector::new_unchecked(&to_goal / dist))
                });
                dir.into_inner() * (speed * dist.min(1.0))
            }
        }
    }

    /// The single point where the field direction is undefined, if any.
    pub fn attractor(&self, _t: f64) -> Option<Vector> {
        match &self.kind {
            DynamicsKind::Straight { attractor, .. }
            | DynamicsKind::LinearMatrix { attractor, .. }
            | DynamicsKind::Wavy { attractor }
            | DynamicsKind::GlobalPF { attractor, .. } => Some(attractor.clone()),
            DynamicsKind::LimitCycle2D { center, .. } => Some(center.clone()),
            DynamicsKind::Spiral3D { .. } | DynamicsKind::LineFollowing | DynamicsKind::LocalPF { .. } => None,
        }
    }
}

fn cycle(rel: &Vector, radius: f64) -> Vector {
    let k = 2.0 * (radius - rel.norm());
    Vector::from_column_slice(&[rel[1] + k * rel[0], -rel[0] + k * rel[1]])
}

/// Segment weights `(1/d_s)(1 + min(⟨u_s, ξ^a_s − ξ⟩, 0))`, clamped at zero
/// and normalized when their sum exceeds one. A point on a segment gives
/// that segment full weight.
pub fn global_pf_weights(segments: &[Segment], x: &Vector) -> Vec<f64> {
    let mut w: Vec<f64> = Vec::with_capacity(segments.len());
    let on: Vec<usize> = (0..segments.len()).filter(|&i| segments[i].distance(x) < 1e-12).collect();
    if !on.is_empty() {
        return (0..segments.len()).map(|i| if i == on[0] { 1.0 } else { 0.0 }).collect();
    }
    for s in segments {
        let along = s.direction().dot(&(&s.end - x));
        w.push(((1.0 + along.min(0.0)) / s.distance(x)).max(0.0));
    }
    let sum: f64 = w.iter().sum();
    if sum > 1.0 {
        w.iter_mut().for_each(|v| *v /= sum);
    }
    w
}

/// Direction of the global path-following field.
///
/// The tree root points at the goal; the nominal segment directions form a
/// chain below it and each carries its local field as a child. Only the
/// local fields and the root receive weight.
pub fn global_pf_direction(segments: &[Segment], attractor: &Vector, x: &Vector) -> Result<UnitVector> {
    let mut tree = RotationTree::new(UnitVector::new(attractor - x)?);
    let ws = global_pf_weights(segments, x);
    let mut weights = vec![0.0];
    let mut parent = RotationTree::ROOT;
    for (s, w) in segments.iter().zip(&ws) {
        let nominal = tree.add(parent, UnitVector::new(s.direction())?)?;
        weights.push(0.0);
        let local = s.local_field(x);
        if *w > 0.0 {
            tree.add(nominal, UnitVector::new(local)?)?;
            weights.push(*w);
        }
        parent = nominal;
    }
    weights[0] = (1.0 - ws.iter().sum::<f64>()).max(0.0);
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    reduce_tree(&tree, &weights)
}

/// Field evaluated at a fixed time.
pub trait VectorField: Sync {
    fn eval(&self, x: &Vector) -> Vector;
    fn attractor(&self) -> Option<Vector>;

    /// −1 when the attractor is stable, +1 when it repels (e.g. the center
    /// of a limit cycle). Estimated from the divergence at the attractor.
    fn attractor_sign(&self) -> f64 {
        let Some(a) = self.attractor() else { return -1.0 };
        let h = 1e-5;
        let mut div = 0.0;
        for i in 0..a.len() {
            let mut p = a.clone();
            p[i] += h;
            let mut m = a.clone();
            m[i] -= h;
            div += (self.eval(&p)[i] - self.eval(&m)[i]) / (2.0 * h);
        }
        if div > 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TimedDynamics<'a> {
    pub spec: &'a DynamicsSpec,
    pub t: f64,
}

impl<'a> TimedDynamics<'a> {
    pub fn new(spec: &'a DynamicsSpec, t: f64) -> Self {
        Self { spec, t }
    }
}

impl VectorField for TimedDynamics<'_> {
    fn eval(&self, x: &Vector) -> Vector {
        self.spec.evaluate(x, self.t)
    }

    fn attractor(&self) -> Option<Vector> {
        self.spec.attractor(self.t)
    }
}

/// A field seen from a frame moving with constant velocity `frame`.
pub struct RelativeField<'a, F: VectorField + ?Sized> {
    pub inner: &'a F,
    pub frame: Vector,
}

impl<F: VectorField + ?Sized> VectorField for RelativeField<'_, F> {
    fn eval(&self, x: &Vector) -> Vector {
        self.inner.eval(x) - &self.frame
    }

    fn attractor(&self) -> Option<Vector> {
        self.inner.attractor()
    }
}

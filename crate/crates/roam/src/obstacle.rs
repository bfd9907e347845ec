//! Star-shaped obstacles: distance field Γ, normals, reference directions and
//! boundary points; inverted hulls; and trees of star-shaped components.

use std::f64::consts::PI;

use crate::direction_space::UnitVector;
use crate::{Matrix, Result, RoamError, Vector};

/// Angular half-width over which polygon vertex normals are blended.
const VERTEX_ROUNDING: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `orientation` holds the principal axes as columns.
    Ellipse {
        center: Vector,
        semi_axes: Vector,
        orientation: Matrix,
    },
    Sphere {
        center: Vector,
        radius: f64,
    },
    /// Vertices in counter-clockwise order (reordered on construction).
    StarPolygon2D {
        vertices: Vec<Vector>,
    },
}

impl Shape {
    pub fn ellipse(center: Vector, semi_axes: Vector) -> Self {
        let n = center.len();
        Shape::Ellipse { center, semi_axes, orientation: Matrix::identity(n, n) }
    }

    /// 2D ellipse rotated by `angle` (radians).
    pub fn ellipse_2d(center: [f64; 2], semi_axes: [f64; 2], angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Shape::Ellipse {
            center: Vector::from_column_slice(&center),
            semi_axes: Vector::from_column_slice(&semi_axes),
            orientation: Matrix::from_row_slice(2, 2, &[c, -s, s, c]),
        }
    }

    pub fn sphere(center: Vector, radius: f64) -> Self {
        Shape::Sphere { center, radius }
    }

    pub fn polygon(vertices: Vec<Vector>) -> Self {
        let mut vertices = vertices;
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Shape::StarPolygon2D { vertices }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Ellipse { center, .. } | Shape::Sphere { center, .. } => center.len(),
            Shape::StarPolygon2D { .. } => 2,
        }
    }

    /// Center for ellipses and spheres, vertex centroid for polygons.
    pub fn center(&self) -> Vector {
        match self {
            Shape::Ellipse { center, .. } | Shape::Sphere { center, .. } => center.clone(),
            Shape::StarPolygon2D { vertices } => {
                vertices.iter().fold(Vector::zeros(2), |acc, v| acc + v) / vertices.len() as f64
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Shape::Ellipse { semi_axes, .. } => 2.0 * semi_axes.max(),
            Shape::Sphere { radius, .. } => 2.0 * radius,
            Shape::StarPolygon2D { vertices } => {
                let mut d: f64 = 0.0;
                for (i, a) in vertices.iter().enumerate() {
                    for b in &vertices[i + 1..] {
                        d = d.max((a - b).norm());
                    }
                }
                d
            }
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(RoamError::InvalidShape(m.to_string()));
        match self {
            Shape::Ellipse { center, semi_axes, orientation } => {
                let n = center.len();
                if n < 2 || semi_axes.len() != n || orientation.shape() != (n, n) {
                    return bad("ellipse dimensions disagree");
                }
                if semi_axes.iter().any(|a| !(*a > 0.0)) {
                    return bad("semi-axes must be positive");
                }
                if (orientation.tr_mul(orientation) - Matrix::identity(n, n)).norm() > 1e-9 {
                    return bad("orientation must be orthonormal");
                }
            }
            Shape::Sphere { center, radius } => {
                if center.len() < 2 || !(*radius > 0.0) {
                    return bad("sphere needs dimension >= 2 and a positive radius");
                }
            }
            Shape::StarPolygon2D { vertices } => {
                if vertices.len() < 3 || vertices.iter().any(|v| v.len() != 2) {
                    return bad("polygon needs at least three 2D vertices");
                }
                if signed_area(vertices).abs() < 1e-12 {
                    return bad("polygon is degenerate");
                }
            }
        }
        Ok(())
    }

    fn inflate(&self, margin: f64, reference: &Vector) -> Shape {
        if margin == 0.0 {
            return self.clone();
        }
        match self {
            Shape::Ellipse { center, semi_axes, orientation } => Shape::Ellipse {
                center: center.clone(),
                semi_axes: semi_axes.add_scalar(margin),
                orientation: orientation.clone(),
            },
            Shape::Sphere { center, radius } => Shape::Sphere { center: center.clone(), radius: radius + margin },
            Shape::StarPolygon2D { vertices } => Shape::StarPolygon2D {
                vertices: vertices
                    .iter()
                    .map(|v| {
                        let d = v - reference;
                        let n = d.norm();
                        v + d * (margin / n)
                    })
                    .collect(),
            },
        }
    }

    fn translated(&self, offset: &Vector) -> Shape {
        match self {
            Shape::Ellipse { center, semi_axes, orientation } => Shape::Ellipse {
                center: center + offset,
                semi_axes: semi_axes.clone(),
                orientation: orientation.clone(),
            },
            Shape::Sphere { center, radius } => Shape::Sphere { center: center + offset, radius: *radius },
            Shape::StarPolygon2D { vertices } => {
                Shape::StarPolygon2D { vertices: vertices.iter().map(|v| v + offset).collect() }
            }
        }
    }

    /// Distance `t > 0` at which `origin + t·dir` leaves a quadric.
    /// `origin` must be strictly inside. `None` for polygons.
    pub fn quadric_exit(&self, origin: &Vector, dir: &Vector) -> Option<f64> {
        let (y0, yd, axes): (Vector, Vector, Vector) = match self {
            Shape::Ellipse { center, semi_axes, orientation } => {
                (orientation.tr_mul(&(origin - center)), orientation.tr_mul(dir), semi_axes.clone())
            }
            Shape::Sphere { center, radius } => {
                (origin - center, dir.clone(), Vector::from_element(center.len(), *radius))
            }
            Shape::StarPolygon2D { .. } => return None,
        };
        let (mut a, mut b, mut c) = (0.0, 0.0, -1.0);
        for i in 0..axes.len() {
            let inv = 1.0 / (axes[i] * axes[i]);
            a += yd[i] * yd[i] * inv;
            b += y0[i] * yd[i] * inv;
            c += y0[i] * y0[i] * inv;
        }
        let disc = (b * b - a * c).max(0.0).sqrt();
        if b > 0.0 {
            Some(-c / (b + disc))
        } else {
            Some((disc - b) / a)
        }
    }

    /// Boundary distance from `origin` along unit `dir` (ray cast).
    fn boundary_distance(&self, origin: &Vector, dir: &Vector) -> f64 {
        if let Some(t) = self.quadric_exit(origin, dir) {
            return t;
        }
        let Shape::StarPolygon2D { vertices } = self else { unreachable!() };
        let mut best = f64::INFINITY;
        for i in 0..vertices.len() {
            let p = &vertices[i];
            let e = &vertices[(i + 1) % vertices.len()] - p;
            let denom = cross(dir, &e);
            if denom.abs() < 1e-300 {
                continue;
            }
            let w = p - origin;
            let t = cross(&w, &e) / denom;
            let s = cross(&w, dir) / denom;
            if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
                best = best.min(t);
            }
        }
        best
    }

    /// Outward unit normal of the surface point hit from `origin` along `dir`.
    fn surface_normal(&self, origin: &Vector, dir: &Vector, t: f64) -> Vector {
        let point = origin + dir * t;
        match self {
            Shape::Ellipse { center, semi_axes, orientation } => {
                let y = orientation.tr_mul(&(point - center));
                let g = y.component_div(&semi_axes.component_mul(semi_axes));
                (orientation * g).normalize()
            }
            Shape::Sphere { center, .. } => (point - center).normalize(),
            Shape::StarPolygon2D { vertices } => polygon_normal(vertices, origin, dir),
        }
    }
}

fn cross(a: &Vector, b: &Vector) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn signed_area(vertices: &[Vector]) -> f64 {
    let n = vertices.len();
    (0..n).map(|i| cross(&vertices[i], &vertices[(i + 1) % n])).sum::<f64>() / 2.0
}

fn edge_normal(vertices: &[Vector], i: usize) -> Vector {
    let e = &vertices[(i + 1) % vertices.len()] - &vertices[i];
    Vector::from_column_slice(&[e[1], -e[0]]).normalize()
}

fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Edge normal of the edge hit along `dir`, blended across vertices.
fn polygon_normal(vertices: &[Vector], origin: &Vector, dir: &Vector) -> Vector {
    let n = vertices.len();
    let ang = dir[1].atan2(dir[0]);
    for i in 0..n {
        let to_v = &vertices[i] - origin;
        let delta = wrap_angle(ang - to_v[1].atan2(to_v[0]));
        if delta.abs() < VERTEX_ROUNDING {
            let s = (delta + VERTEX_ROUNDING) / (2.0 * VERTEX_ROUNDING);
            let before = edge_normal(vertices, (i + n - 1) % n);
            let after = edge_normal(vertices, i);
            return (before * (1.0 - s) + after * s).normalize();
        }
    }
    // Edge whose angular span contains the ray.
    for i in 0..n {
        let a = &vertices[i] - origin;
        let b = &vertices[(i + 1) % n] - origin;
        if cross(&a, dir) >= 0.0 && cross(dir, &b) >= 0.0 {
            return edge_normal(vertices, i);
        }
    }
    unreachable!("reference point outside the polygon kernel")
}

/// The three directions consumed by the avoidance law.
#[derive(Debug, Clone, PartialEq)]
pub struct Directions {
    /// Points into free space at the boundary.
    pub normal: UnitVector,
    pub r_out: UnitVector,
    /// Satisfies `⟨normal, r_in⟩ < 0`.
    pub r_in: UnitVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    shape: Shape,
    inflated: Shape,
    reference: Vector,
    d0: f64,
    margin: f64,
    inverted: bool,
    distance_max: Option<f64>,
    velocity: Vector,
}

impl Obstacle {
    pub fn new(shape: Shape) -> Result<Self> {
        shape.check()?;
        let reference = shape.center();
        let n = shape.dim();
        let obs = Self {
            inflated: shape.clone(),
            shape,
            reference,
            d0: 1.0,
            margin: 0.0,
            inverted: false,
            distance_max: None,
            velocity: Vector::zeros(n),
        };
        obs.check_kernel()?;
        Ok(obs.rebuilt())
    }

    pub fn with_reference(mut self, reference: Vector) -> Result<Self> {
        if reference.len() != self.dim() {
            return Err(RoamError::DimensionMismatch { expected: self.dim(), got: reference.len() });
        }
        self.reference = reference;
        self.check_kernel()?;
        Ok(self.rebuilt())
    }

    pub fn with_margin(mut self, margin: f64) -> Result<Self> {
        if !(margin >= 0.0) {
            return Err(RoamError::InvalidShape("margin must be non-negative".into()));
        }
        self.margin = margin;
        Ok(self.rebuilt())
    }

    pub fn with_d0(mut self, d0: f64) -> Result<Self> {
        if !(d0 > 0.0) {
            return Err(RoamError::InvalidShape("d0 must be positive".into()));
        }
        self.d0 = d0;
        Ok(self)
    }

    pub fn with_influence(mut self, distance_max: Option<f64>) -> Result<Self> {
        if let Some(d) = distance_max {
            if !(d > 0.0) {
                return Err(RoamError::InvalidShape("influence radius must be positive".into()));
            }
        }
        self.distance_max = distance_max;
        Ok(self)
    }

    pub fn with_velocity(mut self, velocity: Vector) -> Result<Self> {
        if velocity.len() != self.dim() {
            return Err(RoamError::DimensionMismatch { expected: self.dim(), got: velocity.len() });
        }
        self.velocity = velocity;
        Ok(self)
    }

    pub fn inverted(mut self, inverted: bool) -> Self {
        self.inverted = inverted;
        self
    }

    fn rebuilt(mut self) -> Self {
        self.inflated = self.shape.inflate(self.margin, &self.reference);
        self
    }

    fn check_kernel(&self) -> Result<()> {
        match &self.shape {
            Shape::StarPolygon2D { vertices } => {
                let n = vertices.len();
                for i in 0..n {
                    let e = &vertices[(i + 1) % n] - &vertices[i];
                    if cross(&e, &(&self.reference - &vertices[i])) <= 0.0 {
                        return Err(RoamError::InvalidShape(format!(
                            "reference point does not see edge {i} of the polygon"
                        )));
                    }
                }
            }
            _ => {
                let c = self.shape.center();
                let d = &self.reference - &c;
                let dist = d.norm();
                if dist > 0.0 && dist >= self.shape.boundary_distance(&c, &(d / dist)) {
                    return Err(RoamError::InvalidShape("reference point must lie inside the shape".into()));
                }
            }
        }
        Ok(())
    }

    /// ‖ξ − ξ^r‖ / R(ξ) against the inflated shape (0 at the reference point).
    fn raw_ratio(&self, x: &Vector) -> f64 {
        let d = x - &self.reference;
        let dist = d.norm();
        if dist == 0.0 {
            return 0.0;
        }
        let dir = d / dist;
        dist / self.inflated.boundary_distance(&self.reference, &dir)
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Shape after margin inflation; this is what all queries use.
    pub fn effective_shape(&self) -> &Shape {
        &self.inflated
    }

    pub fn reference_point(&self) -> &Vector {
        &self.reference
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn is_inverted(&self) -> bool {
        self.inverted
    }

    pub fn distance_max(&self) -> Option<f64> {
        self.distance_max
    }

    pub fn velocity(&self) -> &Vector {
        &self.velocity
    }

    pub fn is_moving(&self) -> bool {
        self.velocity.iter().any(|v| *v != 0.0)
    }

    pub fn diameter(&self) -> f64 {
        self.inflated.diameter()
    }

    /// Copy moved by `offset` (shape and reference point).
    pub fn translated(&self, offset: &Vector) -> Self {
        let mut o = self.clone();
        o.shape = self.shape.translated(offset);
        o.inflated = self.inflated.translated(offset);
        o.reference = &self.reference + offset;
        o
    }

    fn radial(&self, x: &Vector) -> Result<(f64, Vector, f64)> {
        let d = x - &self.reference;
        let dist = d.norm();
        if !(dist > 1e-12) {
            return Err(RoamError::AtReferencePoint);
        }
        let dir = d / dist;
        let r = self.inflated.boundary_distance(&self.reference, &dir);
        Ok((dist, dir, r))
    }

    /// Distance function: 1 on the boundary, > 1 in free space.
    pub fn gamma(&self, x: &Vector) -> Result<f64> {
        let (dist, _, r) = match self.radial(x) {
            Ok(v) => v,
            Err(_) if !self.inverted => return Ok(0.0),
            Err(e) => return Err(e),
        };
        if self.inverted {
            return Ok((r / dist).powi(2));
        }
        if dist <= r {
            return Ok(dist / r);
        }
        let gap = dist - r;
        Ok(match self.distance_max {
            Some(m) if gap >= m => f64::INFINITY,
            Some(m) => m / (m - gap),
            None => gap / self.d0 + 1.0,
        })
    }

    /// Γ without the finite-influence cut-off.
    pub fn global_gamma(&self, x: &Vector) -> Result<f64> {
        if self.distance_max.is_none() {
            return self.gamma(x);
        }
        let mut o = self.clone();
        o.distance_max = None;
        o.gamma(x)
    }

    /// Boundary point on the ray from the reference point through `x`.
    pub fn boundary_point(&self, x: &Vector) -> Result<Vector> {
        let (_, dir, r) = self.radial(x)?;
        Ok(&self.reference + dir * r)
    }

    /// Boundary point in direction `dir` (need not be unit) from the reference.
    pub fn boundary_point_toward(&self, dir: &Vector) -> Result<Vector> {
        let u = UnitVector::new(dir.clone())?;
        let r = self.inflated.boundary_distance(&self.reference, &u);
        Ok(&self.reference + u.as_vector() * r)
    }

    pub fn normal(&self, x: &Vector) -> Result<UnitVector> {
        let (_, dir, r) = self.radial(x)?;
        let n = self.inflated.surface_normal(&self.reference, &dir, r);
        Ok(UnitVector::new_unchecked(if self.inverted { -n } else { n }))
    }

    pub fn directions(&self, x: &Vector) -> Result<Directions> {
        let (_, dir, r) = self.radial(x)?;
        let n = self.inflated.surface_normal(&self.reference, &dir, r);
        let away = UnitVector::new_unchecked(dir);
        Ok(if self.inverted {
            Directions { normal: UnitVector::new_unchecked(-n), r_out: away.neg(), r_in: away }
        } else {
            Directions { normal: UnitVector::new_unchecked(n), r_in: away.neg(), r_out: away }
        })
    }

    /// Exit distance of the ray `origin + t·dir` through the surface (Γ = 1).
    /// Closed form for quadrics, bisection otherwise.
    pub fn ray_exit(&self, origin: &Vector, dir: &UnitVector) -> Option<f64> {
        let inside = |t: f64| self.raw_ratio(&(origin + dir.as_vector() * t)) < 1.0;
        if !inside(0.0) {
            return None;
        }
        if let Some(t) = self.inflated.quadric_exit(origin, dir) {
            return Some(t);
        }
        let (mut lo, mut hi) = (0.0, 4.0 * self.diameter());
        if inside(hi) {
            return None;
        }
        for _ in 0..200 {
            if hi - lo <= 1e-9 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Deterministic boundary samples (2D: uniform angle, 3D: Fibonacci).
    pub fn boundary_samples(&self, count: usize) -> Vec<Vector> {
        sample_directions(self.dim(), count)
            .into_iter()
            .map(|d| self.boundary_point_toward(&d).expect("unit sample direction"))
            .collect()
    }
}

/// Deterministic, roughly uniform unit directions.
pub fn sample_directions(dim: usize, count: usize) -> Vec<Vector> {
    match dim {
        2 => (0..count)
            .map(|i| {
                let a = 2.0 * PI * (i as f64 + 0.5) / count as f64;
                Vector::from_column_slice(&[a.cos(), a.sin()])
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    Vector::from_column_slice(&[r * a.cos(), r * a.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut out = Vec::with_capacity(count);
            let mut k = 0usize;
            while out.len() < count {
                let mut v = Vector::zeros(dim);
                let i = k % dim;
                let j = (k / dim + i + 1) % dim;
                let s = if (k / (dim * dim)) % 2 == 0 { 1.0 } else { -1.0 };
                v[i] += s;
                if j != i {
                    v[j] += if (k / dim) % 2 == 0 { 0.5 } else { -0.5 };
                }
                out.push(v.normalize());
                k += 1;
            }
            out
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NoRoot,
    MultipleRoots,
    UnknownParent,
    Cycle,
    InvertedComponent,
    ReferenceOutsideComponent,
    ReferenceOutsideParent,
    ParentReferenceInside,
    NoIntersection,
    ParentOpposing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeViolation {
    pub component: usize,
    pub kind: ViolationKind,
    pub detail: String,
}

/// A concave obstacle assembled from overlapping star-shaped components.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleTree {
    components: Vec<Obstacle>,
    parents: Vec<Option<usize>>,
    root: usize,
    /// Breadth-first order from the root; unreachable components omitted.
    order: Vec<usize>,
}

impl ObstacleTree {
    pub fn new(components: Vec<Obstacle>, parents: Vec<Option<usize>>) -> Self {
        assert_eq!(components.len(), parents.len(), "one parent entry per component");
        let root = parents.iter().position(|p| p.is_none()).unwrap_or(0);
        let mut order = vec![root];
        let mut head = 0;
        while head < order.len() {
            let cur = order[head];
            for (i, p) in parents.iter().enumerate() {
                if *p == Some(cur) && !order.contains(&i) {
                    order.push(i);
                }
            }
            head += 1;
        }
        Self { components, parents, root, order }
    }

    pub fn single(obstacle: Obstacle) -> Self {
        Self::new(vec![obstacle], vec![None])
    }

    pub fn components(&self) -> &[Obstacle] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Obstacle {
        &self.components[i]
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parents[i]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Components with the root first and every parent before its children.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        !self.parents.contains(&Some(i))
    }

    /// Chain from `i` up to and including the root.
    pub fn ancestry(&self, i: usize) -> Vec<usize> {
        let mut chain = vec![i];
        let mut cur = i;
        while let Some(p) = self.parents[cur] {
            if chain.len() > self.len() {
                break;
            }
            chain.push(p);
            cur = p;
        }
        chain
    }

    pub fn translated(&self, offset: &Vector) -> Self {
        let mut t = self.clone();
        for c in &mut t.components {
            *c = c.translated(offset);
        }
        t
    }

    pub fn validate(&self) -> Vec<TreeViolation> {
        let mut out = Vec::new();
        let mut push = |component, kind, detail: String| out.push(TreeViolation { component, kind, detail });

        let roots: Vec<usize> = (0..self.len()).filter(|&i| self.parents[i].is_none()).collect();
        if roots.is_empty() {
            push(0, ViolationKind::NoRoot, "no component without a parent".into());
        }
        for &r in roots.iter().skip(1) {
            push(r, ViolationKind::MultipleRoots, format!("component {r} is a second root"));
        }
        let mut structural = roots.len() != 1;
        for (i, p) in self.parents.iter().enumerate() {
            if let Some(p) = p {
                if *p >= self.len() || *p == i {
                    push(i, ViolationKind::UnknownParent, format!("parent {p} does not exist"));
                    structural = true;
                }
            }
        }
        if !structural && self.order.len() != self.len() {
            for i in (0..self.len()).filter(|i| !self.order.contains(i)) {
                push(i, ViolationKind::Cycle, "component is not connected to the root".into());
            }
            structural = true;
        }
        for (i, c) in self.components.iter().enumerate() {
            if c.is_inverted() {
                push(i, ViolationKind::InvertedComponent, "tree components must be standard obstacles".into());
            }
        }
        if structural {
            return out;
        }

        for &i in &self.order {
            let c = &self.components[i];
            if c.raw_ratio(c.reference_point()) >= 1.0 {
                push(i, ViolationKind::ReferenceOutsideComponent, "reference point not inside its component".into());
            }
            let Some(p) = self.parents[i] else { continue };
            let parent = &self.components[p];
            if parent.raw_ratio(c.reference_point()) >= 1.0 {
                push(i, ViolationKind::ReferenceOutsideParent, format!("reference point outside parent {p}"));
            }
            if c.raw_ratio(parent.reference_point()) < 1.0 {
                push(i, ViolationKind::ParentReferenceInside, format!("reference point of parent {p} lies inside"));
            }
            if !c.boundary_samples(64).iter().any(|s| parent.raw_ratio(s) < 1.0) {
                push(i, ViolationKind::NoIntersection, format!("no overlap with parent {p}"));
            }
            if let Some(pp) = self.parents[p] {
                let a = parent.reference_point() - c.reference_point();
                let b = self.components[pp].reference_point() - parent.reference_point();
                let (na, nb) = (a.norm(), b.norm());
                if na > 0.0 && nb > 0.0 && a.dot(&b) / (na * nb) <= -1.0 + crate::TOL_ANTICOLLINEAR {
                    push(i, ViolationKind::ParentOpposing, format!("link to {p} opposes the link {p}->{pp}"));
                }
            }
        }
        out
    }
}

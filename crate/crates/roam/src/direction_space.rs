//! Direction space: the map `k(b, v)` from unit vectors to an `(N-1)`-ball of
//! radius π whose magnitude is the angle to the anchor `b`, its inverse, and
//! the plane-rotation primitive built on top of it.

use std::ops::Deref;

use crate::{Matrix, Result, RoamError, Vector, TOL_ANTICOLLINEAR};

/// Direction-space coordinates (length `N-1`).
pub type DirectionPoint = Vector;

/// A vector of unit length. Construction normalizes and rejects zero.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vector);

impl UnitVector {
    pub fn new(v: Vector) -> Result<Self> {
        let n = v.norm();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(RoamError::ZeroVector);
        }
        Ok(Self(v / n))
    }

    pub fn from_slice(s: &[f64]) -> Result<Self> {
        Self::new(Vector::from_column_slice(s))
    }

    /// Standard basis vector `e_i` (zero-based) in dimension `dim`.
    pub fn axis(dim: usize, i: usize) -> Self {
        let mut v = Vector::zeros(dim);
        v[i] = 1.0;
        Self(v)
    }

    /// Wraps a vector already known to be unit length.
    pub(crate) fn new_unchecked(v: Vector) -> Self {
        Self(v)
    }

    pub fn into_inner(self) -> Vector {
        self.0
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Self(-&self.0)
    }
}

impl Deref for UnitVector {
    type Target = Vector;
    fn deref(&self) -> &Vector {
        &self.0
    }
}

impl From<UnitVector> for Vector {
    fn from(u: UnitVector) -> Vector {
        u.0
    }
}

/// Orthonormal basis whose first column is the anchor direction.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis(Matrix);

impl OrthonormalBasis {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn column(&self, i: usize) -> Vector {
        self.0.column(i).into_owned()
    }
}

/// Completes `b` to a right-handed orthonormal basis.
///
/// The second column comes from the standard axis least aligned with `b`
/// (lowest index on ties); the remaining axes are orthogonalized in order.
pub fn complete_basis(b: &UnitVector) -> OrthonormalBasis {
    let n = b.len();
    let mut cols: Vec<Vector> = Vec::with_capacity(n);
    cols.push(b.0.clone());
    if n == 1 {
        return OrthonormalBasis(Matrix::from_columns(&cols));
    }

    let mut first = 0;
    for i in 1..n {
        if b[i].abs() < b[first].abs() {
            first = i;
        }
    }
    let order = std::iter::once(first).chain((0..n).filter(|&i| i != first));
    for i in order {
        if cols.len() == n {
            break;
        }
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        // Two passes keep the result orthogonal to ~1e-16 even for
        // nearly dependent candidates.
        for _ in 0..2 {
            for c in &cols {
                let d = c.dot(&v);
                v.axpy(-d, c, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-3 {
            cols.push(v / norm);
        }
    }
    debug_assert_eq!(cols.len(), n);

    let mut m = Matrix::from_columns(&cols);
    if m.determinant() < 0.0 {
        let mut last = m.column_mut(n - 1);
        last.neg_mut();
    }
    OrthonormalBasis(m)
}

/// Precomputed basis for repeated transforms around the same anchor.
#[derive(Debug, Clone)]
pub struct DirectionFrame {
    basis: OrthonormalBasis,
}

impl DirectionFrame {
    pub fn new(b: &UnitVector) -> Self {
        Self { basis: complete_basis(b) }
    }

    pub fn anchor(&self) -> Vector {
        self.basis.column(0)
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    /// `k(b, v)`; `v` need not be normalized but must be non-zero.
    pub fn to_dir(&self, v: &Vector) -> Result<DirectionPoint> {
        let norm = v.norm();
        if !(norm > 0.0) {
            return Err(RoamError::ZeroVector);
        }
        let local = self.basis.0.tr_mul(v) / norm;
        let dot = local[0];
        if dot <= -1.0 + TOL_ANTICOLLINEAR {
            return Err(RoamError::AntiCollinear { dot });
        }
        let tail = local.rows(1, local.len() - 1).into_owned();
        let tail_norm = tail.norm();
        if tail_norm == 0.0 {
            return Ok(DirectionPoint::zeros(local.len() - 1));
        }
        let angle = tail_norm.atan2(dot);
        Ok(tail * (angle / tail_norm))
    }

    /// `k̄(b, κ)`. Magnitudes ≥ π are evaluated directly (not bijective there).
    pub fn from_dir(&self, kappa: &DirectionPoint) -> UnitVector {
        let n = kappa.len() + 1;
        let angle = kappa.norm();
        if angle == 0.0 {
            return UnitVector(self.basis.column(0));
        }
        let mut local = Vector::zeros(n);
        {
            local[0] = angle.cos();
            let s = angle.sin() / angle;
            for i in 0..kappa.len() {
                local[i + 1] = kappa[i] * s;
            }
        }
        let v = &self.basis.0 * local;
        let norm = v.norm();
        UnitVector(v / norm)
    }
}

pub fn to_direction_space(b: &UnitVector, v: &Vector) -> Result<DirectionPoint> {
    DirectionFrame::new(b).to_dir(v)
}

pub fn from_direction_space(b: &UnitVector, kappa: &DirectionPoint) -> UnitVector {
    DirectionFrame::new(b).from_dir(kappa)
}

/// Whether `κ` lies in the region where the inverse map is bijective.
pub fn is_bijective(kappa: &DirectionPoint) -> bool {
    kappa.norm() < std::f64::consts::PI
}

/// Rotation in the plane spanned by `b_i` and `b_o` by angle `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorRotation {
    pub b_i: UnitVector,
    pub b_o: UnitVector,
    pub beta: f64,
}

impl VectorRotation {
    pub fn identity(b_i: &UnitVector) -> Self {
        let b_o = UnitVector(complete_basis(b_i).column(1));
        Self { b_i: b_i.clone(), b_o, beta: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.b_i.len()
    }

    /// Image of `b_i` under the full rotation.
    pub fn output(&self) -> UnitVector {
        UnitVector(apply_rotation(self, &self.b_i, self.beta))
    }

    pub fn rotate(&self, v: &Vector) -> Vector {
        apply_rotation(self, v, self.beta)
    }

    pub fn rotate_by(&self, v: &Vector, angle: f64) -> Vector {
        apply_rotation(self, v, angle)
    }
}

/// Rotation taking the direction of `v_i` onto the direction of `v_o`.
pub fn rotation_from_pair(v_i: &Vector, v_o: &Vector) -> Result<VectorRotation> {
    let b_i = UnitVector::new(v_i.clone())?;
    let u_o = UnitVector::new(v_o.clone())?;
    let dot = b_i.dot(&u_o);
    if dot <= -1.0 + TOL_ANTICOLLINEAR {
        return Err(RoamError::AntiCollinear { dot });
    }
    let mut residual = &u_o.0 - &b_i.0 * dot;
    // Re-orthogonalize to wash out the cancellation error of the first pass.
    let again = b_i.dot(&residual);
    residual.axpy(-again, &b_i.0, 1.0);
    let r = residual.norm();
    if r <= 1e-15 {
        return Ok(VectorRotation::identity(&b_i));
    }
    let beta = r.atan2(dot);
    Ok(VectorRotation { b_i, b_o: UnitVector(residual / r), beta })
}

/// Rotates `v` by `angle` within the plane of `rot`; the orthogonal
/// complement of that plane is left untouched.
pub fn apply_rotation(rot: &VectorRotation, v: &Vector, angle: f64) -> Vector {
    let p_i = rot.b_i.dot(v);
    let p_o = rot.b_o.dot(v);
    let (s, c) = angle.sin_cos();
    let mut out = v.clone();
    out.axpy(p_i * (c - 1.0) - p_o * s, &rot.b_i.0, 1.0);
    out.axpy(p_i * s + p_o * (c - 1.0), &rot.b_o.0, 1.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn v(s: &[f64]) -> Vector {
        Vector::from_column_slice(s)
    }

    #[test]
    fn basis_identity_for_e1() {
        for n in 2..6 {
            let b = complete_basis(&UnitVector::axis(n, 0));
            assert_eq!(b.matrix(), &Matrix::identity(n, n));
        }
    }

    #[test]
    fn basis_2d_is_right_handed() {
        let b = complete_basis(&UnitVector::axis(2, 1));
        assert_eq!(b.column(0), v(&[0.0, 1.0]));
        assert_eq!(b.column(1), v(&[-1.0, 0.0]));
        let m = b.matrix();
        assert!((m.determinant() - 1.0).abs() < 1e-12);
        assert!((m.tr_mul(m) - Matrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn e1_to_e3() {
        let k = to_direction_space(&UnitVector::axis(3, 0), &v(&[0.0, 0.0, 1.0])).unwrap();
        assert!((k - v(&[0.0, FRAC_PI_2])).norm() < 1e-15);
        let back = from_direction_space(&UnitVector::axis(3, 0), &v(&[0.0, FRAC_PI_2]));
        assert!((back.as_vector() - v(&[0.0, 0.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn anchor_maps_to_origin() {
        let b = UnitVector::from_slice(&[0.3, -0.4, 0.5]).unwrap();
        let k = to_direction_space(&b, &b).unwrap();
        assert!(k.norm() < 1e-15);
        assert_eq!(from_direction_space(&b, &Vector::zeros(2)).as_vector(), &complete_basis(&b).column(0));
    }

    #[test]
    fn anti_collinear_rejected() {
        let b = UnitVector::axis(2, 0);
        assert!(matches!(to_direction_space(&b, &v(&[-1.0, 0.0])), Err(RoamError::AntiCollinear { .. })));
        assert!(rotation_from_pair(&v(&[1.0, 0.0]), &v(&[-1.0, 1e-9])).is_err());
    }

    #[test]
    fn pair_rotation_examples() {
        let r = rotation_from_pair(&v(&[1.0, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(r.b_o.as_vector(), &v(&[0.0, 1.0, 0.0]));
        assert!((r.beta - FRAC_PI_2).abs() < 1e-15);

        let r = rotation_from_pair(&v(&[1.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        assert!((r.b_o.as_vector() - v(&[0.0, 1.0])).norm() < 1e-15);
        assert!((r.beta - FRAC_PI_4).abs() < 1e-15);

        let r = rotation_from_pair(&v(&[0.0, 2.0]), &v(&[0.0, 1.0])).unwrap();
        assert_eq!(r.beta, 0.0);
        assert!(r.b_o.dot(&r.b_i).abs() < 1e-15);
    }

    #[test]
    fn apply_examples() {
        let rot = VectorRotation { b_i: UnitVector::axis(3, 0), b_o: UnitVector::axis(3, 1), beta: FRAC_PI_2 };
        let e1 = v(&[1.0, 0.0, 0.0]);
        assert!((apply_rotation(&rot, &e1, FRAC_PI_2) - v(&[0.0, 1.0, 0.0])).norm() < 1e-15);
        let h = 0.5f64.sqrt();
        assert!((apply_rotation(&rot, &e1, FRAC_PI_4) - v(&[h, h, 0.0])).norm() < 1e-15);
        let e3 = v(&[0.0, 0.0, 1.0]);
        assert_eq!(apply_rotation(&rot, &e3, 1.234), e3);
        // Over-rotation continues around the circle.
        assert!((apply_rotation(&rot, &e1, 3.0 * FRAC_PI_2) - v(&[0.0, -1.0, 0.0])).norm() < 1e-15);
    }
}

//! Weighted combinations of plane rotations: averages around a shared input
//! direction, weighted sequences, and the level-by-level reduction of a
//! direction tree.

use crate::direction_space::{apply_rotation, rotation_from_pair, UnitVector, VectorRotation};
use crate::{Result, RoamError, Vector};

/// Deepest rotation tree accepted by [`reduce_tree`].
pub const MAX_LEVELS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedRotation {
    pub rotation: VectorRotation,
    pub weight: f64,
}

/// Weighted average of rotations that all start at `b_i`.
///
/// The `b_i` of each term is assumed to equal the shared one; only `b_o`,
/// `beta` and the weight are read.
pub fn weighted_sum_shared_base(b_i: &UnitVector, terms: &[WeightedRotation]) -> VectorRotation {
    let mut sum = Vector::zeros(b_i.len());
    for t in terms {
        sum.axpy(t.weight * t.rotation.beta, &t.rotation.b_o, 1.0);
    }
    let drift = b_i.dot(&sum);
    sum.axpy(-drift, b_i, 1.0);
    let beta = sum.norm();
    if !(beta > 1e-300) {
        return VectorRotation::identity(b_i);
    }
    VectorRotation { b_i: b_i.clone(), b_o: UnitVector::new_unchecked(sum / beta), beta }
}

/// `v0 +̂ Σ w_v v_v`: rotates `v0` by the weighted average of the rotations
/// from `v0` to each `v_v`. Zero-weight terms are ignored entirely.
pub fn rotational_sum(v0: &Vector, terms: &[(f64, Vector)]) -> Result<UnitVector> {
    let b_i = UnitVector::new(v0.clone())?;
    let mut rots = Vec::with_capacity(terms.len());
    for (w, v) in terms {
        if *w == 0.0 {
            continue;
        }
        rots.push(WeightedRotation { rotation: rotation_from_pair(&b_i, v)?, weight: *w });
    }
    if rots.is_empty() {
        return Ok(b_i);
    }
    let avg = weighted_sum_shared_base(&b_i, &rots);
    UnitVector::new(avg.rotate(&b_i))
}

/// Weighted rotation sequence.
///
/// `chain[n+1]` must start where `chain[n]` ends. Each element's rotation is
/// only applied by its weight; the downstream bases are rotated back by the
/// unused part `(w_n - 1) β_n` so they stay attached. With cumulative weights
/// (non-increasing along the chain) this is the weighted walk along the chain.
pub fn weighted_sequence(chain: &[VectorRotation], weights: &[f64]) -> Result<VectorRotation> {
    if chain.is_empty() {
        return Err(RoamError::InvalidTree("empty rotation chain".into()));
    }
    if weights.len() != chain.len() {
        return Err(RoamError::DimensionMismatch { expected: chain.len(), got: weights.len() });
    }
    for (n, pair) in chain.windows(2).enumerate() {
        if (pair[0].output().as_vector() - pair[1].b_i.as_vector()).norm() > 1e-6 {
            return Err(RoamError::IncompatibleChain { index: n + 1 });
        }
    }

    let mut adapted: Vec<VectorRotation> = chain.to_vec();
    for n in 0..chain.len() - 1 {
        let angle = (weights[n] - 1.0) * chain[n].beta;
        if angle == 0.0 {
            continue;
        }
        let (head, tail) = adapted.split_at_mut(n + 1);
        let rot = &head[n];
        for down in tail.iter_mut() {
            down.b_i = UnitVector::new_unchecked(apply_rotation(rot, &down.b_i, angle));
            down.b_o = UnitVector::new_unchecked(apply_rotation(rot, &down.b_o, angle));
        }
    }
    let last = adapted.last().unwrap();
    let end = apply_rotation(last, &last.b_i, weights[chain.len() - 1] * last.beta);
    rotation_from_pair(&chain[0].b_i, &end)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationNode {
    pub parent: Option<usize>,
    pub direction: UnitVector,
}

/// Directions arranged in a tree. Node ids are insertion indices; the root
/// is node 0 and parents always precede their children.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationTree {
    nodes: Vec<RotationNode>,
}

impl RotationTree {
    pub fn new(root: UnitVector) -> Self {
        Self { nodes: vec![RotationNode { parent: None, direction: root }] }
    }

    pub const ROOT: usize = 0;

    pub fn add(&mut self, parent: usize, direction: UnitVector) -> Result<usize> {
        if parent >= self.nodes.len() {
            return Err(RoamError::InvalidTree(format!("unknown parent {parent}")));
        }
        self.nodes.push(RotationNode { parent: Some(parent), direction });
        Ok(self.nodes.len() - 1)
    }

    pub fn nodes(&self) -> &[RotationNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn levels(&self) -> Vec<usize> {
        let mut lv = vec![0; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate().skip(1) {
            lv[i] = lv[n.parent.expect("non-root node without parent")] + 1;
        }
        lv
    }
}

/// Averages the directions of a weighted tree.
///
/// First the weights are accumulated towards the root. Then, level by level,
/// the running average is rotated toward that level's (already transported)
/// directions by their cumulative weights, and every deeper node is carried
/// along by the rotation that moved its level-`l` ancestor onto the average.
pub fn reduce_tree(tree: &RotationTree, weights: &[f64]) -> Result<UnitVector> {
    let n = tree.len();
    if weights.len() != n {
        return Err(RoamError::DimensionMismatch { expected: n, got: weights.len() });
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || weights.iter().any(|w| !(-1e-12..=1.0 + 1e-12).contains(w)) {
        return Err(RoamError::WeightSumInvalid { sum });
    }
    let levels = tree.levels();
    let depth = levels.iter().copied().max().unwrap_or(0);
    if depth > MAX_LEVELS {
        return Err(RoamError::LevelOverflow { max: MAX_LEVELS });
    }

    let mut cumulative = weights.to_vec();
    for i in (1..n).rev() {
        let p = tree.nodes[i].parent.unwrap();
        cumulative[p] += cumulative[i];
    }

    let mut dirs: Vec<Vector> = tree.nodes.iter().map(|nd| nd.direction.as_vector().clone()).collect();
    let mut current = dirs[0].clone();
    let mut ancestor = vec![usize::MAX; n];
    for level in 1..=depth {
        let terms: Vec<(f64, Vector)> = (0..n)
            .filter(|&i| levels[i] == level && cumulative[i] > 0.0)
            .map(|i| (cumulative[i], dirs[i].clone()))
            .collect();
        if terms.is_empty() {
            continue;
        }
        let next = rotational_sum(&current, &terms)?.into_inner();

        if level < depth {
            let mut transport: Vec<Option<VectorRotation>> = vec![None; n];
            for i in 0..n {
                if levels[i] == level && cumulative[i] > 0.0 {
                    transport[i] = Some(rotation_from_pair(&dirs[i], &next)?);
                }
            }
            for i in 0..n {
                ancestor[i] = match levels[i].cmp(&level) {
                    std::cmp::Ordering::Less => usize::MAX,
                    std::cmp::Ordering::Equal => i,
                    std::cmp::Ordering::Greater => ancestor[tree.nodes[i].parent.unwrap()],
                };
                if levels[i] > level && cumulative[i] > 0.0 {
                    if let Some(rot) = &transport[ancestor[i]] {
                        dirs[i] = rot.rotate(&dirs[i]);
                    }
                }
            }
        }
        current = next;
    }
    UnitVector::new(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn v(s: &[f64]) -> Vector {
        Vector::from_column_slice(s)
    }

    fn u(s: &[f64]) -> UnitVector {
        UnitVector::from_slice(s).unwrap()
    }

    #[test]
    fn shared_base_cancellation() {
        let e1 = u(&[1.0, 0.0]);
        let up = VectorRotation { b_i: e1.clone(), b_o: u(&[0.0, 1.0]), beta: FRAC_PI_3 };
        let down = VectorRotation { b_i: e1.clone(), b_o: u(&[0.0, -1.0]), beta: FRAC_PI_3 };
        let r = weighted_sum_shared_base(
            &e1,
            &[WeightedRotation { rotation: up.clone(), weight: 0.5 }, WeightedRotation { rotation: down, weight: 0.5 }],
        );
        assert_eq!(r.beta, 0.0);
        let same = weighted_sum_shared_base(&e1, &[WeightedRotation { rotation: up.clone(), weight: 1.0 }]);
        assert!((same.beta - up.beta).abs() < 1e-15);
        assert!((same.b_o.as_vector() - up.b_o.as_vector()).norm() < 1e-15);
        let none = weighted_sum_shared_base(&e1, &[WeightedRotation { rotation: up, weight: 0.0 }]);
        assert_eq!(none.beta, 0.0);
    }

    #[test]
    fn rotational_sum_examples() {
        let v0 = v(&[1.0, 0.0, 0.0]);
        assert_eq!(rotational_sum(&v0, &[]).unwrap().as_vector(), &v0);
        let v1 = v(&[0.0, 0.6, 0.8]);
        let r = rotational_sum(&v0, &[(1.0, v1.clone())]).unwrap();
        assert!((r.as_vector() - &v1).norm() < 1e-12);
        let a = v(&[1.0, 1.0, 0.0]);
        let b = v(&[1.0, -1.0, 0.0]);
        let r = rotational_sum(&v0, &[(0.5, a), (0.5, b)]).unwrap();
        assert!((r.as_vector() - &v0).norm() < 1e-12);
    }

    #[test]
    fn sequence_weight_limits() {
        let e = |i| UnitVector::axis(3, i);
        let r1 = rotation_from_pair(&e(0), &e(1)).unwrap();
        let r2 = rotation_from_pair(&e(1), &e(2)).unwrap();
        let chain = [r1.clone(), r2];

        let full = weighted_sequence(&chain, &[1.0, 1.0]).unwrap();
        assert!((full.output().as_vector() - e(2).as_vector()).norm() < 1e-12);

        let zero = weighted_sequence(&chain, &[0.0, 0.0]).unwrap();
        assert!(zero.beta.abs() < 1e-12);
        assert!((zero.output().as_vector() - e(0).as_vector()).norm() < 1e-12);

        let single = weighted_sequence(&[r1.clone()], &[1.0]).unwrap();
        assert!((single.beta - r1.beta).abs() < 1e-15);

        // Half way along the first leg only.
        let half = weighted_sequence(&chain, &[0.5, 0.0]).unwrap();
        assert!((half.beta - FRAC_PI_4).abs() < 1e-12);
        assert!((half.b_o.as_vector() - e(1).as_vector()).norm() < 1e-12);
    }

    #[test]
    fn sequence_rejects_broken_chain() {
        let e = |i| UnitVector::axis(3, i);
        let r1 = rotation_from_pair(&e(0), &e(1)).unwrap();
        let r2 = rotation_from_pair(&e(0), &e(2)).unwrap();
        assert_eq!(weighted_sequence(&[r1, r2], &[1.0, 1.0]), Err(RoamError::IncompatibleChain { index: 1 }));
    }

    #[test]
    fn tree_limits() {
        let root = u(&[1.0, 0.0]);
        let t = RotationTree::new(root.clone());
        assert_eq!(reduce_tree(&t, &[1.0]).unwrap(), root);

        let mut t = RotationTree::new(root);
        let c = u(&[0.0, 1.0]);
        t.add(0, c.clone()).unwrap();
        let r = reduce_tree(&t, &[0.0, 1.0]).unwrap();
        assert!((r.as_vector() - c.as_vector()).norm() < 1e-12);
        let r = reduce_tree(&t, &[0.5, 0.5]).unwrap();
        assert!((r.dot(&v(&[1.0, 0.0])) - FRAC_PI_4.cos()).abs() < 1e-12);
    }

    #[test]
    fn tree_rejects_bad_weights() {
        let mut t = RotationTree::new(u(&[1.0, 0.0]));
        t.add(0, u(&[0.0, 1.0])).unwrap();
        assert!(matches!(reduce_tree(&t, &[0.5, 0.6]), Err(RoamError::WeightSumInvalid { .. })));
        assert!(matches!(reduce_tree(&t, &[1.2, -0.2]), Err(RoamError::WeightSumInvalid { .. })));
    }

    #[test]
    fn tree_depth_capped() {
        let mut t = RotationTree::new(u(&[1.0, 0.0]));
        let mut last = 0;
        for _ in 0..MAX_LEVELS + 1 {
            last = t.add(last, u(&[1.0, 0.01])).unwrap();
        }
        let mut w = vec![0.0; t.len()];
        w[0] = 1.0;
        assert_eq!(reduce_tree(&t, &w), Err(RoamError::LevelOverflow { max: MAX_LEVELS }));
    }
}

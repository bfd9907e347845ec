//! Trees of stars: concave obstacles made of overlapping star-shaped
//! components, each with a single parent.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::avoidance::{avoid_single, contribution, radius_crossing, tangent, AvoidanceParams, Tangent, WeightMode};
use crate::convergence::{convergence_weight, convergence_with, reference_velocity, total_map, unfolding_attractor};
use crate::direction_space::{rotation_from_pair, DirectionFrame, UnitVector};
use crate::dynamics::VectorField;
use crate::multi::obstacle_weights;
use crate::obstacle::{Obstacle, ObstacleTree};
use crate::rotation::{reduce_tree, rotational_sum, RotationTree};
use crate::{Result, RoamError, Vector};

/// Influence radius of leaf components, in component diameters.
pub const LEAF_INFLUENCE: f64 = 4.0;

/// Surface points from a component up to the root.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceChain {
    /// `(component, surface point)`, starting at the queried component.
    pub links: Vec<(usize, Vector)>,
    /// Ray factor `b` per link: `s_p = b(ξ^r_c − s_c) + s_c`.
    pub factors: Vec<f64>,
}

/// Propagates the surface point of component `o` (in the direction of `x`)
/// to every ancestor. The parent point lies on the line through the child's
/// reference point and surface point, where the ray from the reference
/// point leaves the parent. This stays continuous when a surface point
/// crosses into its parent.
pub fn propagate_surface_points(tree: &ObstacleTree, x: &Vector, o: usize) -> Result<SurfaceChain> {
    let first = tree.component(o).boundary_point(x)?;
    let mut links = vec![(o, first)];
    let mut factors = Vec::new();
    let mut child = o;
    while let Some(p) = tree.parent(child) {
        let origin = tree.component(child).reference_point();
        let s_c = &links.last().unwrap().1;
        let span = s_c - origin;
        let len = span.norm();
        if !(len > 1e-12) {
            return Err(RoamError::DegenerateRay);
        }
        let dir = UnitVector::new(span)?;
        let t = tree.component(p).ray_exit(origin, &dir).ok_or(RoamError::DegenerateRay)?;
        links.push((p, origin + dir.as_vector() * t));
        factors.push(1.0 - t / len);
        child = p;
    }
    Ok(SurfaceChain { links, factors })
}

/// Rotates `f_root` down the chain, link by link, by the rotation that maps
/// the parent's reference-to-surface vector onto the child's.
pub fn propagate_velocity(tree: &ObstacleTree, chain: &SurfaceChain, f_root: &Vector) -> Result<Vector> {
    Ok(velocity_chain(tree, chain, f_root)?.pop().expect("chain starts at the root"))
}

/// `[f_root, …, f_o]`: the velocity after each link.
fn velocity_chain(tree: &ObstacleTree, chain: &SurfaceChain, f_root: &Vector) -> Result<Vec<Vector>> {
    let mut out = vec![f_root.clone()];
    for pair in chain.links.windows(2).rev() {
        let (c, s_c) = &pair[0];
        let (p, s_p) = &pair[1];
        let from = s_p - tree.component(*p).reference_point();
        let to = s_c - tree.component(*c).reference_point();
        let next = rotation_from_pair(&from, &to)?.rotate(out.last().unwrap());
        out.push(next);
    }
    Ok(out)
}

/// Occlusion of component `o` by its parent: 1 while its surface point is
/// outside the parent, fading to 0 as `x` moves behind the parent.
pub fn hiding_weight(tree: &ObstacleTree, o: usize, x: &Vector) -> f64 {
    let Some(p) = tree.parent(o) else { return 1.0 };
    let comp = tree.component(o);
    let parent = tree.component(p);
    let Ok(s) = comp.boundary_point(x) else { return 0.0 };
    let gamma_p = parent.global_gamma(&s).unwrap_or(0.0);
    if gamma_p > 1.0 {
        return 1.0;
    }
    let a = x - comp.reference_point();
    let b = parent.reference_point() - comp.reference_point();
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    hiding_from(gamma_p, a.dot(&b) / (na * nb))
}

/// `Γ_p(s_o)^(1/(1−b))` for `b < 1`, zero otherwise.
pub fn hiding_from(gamma_parent: f64, b: f64) -> f64 {
    if gamma_parent > 1.0 {
        1.0
    } else if b >= 1.0 {
        0.0
    } else {
        gamma_parent.max(0.0).powf(1.0 / (1.0 - b))
    }
}

pub(crate) fn tree_tangent_full(n: &UnitVector, r_in: &UnitVector, c: &UnitVector, re: f64) -> Tangent {
    let inward = DirectionFrame::new(&n.neg());
    if let Ok(p) = inward.to_dir(c) {
        if p.norm() < re {
            return tangent(n, r_in, c, re);
        }
    }
    // Mirror branch: anchored on the outward reference, pushed onto the
    // sphere of radius π − R^e around the normal.
    let outward = DirectionFrame::new(n);
    let r_out = r_in.neg();
    let a = outward.to_dir(&r_out).expect("outward reference aligns with the normal");
    let radius = PI - re;
    let r_r = (radius - a.norm()).min(FRAC_PI_2).max(1e-12);
    let p = outward.to_dir(c).expect("c is not opposite the normal on this branch");
    let d = &p - &a;
    let delta_k = d.norm();
    if delta_k < 1e-9 {
        return Tangent { e: c.clone(), delta_k, r_r };
    }
    let point = match radius_crossing(&a, &d, radius) {
        Some(b) => a + d * b,
        None => &d * (radius / delta_k),
    };
    Tangent { e: outward.from_dir(&point), delta_k, r_r }
}

/// Tangent for tree components: parallel to the surface on both sides, so
/// the back of the component becomes a second saddle instead of a pull
/// toward the component.
pub fn tree_tangent(n: &UnitVector, r_in: &UnitVector, f: &UnitVector, re: f64) -> Result<UnitVector> {
    let t = tree_tangent_full(n, r_in, f, re);
    if t.delta_k < 1e-9 {
        return Err(RoamError::DegenerateSaddle);
    }
    Ok(t.e)
}

/// Default influence distance of a leaf: `LEAF_INFLUENCE` diameters, capped
/// at the root's `d0` so the leaf's Γ never grows slower than the root's.
pub fn leaf_influence(tree: &ObstacleTree, i: usize) -> f64 {
    let comp = tree.component(i);
    (LEAF_INFLUENCE * comp.diameter()).min(tree.component(tree.root()).d0())
}

/// Γ of a component as used for weighting: leaves get a finite influence
/// region unless one is configured.
pub fn component_gamma(tree: &ObstacleTree, i: usize, x: &Vector) -> Result<f64> {
    let comp = tree.component(i);
    let g = if i != tree.root() && tree.is_leaf(i) && comp.distance_max().is_none() {
        let limited = comp.clone().with_influence(Some(leaf_influence(tree, i)))?;
        limited.gamma(x)
    } else {
        comp.gamma(x)
    };
    match g {
        Err(RoamError::AtReferencePoint) => Ok(f64::INFINITY),
        other => other,
    }
}

/// `w/(1−w)` (or the literal `1/(1−w)`), normalized when the sum exceeds one.
pub fn normalized_weights(raw: &[f64], mode: WeightMode) -> Vec<f64> {
    let full: Vec<usize> = (0..raw.len()).filter(|&i| raw[i] >= 1.0).collect();
    if !full.is_empty() {
        let share = 1.0 / full.len() as f64;
        return (0..raw.len()).map(|i| if raw[i] >= 1.0 { share } else { 0.0 }).collect();
    }
    let w: Vec<f64> = raw
        .iter()
        .map(|&w| match mode {
            WeightMode::Reconciled => w / (1.0 - w),
            WeightMode::Literal => 1.0 / (1.0 - w),
        })
        .collect();
    let sum: f64 = w.iter().sum();
    if sum > 1.0 {
        w.iter().map(|v| v / sum).collect()
    } else {
        w
    }
}

/// Convergence direction around a tree of components.
pub fn tree_convergence<F: VectorField + ?Sized>(
    tree: &ObstacleTree,
    field: &F,
    x: &Vector,
    params: &AvoidanceParams,
) -> Result<UnitVector> {
    let f = field.eval(x);
    tree_convergence_with(tree, field, x, &f, params)
}

fn tree_convergence_with<F: VectorField + ?Sized>(
    tree: &ObstacleTree,
    field: &F,
    x: &Vector,
    f: &Vector,
    params: &AvoidanceParams,
) -> Result<UnitVector> {
    if tree.len() == 1 {
        return convergence_with(field, tree.component(0), x, f);
    }
    let target = reference_velocity(field, tree.component(tree.root()));
    let Ok(f_hat) = UnitVector::new(f.clone()) else {
        return UnitVector::new(target);
    };
    if target.norm() == 0.0 {
        return Ok(f_hat);
    }

    let order = tree.order();
    let mut raw = vec![0.0; tree.len()];
    let mut targets = vec![target.clone(); tree.len()];
    for &i in order {
        let gamma = component_gamma(tree, i, x)?;
        let hidden = hiding_weight(tree, i, x);
        if gamma.is_infinite() || hidden == 0.0 {
            continue;
        }
        let comp = tree.component(i);
        match unfolding_attractor(field, comp) {
            Some(a) if gamma > 1.0 => {
                let Ok(mapped) = total_map(comp, &a, x) else { continue };
                let Ok(back) = rotation_from_pair(&(&mapped.point - &a), &(x - &a)) else { continue };
                raw[i] = hidden * mapped.weight.min(convergence_weight(gamma).sqrt());
                targets[i] = back.rotate(&target);
            }
            _ => raw[i] = hidden * convergence_weight(gamma),
        }
    }
    let weights = normalized_weights(&raw, params.weight_mode);
    let (rt, node_weights) = assemble(tree, f_hat.clone(), &targets, &weights)?;
    reduce_or_star(&rt, &node_weights, &f_hat)
}

/// Rotation tree with the nominal direction at the root and one node per
/// component, mirroring the component tree.
fn assemble(
    tree: &ObstacleTree,
    root: UnitVector,
    directions: &[Vector],
    weights: &[f64],
) -> Result<(RotationTree, Vec<f64>)> {
    let mut rt = RotationTree::new(root);
    let mut node_of = vec![usize::MAX; tree.len()];
    let mut node_weights = vec![0.0];
    for &i in tree.order() {
        let parent = tree.parent(i).map_or(RotationTree::ROOT, |p| node_of[p]);
        node_of[i] = rt.add(parent, UnitVector::new(directions[i].clone())?)?;
        node_weights.push(weights[i]);
    }
    let used: f64 = node_weights.iter().sum();
    node_weights[0] = (1.0 - used).max(0.0);
    let total: f64 = node_weights.iter().sum();
    node_weights.iter_mut().for_each(|w| *w /= total);
    Ok((rt, node_weights))
}

fn reduce_or_star(rt: &RotationTree, weights: &[f64], anchor: &UnitVector) -> Result<UnitVector> {
    if let Some(i) = weights.iter().position(|w| *w == 1.0) {
        return Ok(rt.nodes()[i].direction.clone());
    }
    match reduce_tree(rt, weights) {
        Ok(v) => Ok(v),
        Err(RoamError::AntiCollinear { .. }) => {
            let terms: Vec<(f64, Vector)> = rt
                .nodes()
                .iter()
                .zip(weights)
                .skip(1)
                .filter(|(_, w)| **w > 0.0)
                .map(|(n, w)| (*w, n.direction.as_vector().clone()))
                .collect();
            rotational_sum(anchor, &terms)
        }
        Err(e) => Err(e),
    }
}

/// Avoidance of a tree of stars.
///
/// Each component rotates its propagated convergence direction toward its
/// tree tangent. The rotation tree has the nominal direction at the root,
/// the convergence direction below it and one branch per component holding
/// the propagation chain, ending in that component's avoided direction.
pub fn avoid_tree<F: VectorField + ?Sized>(
    tree: &ObstacleTree,
    field: &F,
    x: &Vector,
    params: &AvoidanceParams,
) -> Result<Vector> {
    let f = field.eval(x);
    let speed = f.norm();
    if speed == 0.0 {
        return Ok(f);
    }
    if tree.len() == 1 {
        let comp = tree.component(0);
        if comp.gamma(x).map_or(true, |g| g.is_infinite()) {
            return Ok(f);
        }
        let c = convergence_with(field, comp, x, &f)?;
        return avoid_single(comp, &f, &c, x, params);
    }

    let n = tree.len();
    let gammas = (0..n).map(|i| component_gamma(tree, i, x)).collect::<Result<Vec<_>>>()?;
    let hiding: Vec<f64> = (0..n).map(|i| hiding_weight(tree, i, x)).collect();
    // Fully hidden components take no share of the normalization either.
    let visible: Vec<f64> = (0..n).map(|i| if hiding[i] > 0.0 { gammas[i] } else { f64::INFINITY }).collect();
    let base = obstacle_weights(&visible, params.weight_mode).weights;
    let mut weights: Vec<f64> = (0..n).map(|i| base[i] * hiding[i]).collect();
    if weights.iter().all(|w| *w == 0.0) {
        return Ok(f);
    }

    let f_hat = UnitVector::new(f.clone())?;
    let c = tree_convergence_with(tree, field, x, &f, params)?;
    let mut rt = RotationTree::new(f_hat.clone());
    let c_node = rt.add(RotationTree::ROOT, c.clone())?;
    let mut leaves = Vec::new();
    let mut h = 1.0;
    for &i in tree.order() {
        if weights[i] == 0.0 {
            continue;
        }
        let Some((path, d, h_i)) = component_branch(tree, i, x, &c, gammas[i], params) else {
            weights[i] = 0.0;
            continue;
        };
        let mut node = c_node;
        for v in path.into_iter().skip(1) {
            node = rt.add(node, UnitVector::new(v)?)?;
        }
        leaves.push((rt.add(node, d)?, i));
        h *= h_i.powf(weights[i]);
    }
    let used: f64 = weights.iter().sum();
    let mut node_weights = vec![0.0; rt.len()];
    node_weights[RotationTree::ROOT] = (1.0 - used).max(0.0);
    for (node, i) in leaves {
        node_weights[node] = weights[i];
    }
    let total: f64 = node_weights.iter().sum();
    node_weights.iter_mut().for_each(|w| *w /= total);
    let dir = reduce_or_star(&rt, &node_weights, &f_hat)?;
    Ok(dir.into_inner() * (speed * h))
}

/// Propagation path `[c, …, c_o]`, the avoided direction `d_o` and the speed
/// factor of component `o`. `None` when the chain degenerates.
fn component_branch(
    tree: &ObstacleTree,
    o: usize,
    x: &Vector,
    c: &UnitVector,
    gamma: f64,
    params: &AvoidanceParams,
) -> Option<(Vec<Vector>, UnitVector, f64)> {
    let path = if o == tree.root() {
        vec![c.as_vector().clone()]
    } else {
        let chain = propagate_surface_points(tree, x, o).ok()?;
        velocity_chain(tree, &chain, c).ok()?
    };
    let c_o = UnitVector::new(path.last()?.clone()).ok()?;
    let dirs = tree.component(o).directions(x).ok()?;
    let t = tree_tangent_full(&dirs.normal, &dirs.r_in, &c_o, params.tangent_radius);
    let frame = DirectionFrame::new(&c_o);
    let origin = Vector::zeros(x.len() - 1);
    let part = contribution(&frame, &origin, gamma, &t, params.smoothness).ok()?;
    Some((path, frame.from_dir(&part.kappa), part.info.h))
}

/// Γ of the union (minimum over components, global distance functions).
pub fn union_gamma(tree: &ObstacleTree, x: &Vector) -> f64 {
    tree.components().iter().map(|c: &Obstacle| c.global_gamma(x).unwrap_or(0.0)).fold(f64::INFINITY, f64::min)
}

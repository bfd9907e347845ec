mod common;

use std::f64::consts::FRAC_PI_2;

use common::{circle, ellipse, load, random_unit, rng, v};
use proptest::prelude::*;
use rand::Rng;
use roam::avoidance::{avoid_single, AvoidanceParams, WeightMode};
use roam::convergence::convergence_dynamics;
use roam::direction_space::UnitVector;
use roam::dynamics::{DynamicsSpec, TimedDynamics, VectorField};
use roam::obstacle::{Obstacle, ObstacleTree, Shape};
use roam::tree::{
    avoid_tree, component_gamma, hiding_from, hiding_weight, leaf_influence, normalized_weights,
    propagate_surface_points, propagate_velocity, tree_convergence, tree_tangent, union_gamma, SurfaceChain,
};
use roam::Vector;

fn u(s: &[f64]) -> UnitVector {
    UnitVector::from_slice(s).unwrap()
}

fn triple() -> ObstacleTree {
    load("triple_ellipses.json").environment.trees[0].clone()
}

#[test]
fn surface_chain_lies_on_every_surface() {
    let tree = triple();
    let mut r = rng(81);
    for o in 0..tree.len() {
        for _ in 0..200 {
            let x = tree.component(o).reference_point() + random_unit(&mut r, 2).into_inner() * r.gen_range(0.3..4.0);
            let chain = propagate_surface_points(&tree, &x, o).unwrap();
            assert_eq!(chain.links.len(), tree.ancestry(o).len());
            assert_eq!(chain.factors.len(), chain.links.len() - 1);
            for (c, s) in &chain.links {
                assert!((tree.component(*c).gamma(s).unwrap() - 1.0).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn surface_point_through_the_child_reference() {
    // Child inside the parent: the ray from the child's reference through its
    // surface point leaves the parent beyond it.
    let tree = ObstacleTree::new(vec![circle([0.0, 0.0], 2.0), circle([0.0, 0.0], 0.5)], vec![None, Some(0)]);
    let chain = propagate_surface_points(&tree, &v(&[1.0, 0.0]), 1).unwrap();
    assert!((&chain.links[1].1 - v(&[2.0, 0.0])).norm() < 1e-12);
    assert!((chain.factors[0] + 3.0).abs() < 1e-12);
    // On the far side of an offset child the factor stays positive.
    let tree = ObstacleTree::new(
        vec![circle([0.0, 0.0], 1.0), circle([1.0, 0.0], 0.6).with_reference(v(&[0.8, 0.0])).unwrap()],
        vec![None, Some(0)],
    );
    let chain = propagate_surface_points(&tree, &v(&[-3.0, 0.0]), 1).unwrap();
    assert!((&chain.links[0].1 - v(&[0.4, 0.0])).norm() < 1e-12);
    assert!((&chain.links[1].1 - v(&[-1.0, 0.0])).norm() < 1e-12);
}

#[test]
fn velocity_propagation_examples() {
    let tree = ObstacleTree::new(vec![circle([0.0, 0.0], 1.0), circle([1.0, 0.0], 0.5)], vec![None, Some(0)]);
    // Parallel reference-to-surface vectors leave the velocity unchanged.
    let chain = SurfaceChain { links: vec![(1, v(&[1.5, 0.0])), (0, v(&[1.0, 0.0]))], factors: vec![1.0] };
    let f = v(&[0.2, 0.9]);
    assert!((propagate_velocity(&tree, &chain, &f).unwrap() - &f).norm() < 1e-15);
    // A quarter turn between them turns the velocity by a quarter.
    let chain = SurfaceChain { links: vec![(1, v(&[1.0, 0.5])), (0, v(&[1.0, 0.0]))], factors: vec![1.0] };
    let out = propagate_velocity(&tree, &chain, &v(&[1.0, 0.0])).unwrap();
    assert!((out - v(&[0.0, 1.0])).norm() < 1e-12);
}

#[test]
fn hiding_examples() {
    assert_eq!(hiding_from(1.2, 0.3), 1.0);
    assert!((hiding_from(0.5, 0.5) - 0.25).abs() < 1e-15);
    assert_eq!(hiding_from(0.9, 1.0), 0.0);
    assert!((hiding_from(0.5, 0.0) - 0.5).abs() < 1e-15);
    let tree = ObstacleTree::new(vec![circle([0.0, 0.0], 1.0), circle([1.0, 0.0], 0.5)], vec![None, Some(0)]);
    // In front of the child: fully visible. Behind the parent: hidden.
    assert_eq!(hiding_weight(&tree, 1, &v(&[3.0, 0.0])), 1.0);
    assert_eq!(hiding_weight(&tree, 1, &v(&[-3.0, 0.0])), 0.0);
    assert_eq!(hiding_weight(&tree, 0, &v(&[-3.0, 0.0])), 1.0);
}

#[test]
fn tree_tangent_branches() {
    let n = u(&[0.0, 1.0]);
    let r = u(&[0.0, -1.0]);
    let into = tree_tangent(&n, &r, &u(&[0.4, -1.0]), FRAC_PI_2).unwrap();
    assert!(into.dot(&n).abs() < 1e-9 && into[0] > 0.0);
    let away = tree_tangent(&n, &r, &u(&[-0.4, 1.0]), FRAC_PI_2).unwrap();
    assert!(away.dot(&n).abs() < 1e-9 && away[0] < 0.0);
}

#[test]
fn normalization_examples() {
    assert_eq!(normalized_weights(&[0.5, 0.5], WeightMode::Reconciled), vec![0.5, 0.5]);
    assert_eq!(normalized_weights(&[0.2, 0.0], WeightMode::Reconciled), vec![0.25, 0.0]);
    assert_eq!(normalized_weights(&[1.0, 0.9, 1.0], WeightMode::Reconciled), vec![0.5, 0.0, 0.5]);
    let lit = normalized_weights(&[0.5, 0.5], WeightMode::Literal);
    assert_eq!(lit, vec![0.5, 0.5]);
}

#[test]
fn leaves_get_a_finite_influence() {
    let tree = triple();
    let bar = 2;
    assert!(tree.is_leaf(bar));
    let d = leaf_influence(&tree, bar);
    assert!(d > 0.0 && d <= tree.component(tree.root()).d0());
    let far = tree.component(bar).reference_point() + v(&[0.0, 50.0]);
    assert_eq!(component_gamma(&tree, bar, &far).unwrap(), f64::INFINITY);
    assert!(component_gamma(&tree, tree.root(), &far).unwrap().is_finite());
}

#[test]
fn single_component_tree_is_single_avoidance() {
    let o = ellipse([0.0, 0.0], [1.0, 0.4], 0.5);
    let tree = ObstacleTree::single(o.clone());
    let spec = DynamicsSpec::straight(v(&[4.0, 0.0]));
    let field = TimedDynamics::new(&spec, 0.0);
    let p = AvoidanceParams::default();
    let mut r = rng(82);
    for _ in 0..300 {
        let x = random_unit(&mut r, 2).into_inner() * r.gen_range(0.8..5.0);
        if o.gamma(&x).unwrap() <= 1.0 {
            continue;
        }
        let f = field.eval(&x);
        let c = convergence_dynamics(&field, &o, &x).unwrap();
        assert_eq!(avoid_tree(&tree, &field, &x, &p).unwrap(), avoid_single(&o, &f, &c, &x, &p).unwrap());
    }
}

#[test]
fn far_field_is_nominal() {
    let scenario = load("triple_ellipses.json");
    let tree = &scenario.environment.trees[0];
    let field = TimedDynamics::new(&scenario.dynamics, 0.0);
    let p = AvoidanceParams::default();
    for d in [v(&[-1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0]), v(&[-0.6, 0.8])] {
        let x = d * 1.0e4;
        let f = field.eval(&x);
        let xi = avoid_tree(tree, &field, &x, &p).unwrap();
        assert!((&xi - &f).norm() < 0.01 * f.norm(), "{x}");
    }
}

#[test]
fn union_surface_is_impenetrable() {
    let scenario = load("triple_ellipses.json");
    let tree = &scenario.environment.trees[0];
    let field = TimedDynamics::new(&scenario.dynamics, 0.0);
    let p = AvoidanceParams::default();
    for (i, comp) in tree.components().iter().enumerate() {
        for b in comp.boundary_samples(300) {
            let x = comp.reference_point() + (&b - comp.reference_point()) * (1.0 + 1e-9);
            if union_gamma(tree, &x) < 1.0 {
                continue;
            }
            let xi = avoid_tree(tree, &field, &x, &p).unwrap();
            let f = field.eval(&x).norm();
            if xi.norm() < 1e-2 * f {
                continue;
            }
            let n = comp.normal(&x).unwrap();
            assert!(n.dot(&xi) >= -1e-6 * f, "component {i} at {x}: {xi}");
        }
    }
}

#[test]
fn enclosed_child_is_down_weighted() {
    // A small child fully inside its parent only acts through the hiding weight.
    let parent = circle([0.0, 0.0], 1.5);
    let child = Obstacle::new(Shape::sphere(v(&[0.5, 0.0]), 0.3)).unwrap();
    let tree = ObstacleTree::new(vec![parent.clone(), child.clone()], vec![None, Some(0)]);
    let mut r = rng(83);
    for _ in 0..200 {
        let x = random_unit(&mut r, 2).into_inner() * r.gen_range(1.6..5.0);
        let w = hiding_weight(&tree, 1, &x);
        let s = child.boundary_point(&x).unwrap();
        // The exponent 1/(1 − b) is at least one half.
        assert!((0.0..=parent.gamma(&s).unwrap().sqrt() + 1e-12).contains(&w), "{x}: {w}");
    }
}

#[test]
fn fully_hidden_component_is_inert() {
    let parent = circle([0.0, 0.0], 1.5);
    let arm = circle([1.6, 0.4], 0.5);
    let hidden = Obstacle::new(Shape::sphere(v(&[-0.5, 0.0]), 0.3)).unwrap();
    let with = ObstacleTree::new(vec![parent.clone(), arm.clone(), hidden], vec![None, Some(0), Some(0)]);
    let without = ObstacleTree::new(vec![parent, arm], vec![None, Some(0)]);
    let spec = DynamicsSpec::straight(v(&[6.0, -2.0]));
    let field = TimedDynamics::new(&spec, 0.0);
    let p = AvoidanceParams::default();
    // On the far side of the parent's reference, seen from the hidden child.
    for k in [2.3, 3.0, 4.5, 8.0] {
        let x = v(&[k, 0.0]);
        assert_eq!(hiding_weight(&with, 2, &x), 0.0);
        let a = avoid_tree(&with, &field, &x, &p).unwrap();
        let b = avoid_tree(&without, &field, &x, &p).unwrap();
        assert!((&a - &b).norm() < 1e-9, "{x} {a} {b}");
        let ca = tree_convergence(&with, &field, &x, &p).unwrap();
        let cb = tree_convergence(&without, &field, &x, &p).unwrap();
        assert!((ca.as_vector() - cb.as_vector()).norm() < 1e-9);
    }
}

#[test]
fn trajectories_go_around_the_tree() {
    let scenario = load("triple_ellipses.json");
    let tree = &scenario.environment.trees[0];
    let field = TimedDynamics::new(&scenario.dynamics, 0.0);
    let p = AvoidanceParams::default();
    let attractor = scenario.dynamics.attractor(0.0).unwrap();
    let mut reached = 0;
    for y in [-2.0, -1.0, 0.6, 1.5, 2.4] {
        let mut x = v(&[-3.5, y]);
        for _ in 0..3000 {
            x += avoid_tree(tree, &field, &x, &p).unwrap() * 0.01;
            assert!(union_gamma(tree, &x) > 1.0, "collision at {x}");
        }
        if (&x - &attractor).norm() < 0.05 {
            reached += 1;
        }
    }
    // Starts on the body's axis may end in the saddle in front of it.
    assert!(reached >= 4, "{reached}");
}

proptest! {
    #[test]
    fn convergence_direction_is_unit(seed in 0u64..5000) {
        let tree = triple();
        let spec = DynamicsSpec::straight(v(&[5.0, 0.0]));
        let field = TimedDynamics::new(&spec, 0.0);
        let mut r = rng(seed);
        let x = v(&[r.gen_range(-4.0..4.0), r.gen_range(-3.0..3.0)]);
        prop_assume!(union_gamma(&tree, &x) > 1.0);
        let c = tree_convergence(&tree, &field, &x, &AvoidanceParams::default()).unwrap();
        prop_assert!((c.norm() - 1.0).abs() < 1e-12);
        let xi = avoid_tree(&tree, &field, &x, &AvoidanceParams::default()).unwrap();
        prop_assert!(xi.norm() <= field.eval(&x).norm() * (1.0 + 1e-9));
        let _: Vector = xi;
    }
}

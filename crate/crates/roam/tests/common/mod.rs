#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roam::direction_space::UnitVector;
use roam::obstacle::{Obstacle, Shape};
use roam::rotation::RotationTree;
use roam::sim::Scenario;
use roam::Vector;

pub fn v(s: &[f64]) -> Vector {
    Vector::from_column_slice(s)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on the sphere, by rejection from the cube.
pub fn random_unit(rng: &mut impl Rng, n: usize) -> UnitVector {
    loop {
        let x = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let norm = x.norm();
        if norm > 0.1 && norm <= 1.0 {
            return UnitVector::new(x).unwrap();
        }
    }
}

pub fn random_vector(rng: &mut impl Rng, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.gen_range(-scale..scale))
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load(name: &str) -> Scenario {
    Scenario::load(&fixture(name)).unwrap()
}

pub fn circle(center: [f64; 2], r: f64) -> Obstacle {
    Obstacle::new(Shape::sphere(v(&center), r)).unwrap()
}

pub fn ellipse(center: [f64; 2], axes: [f64; 2], angle: f64) -> Obstacle {
    Obstacle::new(Shape::ellipse_2d(center, axes, angle)).unwrap()
}

/// Star with `points` tips alternating between the two radii, centered at
/// the origin.
pub fn star(points: usize, outer: f64, inner: f64) -> Obstacle {
    let n = 2 * points;
    let vertices = (0..n)
        .map(|i| {
            let a = std::f64::consts::FRAC_PI_2 + std::f64::consts::TAU * i as f64 / n as f64;
            let r = if i % 2 == 0 { outer } else { inner };
            v(&[r * a.cos(), r * a.sin()])
        })
        .collect();
    Obstacle::new(Shape::polygon(vertices)).unwrap()
}

// Independent sphere geometry for the tree oracle.

/// Tangent vector at `b` pointing to `x`, with length equal to the angle.
pub fn log_map(b: &Vector, x: &Vector) -> Vector {
    let c = b.dot(x).clamp(-1.0, 1.0);
    let perp = x - b * c;
    let s = perp.norm();
    if s < 1e-300 {
        return Vector::zeros(b.len());
    }
    perp * (s.atan2(c) / s)
}

pub fn exp_map(b: &Vector, t: &Vector) -> Vector {
    let a = t.norm();
    if a < 1e-300 {
        return b.clone();
    }
    b * a.cos() + t * (a.sin() / a)
}

/// Minimal rotation taking unit `a` onto unit `b`, applied to `x`.
pub fn transport(a: &Vector, b: &Vector, x: &Vector) -> Vector {
    let s = a + b;
    x - &s * (s.dot(x) / (1.0 + a.dot(b))) + b * (2.0 * a.dot(x))
}

/// Level-by-level average: cumulative weights, exponential-map averages
/// anchored at the running result, descendants carried along with their
/// level ancestor.
pub fn tree_oracle(parents: &[Option<usize>], dirs: &[Vector], weights: &[f64]) -> Vector {
    let n = dirs.len();
    let mut level = vec![0usize; n];
    for i in 1..n {
        level[i] = level[parents[i].unwrap()] + 1;
    }
    let mut cum = weights.to_vec();
    for i in (1..n).rev() {
        cum[parents[i].unwrap()] += cum[i];
    }
    let depth = *level.iter().max().unwrap();
    let mut dirs = dirs.to_vec();
    let mut current = dirs[0].clone();
    for l in 1..=depth {
        let mut t = Vector::zeros(current.len());
        for i in (0..n).filter(|&i| level[i] == l) {
            t += log_map(&current, &dirs[i]) * cum[i];
        }
        let next = exp_map(&current, &t);
        for i in (0..n).filter(|&i| level[i] > l) {
            let mut anc = i;
            while level[anc] > l {
                anc = parents[anc].unwrap();
            }
            if cum[anc] > 0.0 {
                dirs[i] = transport(&dirs[anc], &next, &dirs[i]);
            }
        }
        current = next;
    }
    current
}

/// Random tree whose directions stay within ~1 rad of their parents.
pub fn random_tree(r: &mut impl Rng, dim: usize, max_depth: usize) -> (Vec<Option<usize>>, Vec<Vector>) {
    let count = r.gen_range(2..=7);
    let mut parents = vec![None];
    let mut depth = vec![0];
    let mut dirs = vec![random_unit(r, dim).into_inner()];
    for _ in 1..count {
        let candidates: Vec<usize> = (0..parents.len()).filter(|&i| depth[i] < max_depth).collect();
        let p = candidates[r.gen_range(0..candidates.len())];
        let step = random_vector(r, dim, 0.6);
        parents.push(Some(p));
        depth.push(depth[p] + 1);
        dirs.push((&dirs[p] + step).normalize());
    }
    (parents, dirs)
}

pub fn build_tree(parents: &[Option<usize>], dirs: &[Vector]) -> RotationTree {
    let mut t = RotationTree::new(UnitVector::new(dirs[0].clone()).unwrap());
    for i in 1..dirs.len() {
        t.add(parents[i].unwrap(), UnitVector::new(dirs[i].clone()).unwrap()).unwrap();
    }
    t
}

use crate::avoidance::AvoidanceParams;
use crate::direction_space::UnitVector;
use crate::dynamics::VectorField;
use crate::multi::{avoid_multi_moving, avoid_multihull, default_local_attractors, obstacle_weights};
use crate::obstacle::{Obstacle, ObstacleTree};
use crate::rotation::rotational_sum;
use crate::tree::{avoid_tree, union_gamma};
use crate::{Result, RoamError, Vector};

/// Everything the agent has to avoid: independent obstacles (including
/// enclosing hulls) and trees of components.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Environment {
    pub singles: Vec<Obstacle>,
    pub trees: Vec<ObstacleTree>,
}

impl Environment {
    pub fn is_empty(&self) -> bool {
        self.singles.is_empty() && self.trees.is_empty()
    }

    pub fn is_moving(&self) -> bool {
        self.singles.iter().any(Obstacle::is_moving)
            || self.trees.iter().any(|t| t.components().iter().any(Obstacle::is_moving))
    }

    /// Obstacles advanced along their velocities to time `t`.
    pub fn at_time(&self, t: f64) -> Environment {
        if !self.is_moving() || t == 0.0 {
            return self.clone();
        }
        Environment {
            singles: self.singles.iter().map(|o| o.translated(&(o.velocity() * t))).collect(),
            trees: self
                .trees
                .iter()
                .map(|tree| {
                    // Trees move rigidly with their root.
                    let v = tree.component(tree.root()).velocity() * t;
                    tree.translated(&v)
                })
                .collect(),
        }
    }

    /// Smallest Γ over all obstacles (∞ without obstacles); below one means
    /// the point is inside an obstacle or outside a hull.
    pub fn gamma_min(&self, x: &Vector) -> f64 {
        let singles = self.singles.iter().map(|o| o.global_gamma(x).unwrap_or(0.0));
        let trees = self.trees.iter().map(|t| union_gamma(t, x));
        singles.chain(trees).fold(f64::INFINITY, f64::min)
    }

    /// Modulated velocity at `x`.
    pub fn velocity<F: VectorField + ?Sized>(&self, field: &F, x: &Vector, params: &AvoidanceParams) -> Result<Vector> {
        match (self.singles.len(), self.trees.len()) {
            (0, 0) => Ok(field.eval(x)),
            (0, 1) => avoid_tree(&self.trees[0], field, x, params),
            (_, 0) => self.singles_velocity(field, x, params),
            _ => self.grouped_velocity(field, x, params),
        }
    }

    fn singles_velocity<F: VectorField + ?Sized>(
        &self,
        field: &F,
        x: &Vector,
        params: &AvoidanceParams,
    ) -> Result<Vector> {
        let hulls = self.singles.len() >= 2 && self.singles.iter().all(Obstacle::is_inverted);
        match field.attractor() {
            Some(a) if hulls => {
                let locals = default_local_attractors(&self.singles, &a)?;
                avoid_multihull(&self.singles, field, x, &locals, params)
            }
            _ => avoid_multi_moving(&self.singles, field, x, params),
        }
    }

    /// Independent obstacles and each tree form groups; group outputs are
    /// blended like single obstacles, using each group's smallest Γ.
    fn grouped_velocity<F: VectorField + ?Sized>(
        &self,
        field: &F,
        x: &Vector,
        params: &AvoidanceParams,
    ) -> Result<Vector> {
        let f = field.eval(x);
        if f.norm() == 0.0 {
            return Ok(f);
        }
        let mut outputs = Vec::new();
        let mut gammas = Vec::new();
        if !self.singles.is_empty() {
            outputs.push(self.singles_velocity(field, x, params)?);
            let only = Environment { singles: self.singles.clone(), trees: Vec::new() };
            gammas.push(only.gamma_min(x));
        }
        for tree in &self.trees {
            outputs.push(avoid_tree(tree, field, x, params)?);
            gammas.push(union_gamma(tree, x));
        }
        let weights = obstacle_weights(&gammas, params.weight_mode);
        let terms: Vec<(f64, Vector)> = outputs
            .iter()
            .zip(&weights.weights)
            .filter(|(v, w)| **w > 0.0 && v.norm() > 0.0)
            .map(|(v, w)| (*w, v.clone()))
            .collect();
        let dir = match rotational_sum(&f, &terms) {
            Ok(d) => d,
            Err(RoamError::AntiCollinear { .. }) => {
                UnitVector::new(terms.iter().fold(Vector::zeros(x.len()), |acc, (w, v)| acc + v.normalize() * *w))?
            }
            Err(e) => return Err(e),
        };
        let speed: f64 =
            weights.residual * f.norm() + outputs.iter().zip(&weights.weights).map(|(v, w)| w * v.norm()).sum::<f64>();
        Ok(dir.into_inner() * speed)
    }
}

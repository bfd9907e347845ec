//! Rotational obstacle avoidance for first-order dynamical systems.
//!
//! The core idea: instead of modulating a velocity with a matrix, rotate it in
//! direction space toward a pseudo-tangent of the nearest obstacle surface.
//! Everything here works in any dimension `N >= 2`.

pub mod avoidance;
pub mod convergence;
pub mod direction_space;
pub mod dynamics;
pub mod error;
pub mod multi;
pub mod obstacle;
pub mod par;
pub mod rotation;
pub mod sim;
pub mod tree;

pub use error::{Result, RoamError};

/// Dynamically sized column vector used for points, velocities and directions.
pub type Vector = nalgebra::DVector<f64>;
/// Dynamically sized matrix.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Dot products at or below `-1 + TOL_ANTICOLLINEAR` are treated as opposing.
pub const TOL_ANTICOLLINEAR: f64 = 1e-6;

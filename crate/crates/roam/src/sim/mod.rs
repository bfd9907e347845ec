//! Simulation harness: scenario files, Euler integration, outcome
//! classification, metrics, field sampling and file output.

mod environment;
pub mod field;
pub mod metrics;
pub mod output;
pub mod run;
pub mod scenario;

pub use environment::Environment;
pub use field::{sample_field, sampling_bounds, FieldSample};
pub use metrics::{compute_metrics, Metrics, Stat};
pub use run::{classify, integrate, integrate_one, Outcome, ReferenceSet, RunResult, Trajectory};
pub use scenario::{Bounds, Integration, Scenario, ScenarioFile};

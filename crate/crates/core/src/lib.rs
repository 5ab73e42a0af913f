//! Distribution functions, decreasing rearrangements, weak L∞, BMO and
//! Calderón–Zygmund-type coverings on finite weighted metric measure spaces.
//!
//! Everything is computed exactly on step functions and finite ball
//! families, so the classical inequalities can be checked as properties of
//! concrete instances.

pub mod covering;
pub mod error;
pub mod io;
pub mod metric_measure;
pub mod numeric;
pub mod oscillation;
pub mod random;
pub mod rearrangement;
pub mod verify;
pub mod weak_linf;

pub use covering::{czd_cover, refined_containment_check, stopping_radius, vitali_select, CoverInstance, CoverResult};
pub use error::{Error, Result};
pub use metric_measure::{
    ball_members, build_space, counterexample_function, doubling_constant, dyadic_counterexample_space,
    enumerate_canonical_balls, log_example_space, Atom, Ball, BallFamily, CanonicalBall, LogExample,
    MetricMeasureSpace, MetricSpec,
};
pub use oscillation::{OscillationAnalysis, OscillationReport};
pub use rearrangement::{LevelSets, SampleFunction, StepFunction, Supremum};
pub use weak_linf::ConstantReport;

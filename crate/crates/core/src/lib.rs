//! One-pass streaming and sublinear-time sampling approximations for
//! makespan scheduling of precedence-constrained jobs on identical machines.
//!
//! The algorithms compress the input into a sketch (job counts per DAG depth
//! and geometric processing-time bucket), compute an approximate optimal
//! makespan from it, and emit a schedule sketch: one time instant per depth
//! such that all jobs of depth `d` fit between `t_{d-1}` and `t_d`. A second
//! pass turns that sketch into machine assignments.

pub mod bucket;
pub mod error;
pub mod format;
pub mod generate;
pub mod instance;
pub mod model;
pub mod oracle;
pub mod report;
pub mod sampling;
pub mod schedule;
pub mod sketch;
pub mod streaming;

pub use error::{Error, Result};
pub use generate::{GenSource, GenSpec};
pub use instance::{compute_depths, Instance, InstanceMeta};
pub use model::{derive_params, guarantee_condition, AlgoParams, Algorithm, DerivedParams, Job, JobId, StreamEvent};
pub use oracle::{default_order, exact_makespan, list_schedule, lower_bound};
pub use report::{Discovered, RunReport};
pub use sampling::{rand_approx_alpha, rand_approx_bounded, run_sampling, JobSource, SourceJob};
pub use schedule::{sketch_to_schedule, validate_schedule, Assignment, ConcreteSchedule, ScheduleSketch, Violation};
pub use sketch::{InputSketch, SketchEntry};
pub use streaming::{run_stream, stream_alpha_known, stream_alpha_unknown, stream_known, stream_unknown};

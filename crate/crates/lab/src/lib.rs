//! Sweep driver for the `cfsupp` command: specifier parsing, grid
//! evaluation on a worker pool, long-format CSV and a JSON manifest.

pub mod error;
pub mod output;
pub mod run;
pub mod spec;

pub use error::LabError;
pub use run::{run_sweep, SweepOutput, SweepRecord};
pub use spec::{Options, Protocol, SweepSpec};

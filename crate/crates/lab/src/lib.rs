//! Experiment harness around `rbe-core`: a multi-threaded trial runner,
//! result records with CSV/JSON emission, transcript files, the exact-identity
//! self test and the `rbe-lab` command line.

pub mod cli;
pub mod experiments;
pub mod record;
pub mod runner;
pub mod selftest;
pub mod transcript_io;

pub use record::{MetricRow, ResultRecord, SweepRow};
pub use runner::{Parallel, Runner};

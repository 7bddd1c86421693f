//! Experiment harness around `boundary-lab-core`: config files, dataset and
//! model serialization, deterministic parallel sweeps, theory checks,
//! stitching verification, and self-contained SVG plots.
//!
//! All outputs are overwritten in place (write-to-temp then rename) and
//! contain no timestamps, so re-running a command with the same config
//! produces byte-identical files.

pub mod config;
pub mod dataset_io;
pub mod error;
pub mod model_io;
pub mod results;
pub mod runner;
pub mod svg;
pub mod textio;

pub use error::{AppError, AppResult};

//! Experiment configuration, artifact output and the acceptance checks.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod verify;

pub use artifacts::{check_artifact_hashes, ArtifactWriter};
pub use commands::*;
pub use config::*;
pub use verify::{select, verify, Presets, Verdict, CRITERIA};

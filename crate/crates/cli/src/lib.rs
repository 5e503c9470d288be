//! Experiment drivers, file formats, and verification suites for the
//! detection-time simulator. The binary in `main.rs` is a thin argument
//! layer over this crate.

// pinned oracle constants keep their full reference digits
#![allow(clippy::excessive_precision)]

pub mod experiments;
pub mod io;
pub mod verify;

/// `git describe` of the build, embedded at compile time.
pub const GIT_DESCRIBE: &str = env!("GIT_DESCRIBE");

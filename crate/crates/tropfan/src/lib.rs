//! File formats, SVG output, threaded enumeration and the command-line front end for `tropfan-core`.

pub mod cli;
pub mod formats;
pub mod parallel;
pub mod svg;

pub use cli::{run, Cli, CliError, Command, JobConfig};

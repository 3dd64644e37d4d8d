//! Library side of the `psatz` command: problem files and commands.

pub mod commands;
pub mod problem;

pub use commands::{Flags, Outcome};
pub use problem::Problem;

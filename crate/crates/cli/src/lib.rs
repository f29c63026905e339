//! Command-line front end: problem files, commands and reports.

mod commands;
pub mod input;
pub mod report;

pub use commands::{run, Cli, Command, VERIFY_TOL};
pub use input::{parse_problem, InputError, ProblemFile};

//! Front end for `satstab`: problem files, the subcommands, and CSV/SVG
//! output.

pub mod commands;
pub mod error;
pub mod output;
pub mod problem;

pub use problem::{load_problem, parse_problem, ProblemError, ProblemFile};

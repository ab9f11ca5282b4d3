//! Problem files, commands and JSON reports for the `coiso` binary.
//!
//! Exit codes: 0 when every required check passes, 1 on a failed verdict,
//! 2 on an input error.

pub mod commands;
pub mod problem;
pub mod report;

pub use commands::{cmd_check, cmd_moser, cmd_nijenhuis, cmd_reeb, cmd_thicken, MoserOptions, Thickened};
pub use problem::{parse_problem, InputError, ProblemFile};
pub use report::{Check, Report, Source};

/// Exit code for input errors.
pub const EXIT_INPUT: i32 = 2;

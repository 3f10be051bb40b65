//! Configuration, file formats, reports and subcommands of the `heterocyl`
//! binary. Every command is a plain function so the tests drive them
//! without spawning processes.

pub mod commands;
pub mod config;
pub mod formats;
pub mod report;

pub use commands::{cmd_euler_export, cmd_lambda_star, cmd_report, cmd_solve, cmd_verify, run_solve, Outcome};
pub use config::RunConfig;

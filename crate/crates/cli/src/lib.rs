//! File formats and commands behind the `cpm` binary.

pub mod args;
pub mod commands;
pub mod error;
pub mod game_file;
pub mod solvers;
pub mod summary;
pub mod trace_csv;

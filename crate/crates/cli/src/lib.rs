//! Workspace language and command dispatch for `wirecalc`.

pub mod ast;
pub mod check;
pub mod commands;
pub mod load;
pub mod render;
pub mod syntax;

pub use commands::{execute, execute_line, Opts, Outcome};

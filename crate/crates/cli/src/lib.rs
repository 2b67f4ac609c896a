//! Library side of the `pairmatch` command-line tool.

pub mod config;
pub mod run;
pub mod theory;
pub mod validate;

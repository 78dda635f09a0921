//! Library surface of the command-line front end; the binary in `main.rs`
//! parses arguments and delegates here, and the acceptance suite drives the
//! same functions in-process.

pub mod commands;
pub mod config;

//! Batch front end. The `deid` binary parses flags and calls into
//! [`commands`].

pub mod commands;
pub mod config;
pub mod io;

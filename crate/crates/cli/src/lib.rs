//! Command-line workflow and HTTP serving around `graphite-core`:
//! train, predict, explain, eval, synth, bench, and serve.

pub mod cli;
pub mod commands;
pub mod config;
pub mod serve;

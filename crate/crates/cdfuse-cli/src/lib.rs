//! Command-line pipelines for cdfuse: analyze, simulate, reproduce.

pub mod config;
pub mod output;
pub mod pipeline;
pub mod reproduce;
pub mod simulate;

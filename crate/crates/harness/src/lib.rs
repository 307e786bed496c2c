//! Experiment harness: config files, run directories, invariant reports and the acceptance suite.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod config;
pub mod invariants;
pub mod report;
pub mod runner;
pub mod tables;

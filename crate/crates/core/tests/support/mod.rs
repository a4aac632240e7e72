//! Shared harness code for the integration tests and examples.

#![allow(dead_code)]

pub mod demo;
pub mod synth;
pub mod toy_scorer;

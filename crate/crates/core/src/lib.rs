pub mod commands;
pub mod crossdb;
pub mod error;
pub mod extract;
pub mod fixtures;
pub mod manifest;
pub mod metrics;
pub mod model;
pub mod patterns;
pub mod report;
pub mod store;
pub mod synth;

pub use error::{Error, Result};

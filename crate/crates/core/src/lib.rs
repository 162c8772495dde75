//! Approximate Bayesian computation with summary-free data discrepancies.

pub mod analysis;
pub mod cli;
pub mod data;
pub mod discrepancy;
pub mod engine;
pub mod error;
pub mod models;
pub mod rand_dist;

pub use data::DataSet;
pub use error::{Error, Result};

//! NDE quality models and Bayesian value-of-information analysis for
//! inspection-informed repair decisions.

pub mod bayes;
pub mod config;
pub mod decision;
pub mod distributions;
pub mod error;
pub mod nde_models;
pub mod quadrature;
pub mod report;
pub mod scenarios;
pub mod verify;

pub use error::{Error, Result};

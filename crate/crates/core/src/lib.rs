//! Performative forecasting: scoring rules evaluated under the interventional
//! distributions a forecast induces when decisions act on it.

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod fixtures;
pub mod graph;
pub mod mechanisms;
pub mod performative;
pub mod retraining;
pub mod scoring;
pub mod surface;

pub use error::{Error, Result};

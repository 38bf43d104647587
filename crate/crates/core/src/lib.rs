//! Stock-index forecasting from news sentiment with a blended ensemble of
//! recurrent networks.
//!
//! The pieces compose into a pipeline: [`sentiment`] scores headlines,
//! [`dataset`] aligns them with prices and cuts rolling windows, [`training`]
//! fits stacked LSTM/GRU models, [`ensemble`] combines their predictions and
//! [`metrics`] evaluates the result. [`experiment`] wires it all together
//! behind a JSON config.

pub mod cells;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod numerics;
pub mod sentiment;
pub mod synthetic;
pub mod training;

pub use error::{Error, Result};

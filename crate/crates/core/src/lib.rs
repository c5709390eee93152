//! Indoor 5 GHz WiFi path loss modelling.
//!
//! - [`pathloss`]: evaluators for six path loss models and the link budget.
//! - [`fitting`]: robust regression and grid search for the log-distance,
//!   wall-factor and TMB coefficients, plus RMSE scoring.
//! - [`measurements`]: capture CSV ingestion, the location registry, and
//!   signal stability statistics.
//! - [`rate`]: empirical MCS / spatial-stream distributions and PHY rates.
//! - [`synthetic`]: seeded data generators for tests and demos.

pub mod fitting;
pub mod kv;
pub mod measurements;
pub mod pathloss;
pub mod rate;
pub mod regression;
pub mod synthetic;

pub use fitting::{fit_full, FitError, FitReport, PathLossSample};
pub use measurements::{LocationRegistry, PacketRecord};
pub use pathloss::{evaluate, rssi_at, LinkGeometry, ModelId, PathLossError, PathLossParams};
pub use rate::{GuardInterval, McsDistributionTable, RateError, RatePrediction, RssiBin};

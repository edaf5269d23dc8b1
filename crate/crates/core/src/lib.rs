//! Dataset condensation with privacy calibrated from the data's own
//! randomness, and a membership-inference harness that measures ε empirically.
//!
//! * [`stats`]: data model, CSV ingestion, sensitivity and plugin moments.
//! * [`calibrator`]: closed-form (ε, δ) and ε bounds from attack error rates.
//! * [`condenser`]: distribution-matching condensation.
//! * [`model_eval`]: logistic-regression utility measurement.
//! * [`auditor`]: Monte Carlo audit and reconciliation.
//! * [`cli`]: the `dcpriv` command-line surface and its JSON reports.

pub mod auditor;
pub mod calibrator;
pub mod cli;
pub mod condenser;
pub mod error;
pub mod model_eval;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};

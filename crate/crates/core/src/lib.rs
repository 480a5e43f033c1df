//! Length-of-stay classification pipeline and a discrete-event simulator of
//! emergency-department-to-ward patient flow.
//!
//! The crate is organised bottom-up:
//!
//! * [`domain`]: encounters, labels, confusion counts, simulation scenarios.
//! * [`data`]: CSV ingestion, preprocessing, resampling, synthetic cohorts.
//! * [`classify`]: logistic regression, LDA, oracle-noise classifiers,
//!   threshold calibration and an adapter for external scores.
//! * [`eval`]: metrics, ROC/PR curves, cross-validation, model comparison
//!   tests and univariate feature scoring.
//! * [`sim`]: the GW/SSU/waiting-area event simulator and its statistics.
//! * [`experiments`]: the command implementations behind the `losflow` CLI.

// `!(x > 0.0)` is used deliberately so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod data;
pub mod domain;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod seed;
pub mod sim;
pub mod stats;

pub use domain::{label_from_los, ClassLabel, ConfusionCounts, Encounter, FeatureValue, Scenario};
pub use error::{Error, Result};

//! Replacement planning for two-component systems whose parts wear each
//! other out.
//!
//! The crate covers two problems:
//!
//! * estimating binned deterioration-rate matrices from nothing more than a
//!   record of past limit replacements ([`sim`], [`anneal`], [`landscape`]);
//! * computing the discounted-cost optimal replacement policy for known
//!   rates and checking its threshold structure ([`dp`], [`evaluate`]).

pub mod anneal;
pub mod datasets;
pub mod domain;
pub mod dp;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod landscape;
pub mod lp;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod sim;

pub use domain::{
    bin_index, CostModel, EventKind, FailureEvent, FailureHistory, GridShape, Limits, Matrix, Part,
    RateTable, WearState, DEFAULT_BIN_COUNT, DEFAULT_BIN_WIDTH, FRESH_WEAR, RATE_MAX,
};
pub use error::{Error, Result};

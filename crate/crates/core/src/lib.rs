//! Heartbeat load analytics on the Pearson plane.
//!
//! Beat-to-beat intervals are summarized by their first four moments, either
//! accumulated from the start of a recording or over a sliding window, and
//! each summary is placed on the plane of squared skewness against kurtosis.
//! Distances from the normal and uniform landmarks then serve as load and
//! fatigue indicators. The [`activity`] module predicts activity type from
//! per-exercise features.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod activity;
pub mod bootstrap;
pub mod error;
pub mod ingest;
pub mod load_metrics;
pub mod moments;
pub mod pearson;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
pub use ingest::{HeartSample, HeartSeries, Phase, PhaseMarks};
pub use moments::{batch_moments, MomentAccumulator, MomentSummary, WindowAccumulator};
pub use pearson::{classify_region, metric1, metric2, to_pearson, PearsonPoint, Region};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

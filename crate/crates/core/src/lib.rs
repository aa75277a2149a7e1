//! Intent-aware analytics for legal case retrieval.
//!
//! The crate covers the whole experimental pipeline around a five-category
//! search intent taxonomy: annotation aggregation and agreement, session
//! reconstruction from interaction logs, behavioral and online metrics,
//! the statistical test battery, a gradient boosting core, satisfaction
//! prediction, query-document content features, intent-aware learning to
//! rank and a calibrated synthetic data generator.
//!
//! Numeric kernels (statistics, ranking metrics, content features) are
//! generic over [`Real`]; the aliases below pin them to `f64`, which is what
//! the pipelines use.

pub mod behavior;
pub mod boosting;
pub mod error;
pub mod io;
pub mod ltr;
pub mod satisfaction;
pub mod scalar;
pub mod session_log;
pub mod stats;
pub mod synth;
pub mod taxonomy;
pub mod text;

pub use error::{Error, Result};
pub use scalar::Real;
pub use taxonomy::{IntentLabel, LabelValue};

/// Hypothesis test outcome in double precision.
pub type TestResult = stats::TestResult<f64>;
/// Hypothesis test outcome in single precision.
pub type TestResultF32 = stats::TestResult<f32>;
/// Query-document content features in double precision.
pub type ContentFeatures = text::ContentFeatures<f64>;
/// Ranking evaluation summary in double precision.
pub type RankingMetrics = ltr::metrics::RankingMetrics<f64>;
/// Ranking evaluation summary in single precision.
pub type RankingMetricsF32 = ltr::metrics::RankingMetrics<f32>;

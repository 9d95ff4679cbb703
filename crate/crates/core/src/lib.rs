//! Datasheet compiler for machine-learning sensors.
//!
//! A sensor's facts arrive as a bundle (see [`bundle`]): a hardware manifest,
//! a two-layer privacy label, a dataset nutrition label, model evaluation
//! scores, a bill of materials for carbon accounting and, optionally, raw
//! readings from an end-to-end field study. Each module validates and
//! computes one section; [`render`] assembles them into a Markdown or HTML
//! datasheet with CSV sidecars.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix them to `f64`, which is what the CLI uses.

pub mod bundle;
pub mod cli;
pub mod document;
pub mod error;
pub mod findings;
pub mod footprint;
pub mod labels;
pub mod manifest;
pub mod metrics;
pub mod render;
pub mod scalar;
pub mod study;
pub mod wire;

pub use error::{Error, Result};
pub use findings::{Finding, Severity, ValidationReport};
pub use scalar::Scalar;

pub type EvalRecord = metrics::EvalRecord<f64>;
pub type RocPoint = metrics::RocPoint<f64>;
pub type RocCurve = metrics::RocCurve<f64>;
pub type PrPoint = metrics::PrPoint<f64>;
pub type PrCurve = metrics::PrCurve<f64>;
pub type ConfusionMatrix = metrics::ConfusionMatrix<f64>;
pub type ModelReport = metrics::ModelReport<f64>;

pub type BomEntry = footprint::BomEntry<f64>;
pub type UsageProfile = footprint::UsageProfile<f64>;
pub type FootprintReport = footprint::FootprintReport<f64>;
pub type BreakdownRow = footprint::BreakdownRow<f64>;

pub type Reading = study::Reading<f64>;
pub type StratumStats = study::StratumStats<f64>;
pub type Stratum = study::Stratum<f64>;
pub type StudyReport = study::StudyReport<f64>;

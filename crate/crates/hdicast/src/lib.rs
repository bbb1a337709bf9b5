//! Forecasting Human Development Index trajectories from country panels.
//!
//! The pipeline has four stages, each usable on its own:
//!
//! 1. [`similarity`] — rank candidate predictor indicators for a country by
//!    edit distance on real sequences (EDR) against the target series, and
//!    keep the top `k`.
//! 2. [`boosted_trees`] — fit a regularized gradient-boosted regression-tree
//!    ensemble (second-order boosting, exact greedy splits, sparsity-aware
//!    missing-value routing) of the target on the selected predictors.
//! 3. [`evaluation`] — tune hyperparameters by exhaustive grid search under
//!    expanding-window cross-validation, then report in-sample and
//!    out-of-sample MAPE across a temporal train/test split.
//! 4. [`forecast`] — simulate each predictor forward with a small
//!    autoregressive-integrated model chosen by AIC, feed the simulated
//!    predictor paths through the trained ensemble, and emit an HDI path.
//!
//! [`pipeline::run_pipeline`] wires the stages together per country, writes
//! CSV/JSON/SVG artifacts, and records a manifest of content hashes so runs
//! can be compared byte for byte.

pub mod boosted_trees;
pub mod chart;
pub mod config;
pub mod data_model;
pub mod evaluation;
pub mod forecast;
pub mod pipeline;
pub mod report;
pub mod similarity;

pub use config::PipelineConfig;
pub use pipeline::run_pipeline;

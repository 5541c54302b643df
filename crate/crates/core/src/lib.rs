//! Venn-Abers calibration and calibrated feature-importance explanations
//! for binary scoring classifiers on tabular data.
//!
//! The crate is organised around a small pipeline:
//!
//! 1. [`data`] — datasets, CSV ingestion, deterministic stratified splits,
//!    and synthetic data generators for tests.
//! 2. [`model`] — the [`model::ScoringModel`] contract, built-in decision
//!    tree and bagged forest trainers, and a line-protocol bridge to
//!    external scorers.
//! 3. [`calibrate`] — isotonic regression (pool-adjacent-violators) and the
//!    Venn-Abers predictor producing probability intervals `[p0, p1]` with a
//!    regularized point estimate `p`.
//! 4. [`discretize`] — per-feature threshold generators used to form
//!    perturbation groups over numeric features.
//! 5. [`explain`] — factual and counterfactual explanations: per-feature
//!    weights with uncertainty intervals, rule assembly, and JSON exports.
//! 6. [`metrics`] / [`harness`] — calibration metrics (ECE, log loss, AUC,
//!    accuracy) and the cross-validated comparison of uncalibrated vs
//!    calibrated setups, plus explanation timing.
//! 7. [`render`] — deterministic SVG bar plots of explanations.
//!
//! Everything downstream of a seed is deterministic: identical inputs and
//! seeds produce byte-identical splits, models, explanations, and plots.

pub mod calibrate;
pub mod data;
pub mod discretize;
pub mod error;
pub mod explain;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod render;

pub use calibrate::{cheat_endpoint, regularize, ProbabilityInterval, VennAbers};
pub use data::{
    load_csv, stratified_kfold, synth_numeric, synth_two_class, train_cal_split, CsvOptions,
    Dataset, Feature, FeatureKind, FeatureSchema, SplitPair,
};
pub use discretize::{assign_group, Discretizer, DiscretizerKind};
pub use error::{CalexError, Result};
pub use explain::{Explainer, Explanation, FeatureWeights, Mode, Rule, RuleOp};
pub use harness::{run_comparison, time_explanations, ComparisonConfig, MetricsReport};
pub use model::{train_forest, train_tree, ForestModel, ForestParams, ScoringModel, TreeModel};
pub use render::{render_counterfactual, render_regular, render_uncertainty, RenderOptions};

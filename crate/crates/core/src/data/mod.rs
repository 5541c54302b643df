//! Dataset representation, CSV ingestion, deterministic splitting, and
//! synthetic data generation.

mod dataset;
mod io;
mod schema;
mod split;
mod synth;

pub use dataset::Dataset;
pub use io::{load_csv, load_csv_from, write_csv, write_csv_to, CsvOptions};
pub use schema::{Feature, FeatureKind, FeatureSchema};
pub use split::{
    stratified_kfold, stratified_kfold_indices, train_cal_split, train_cal_split_indices, Fold,
    SplitPair,
};
pub use synth::{synth_numeric, synth_two_class};

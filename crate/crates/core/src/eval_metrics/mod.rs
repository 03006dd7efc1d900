//! Confusion matrices, class-balanced accuracy, multi-run aggregation and
//! the inverse-distance kNN baseline.

mod confusion;
mod knn;
mod report;

pub use confusion::{
    aggregate_runs, confusion, mean_accuracy, mean_accuracy_present, ConfusionMatrix, Matrix,
    RunAggregate,
};
pub use knn::{knn_classify, knn_select_k, KnnModel, KnnSelection, K_CANDIDATES};
pub use report::{render_side_by_side, render_table, write_confusion_csv, RunRecord, RunReport};

use thiserror::Error;

use crate::Category;

pub const N_CLASSES: usize = Category::COUNT;

/// Per-cell variance above which a run aggregate is flagged.
pub const SIGNIFICANT_VARIANCE: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{preds} predictions for {truth} labels")]
    LengthMismatch { preds: usize, truth: usize },
    #[error("label {0} is outside the {N_CLASSES} classes")]
    LabelOutOfRange(usize),
    #[error("class {0} has no samples")]
    EmptyClass(Category),
    #[error("aggregation needs at least 2 runs, got {0}")]
    TooFewRuns(usize),
    #[error("k = {k} is invalid for {n} training samples")]
    InvalidK { k: usize, n: usize },
    #[error("kNN needs non-empty training and validation sets")]
    EmptySplit,
}

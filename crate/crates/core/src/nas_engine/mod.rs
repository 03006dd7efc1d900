//! Multi-objective architecture search over spectrum-branch genomes:
//! aging evolution whose parent choice uses non-dominated sorting and
//! crowding distance, with a Pareto archive of every evaluation.

mod evolve;
mod genome;
mod pareto;

pub use evolve::{
    evolve, pick_candidate, read_archive_jsonl, read_front_csv, write_archive_jsonl,
    write_front_csv, ArchiveRecord, Evaluator, Individual, Memo, NasConfig, ParetoArchive,
    TrainingEvaluator,
};
pub use genome::{
    Gene, Genome, Mutation, FILTERS, INPUT_SIDE, KERNELS, MAX_LAYERS, POOL_KERNELS, STRIDES,
};
pub use pareto::{crowding_distance, dominates, front_ranks, nondominated_sort, Objectives};

use thiserror::Error;

use crate::tensor_nn::NnError;

#[derive(Debug, Error)]
pub enum NasError {
    #[error("invalid genome: {0}")]
    InvalidGenome(String),
    #[error("no front member reaches accuracy {0}")]
    NoCandidateMeetsThreshold(f64),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

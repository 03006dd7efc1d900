//! Multi-run training, test-set evaluation, the kNN baseline and the
//! architecture search, all driven from a processed ROI dataset.

use crate::association_roi::{RoiDataset, RoiSample, Split};
use crate::eval_metrics::{
    aggregate_runs, confusion, knn_select_k, mean_accuracy_present, ConfusionMatrix, KnnModel,
    KnnSelection, MetricsError, RunRecord, RunReport,
};
use crate::model_zoo::ModelKind;
use crate::nas_engine::{
    evolve, Genome, Individual, Memo, NasConfig, NasError, ParetoArchive, TrainingEvaluator,
};
use crate::seed;
use crate::tensor_nn::{
    evaluate_predictions, train, Architecture, EpochRecord, Example, ModelGraph, NnError, Shape,
    TrainConfig,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("the {0} split is empty")]
    EmptySplit(&'static str),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Nas(#[from] NasError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("model does not fit the dataset: {0}")]
    ArchitectureMismatch(String),
}

pub fn labels(samples: &[&RoiSample]) -> Vec<usize> {
    samples.iter().map(|s| s.category.index()).collect()
}

pub fn examples<'a>(kind: &ModelKind, samples: &[&'a RoiSample]) -> Vec<Example<'a>> {
    samples
        .iter()
        .map(|s| Example {
            inputs: kind.inputs(&s.roi, &s.rcs_vector),
            label: s.category.index(),
        })
        .collect()
}

/// Samples of one split, refusing empty splits.
pub fn split_of(ds: &RoiDataset, split: Split) -> Result<Vec<&RoiSample>, ExperimentError> {
    let s = ds.split(split);
    if s.is_empty() {
        return Err(ExperimentError::EmptySplit(split.name()));
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    pub model: ModelGraph<f32>,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_mean_acc: f64,
    pub test_confusion: ConfusionMatrix,
}

impl RunOutcome {
    pub fn test_mean_accuracy(&self) -> f64 {
        mean_accuracy_present(&self.test_confusion)
    }
}

/// Confusion matrix of `model` on the test split.
pub fn test_confusion(
    ds: &RoiDataset,
    kind: &ModelKind,
    model: &ModelGraph<f32>,
) -> Result<ConfusionMatrix, ExperimentError> {
    let test = split_of(ds, Split::Test)?;
    let preds = evaluate_predictions(model, &examples(kind, &test))?;
    Ok(confusion(&preds, &labels(&test))?)
}

/// Trains `runs` independently initialised copies of a model. Run `r`
/// derives its initialisation and shuffling seeds from `(seed, r)`.
pub fn train_runs(
    ds: &RoiDataset,
    kind: &ModelKind,
    cfg: &TrainConfig,
    runs: usize,
    seed: u64,
    mut on_run: impl FnMut(&RunOutcome),
) -> Result<Vec<RunOutcome>, ExperimentError> {
    let arch = kind.architecture()?;
    let train_s = split_of(ds, Split::Train)?;
    let val_s = ds.split(Split::Val);
    let train_ex = examples(kind, &train_s);
    let val_ex = examples(kind, &val_s);
    let mut out = Vec::with_capacity(runs);
    for run in 0..runs {
        let run_seed = seed::derive_indexed(seed, kind.name(), run as u64);
        let mut rng = seed::rng_for(run_seed, "init");
        let model = ModelGraph::<f32>::new(&arch, &mut rng)?;
        let run_cfg = TrainConfig {
            seed: seed::derive_seed(run_seed, "train"),
            ..cfg.clone()
        };
        let trained = train(model, &train_ex, &val_ex, &run_cfg)?;
        let cm = test_confusion(ds, kind, &trained.model)?;
        let outcome = RunOutcome {
            run,
            seed: run_seed,
            model: trained.model,
            history: trained.history,
            best_epoch: trained.best_epoch,
            best_val_mean_acc: trained.best_val_mean_acc,
            test_confusion: cm,
        };
        on_run(&outcome);
        out.push(outcome);
    }
    Ok(out)
}

pub fn run_report(kind: &ModelKind, outcomes: &[RunOutcome]) -> Result<RunReport, ExperimentError> {
    let arch = kind.architecture()?;
    let runs = outcomes
        .iter()
        .map(|o| RunRecord {
            run: o.run,
            seed: o.seed,
            confusion: o.test_confusion,
            normalized: o.test_confusion.normalized(),
            mean_accuracy: o.test_mean_accuracy(),
        })
        .collect();
    let cms: Vec<ConfusionMatrix> = outcomes.iter().map(|o| o.test_confusion).collect();
    Ok(RunReport {
        model: kind.name().to_string(),
        n_params: arch.count_params()?,
        n_macs: arch.count_macs()?,
        runs,
        aggregate: if cms.len() >= 2 {
            Some(aggregate_runs(&cms)?)
        } else {
            None
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputSource {
    Roi,
    Rcs,
}

/// Maps each model input to a sample field by shape: spatial inputs take
/// the ROI, sequence inputs the RCS vector. Sizes must match the dataset.
pub fn input_sources(
    arch: &Architecture,
    ds: &RoiDataset,
) -> Result<Vec<InputSource>, ExperimentError> {
    let side = ds.meta.pipeline.roi.size;
    let rcs_len = ds.meta.pipeline.roi.rcs_len;
    arch.inputs
        .iter()
        .map(|shape| match *shape {
            Shape::Spatial { h, w, c: 1 } if h == side && w == side => Ok(InputSource::Roi),
            Shape::Seq { len, c: 1 } if len == rcs_len => Ok(InputSource::Rcs),
            other => Err(ExperimentError::ArchitectureMismatch(format!(
                "input {other} matches neither the {side}x{side}x1 ROI nor the {rcs_len}x1 RCS vector"
            ))),
        })
        .collect()
}

/// Confusion matrix of an arbitrary model on one split, wiring inputs by
/// [`input_sources`].
pub fn evaluate_on_split(
    ds: &RoiDataset,
    model: &ModelGraph<f32>,
    split: Split,
) -> Result<ConfusionMatrix, ExperimentError> {
    let sources = input_sources(&model.arch, ds)?;
    let samples = split_of(ds, split)?;
    let ex: Vec<Example> = samples
        .iter()
        .map(|s| Example {
            inputs: sources
                .iter()
                .map(|src| match src {
                    InputSource::Roi => s.roi.as_slice(),
                    InputSource::Rcs => s.rcs_vector.as_slice(),
                })
                .collect(),
            label: s.category.index(),
        })
        .collect();
    let preds = evaluate_predictions(model, &ex)?;
    Ok(confusion(&preds, &labels(&samples))?)
}

/// kNN feature: flattened ROI followed by the RCS vector.
pub fn knn_features(s: &RoiSample) -> Vec<f32> {
    let mut f = Vec::with_capacity(s.roi.len() + s.rcs_vector.len());
    f.extend_from_slice(&s.roi);
    f.extend_from_slice(&s.rcs_vector);
    f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnOutcome {
    pub selection: KnnSelection,
    pub test_confusion: ConfusionMatrix,
    pub test_mean_accuracy: f64,
}

/// Selects `k` from `candidates` on the validation split and scores it on
/// the test split.
pub fn knn_baseline(ds: &RoiDataset, candidates: &[usize]) -> Result<KnnOutcome, ExperimentError> {
    let feats = |s: &[&RoiSample]| s.iter().map(|x| knn_features(x)).collect::<Vec<_>>();
    let train_s = split_of(ds, Split::Train)?;
    let val_s = split_of(ds, Split::Val)?;
    let test_s = split_of(ds, Split::Test)?;
    let model = KnnModel::new(feats(&train_s), labels(&train_s))?;
    let selection = knn_select_k(&model, &feats(&val_s), &labels(&val_s), candidates)?;
    let preds = model
        .predict_many(&feats(&test_s), &[selection.k])?
        .remove(0);
    let cm = confusion(&preds, &labels(&test_s))?;
    Ok(KnnOutcome {
        selection,
        test_mean_accuracy: mean_accuracy_present(&cm),
        test_confusion: cm,
    })
}

/// Architecture search over spectrum models trained on the ROI inputs.
pub fn run_nas(
    ds: &RoiDataset,
    seed_genome: &Genome,
    nas: &NasConfig,
    train_cfg: &TrainConfig,
    seed: u64,
    on_eval: impl FnMut(&Individual),
) -> Result<(ParetoArchive, usize), ExperimentError> {
    let kind = ModelKind::Spectrum(seed_genome.clone());
    let train_s = split_of(ds, Split::Train)?;
    let val_s = split_of(ds, Split::Val)?;
    let evaluator = TrainingEvaluator {
        train: examples(&kind, &train_s),
        val: examples(&kind, &val_s),
        config: train_cfg.clone(),
        seed: seed::derive_seed(seed, "nas-eval"),
    };
    let mut memo = Memo::new(evaluator);
    let archive = evolve(seed_genome, nas, &mut memo, seed, on_eval)?;
    Ok((archive, memo.trainings))
}

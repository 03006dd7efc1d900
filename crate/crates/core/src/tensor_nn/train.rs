use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamParams, AdamState};
use super::loss::{class_weights, loss_weighted_ce, loss_weighted_ce_grad};
use super::model::{Grads, ModelGraph};
use super::NnError;
use crate::{par, seed};
use rand::seq::SliceRandom;

/// One labelled sample: one slice per model input.
#[derive(Debug, Clone)]
pub struct Example<'a> {
    pub inputs: Vec<&'a [f32]>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamParams,
    pub seed: u64,
    /// Per-class loss weights; derived from the training labels when absent.
    #[serde(default)]
    pub class_weights: Option<Vec<f64>>,
    /// Samples per gradient work unit. Fixed so that results do not depend
    /// on the thread count.
    pub grad_chunk: usize,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |m: String| Err(NnError::InvalidConfig(m));
        if !(self.adam.learning_rate >= 0.0 && self.adam.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate {} must be finite and >= 0",
                self.adam.learning_rate
            ));
        }
        if self.batch_size == 0 || self.grad_chunk == 0 {
            return bad("batch_size and grad_chunk must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.adam.beta1)
            || !(0.0..1.0).contains(&self.adam.beta2)
            || self.adam.epsilon <= 0.0
        {
            return bad("Adam betas must lie in [0, 1) and epsilon must be > 0".into());
        }
        if let Some(w) = &self.class_weights {
            if w.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return bad("class weights must be positive".into());
            }
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 60,
            batch_size: 128,
            adam: AdamParams::default(),
            seed: 0,
            class_weights: None,
            grad_chunk: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_mean_acc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Weights from the epoch with the highest validation mean accuracy.
    pub model: ModelGraph<f32>,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_mean_acc: f64,
}

/// Arg-max class for every example.
pub fn evaluate_predictions(
    model: &ModelGraph<f32>,
    examples: &[Example<'_>],
) -> Result<Vec<usize>, NnError> {
    par::map(examples, |e| model.predict(&e.inputs).map(|p| argmax(&p)))
        .into_iter()
        .collect()
}

pub(crate) fn argmax(p: &[f32]) -> usize {
    let mut best = 0;
    for (i, v) in p.iter().enumerate() {
        if *v > p[best] {
            best = i;
        }
    }
    best
}

/// Mean per-class recall over the classes present in `labels`.
fn balanced_accuracy(labels: &[usize], preds: &[usize], n_classes: usize) -> f64 {
    let mut hit = vec![0usize; n_classes];
    let mut tot = vec![0usize; n_classes];
    for (&l, &p) in labels.iter().zip(preds) {
        tot[l] += 1;
        hit[l] += usize::from(l == p);
    }
    let present: Vec<f64> = tot
        .iter()
        .zip(&hit)
        .filter(|(t, _)| **t > 0)
        .map(|(&t, &h)| h as f64 / t as f64)
        .collect();
    if present.is_empty() {
        f64::NAN
    } else {
        present.iter().sum::<f64>() / present.len() as f64
    }
}

/// Mini-batch Adam on class-weighted cross-entropy, keeping the weights of
/// the best validation epoch (latest on ties).
pub fn train(
    mut model: ModelGraph<f32>,
    train: &[Example<'_>],
    val: &[Example<'_>],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, NnError> {
    if train.is_empty() {
        return Err(NnError::InvalidConfig("training set is empty".into()));
    }
    cfg.validate()?;
    let n_classes = model.n_classes();
    if let Some(e) = train.iter().chain(val).find(|e| e.label >= n_classes) {
        return Err(NnError::InvalidConfig(format!(
            "label {} outside {n_classes} classes",
            e.label
        )));
    }
    let weights: Vec<f32> = match &cfg.class_weights {
        Some(w) if w.len() != n_classes => {
            return Err(NnError::InvalidConfig(format!(
                "{} class weights for {n_classes} classes",
                w.len()
            )))
        }
        Some(w) => w.iter().map(|&x| x as f32).collect(),
        None => {
            let mut counts = vec![0usize; n_classes];
            train.iter().for_each(|e| counts[e.label] += 1);
            class_weights(&counts)
                .into_iter()
                .map(|x| x as f32)
                .collect()
        }
    };

    let mut rng = seed::rng_for(cfg.seed, "train-shuffle");
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut adam = AdamState::new(&model);
    let val_labels: Vec<usize> = val.iter().map(|e| e.label).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best = (model.clone(), 0usize, f64::NEG_INFINITY);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0f64;
        for batch in order.chunks(cfg.batch_size) {
            let parts = par::map_chunks(batch, cfg.grad_chunk, |chunk| {
                let mut g = model.zero_grads();
                let mut loss = 0.0f64;
                for &i in chunk {
                    let e = &train[i];
                    let w = weights[e.label];
                    let trace = model.forward(&e.inputs)?;
                    let probs = trace.output();
                    loss += f64::from(loss_weighted_ce(probs, e.label, w));
                    model.backward(&trace, &loss_weighted_ce_grad(probs, e.label, w), &mut g);
                }
                Ok::<_, NnError>((g, loss))
            });
            let mut total: Option<Grads<f32>> = None;
            for part in parts {
                let (g, l) = part?;
                loss_sum += l;
                match total.as_mut() {
                    None => total = Some(g),
                    Some(t) => t.add_assign(&g),
                }
            }
            let mut total = total.expect("non-empty batch");
            total.scale(1.0 / batch.len() as f32);
            adam_step(model.params_mut(), &total, &mut adam, &cfg.adam);
        }
        let val_mean_acc = if val.is_empty() {
            f64::NAN
        } else {
            balanced_accuracy(&val_labels, &evaluate_predictions(&model, val)?, n_classes)
        };
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            val_mean_acc,
        });
        // ties go to the later, longer-trained snapshot
        if val.is_empty() || val_mean_acc >= best.2 {
            best = (
                model.clone(),
                epoch,
                if val.is_empty() {
                    f64::NAN
                } else {
                    val_mean_acc
                },
            );
        }
    }
    if cfg.epochs == 0 {
        best.2 = f64::NAN;
    }
    Ok(TrainOutcome {
        model: best.0,
        history,
        best_epoch: best.1,
        best_val_mean_acc: best.2,
    })
}

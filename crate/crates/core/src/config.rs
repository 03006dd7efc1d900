//! Run configuration: every knob of the pipeline in one tree, loaded from a
//! sectioned TOML file layered over built-in defaults.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::association_roi::{GatingParams, PipelineParams, RoiParams};
use crate::model_zoo;
use crate::nas_engine::{Genome, NasConfig};
use crate::signal_sim::{RadarConfig, ScenarioParams, TrackCounts};
use crate::spectra_dsp::CfarParams;
use crate::tensor_nn::{AdamParams, TrainConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config encode error: {0}")]
    Encode(#[from] toml::ser::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Independently initialised repetitions per model.
    pub runs: usize,
    pub grad_chunk: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let adam = AdamParams::default();
        TrainSection {
            epochs: 60,
            learning_rate: adam.learning_rate,
            batch_size: 128,
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_eps: adam.epsilon,
            runs: 10,
            grad_chunk: 8,
        }
    }
}

impl TrainSection {
    pub fn to_train_config(&self, epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: self.batch_size,
            adam: AdamParams {
                learning_rate: self.learning_rate,
                beta1: self.adam_beta1,
                beta2: self.adam_beta2,
                epsilon: self.adam_eps,
            },
            seed: 0,
            class_weights: None,
            grad_chunk: self.grad_chunk,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NasSection {
    pub budget: usize,
    pub population: usize,
    pub sample: usize,
    /// Training epochs per candidate.
    pub epochs: usize,
    pub seed_genome: Genome,
    /// Accuracy threshold for the picked candidate. When absent, the manual
    /// CNN is evaluated under the same budget and `accuracy_slack` below its
    /// accuracy is used.
    pub min_accuracy: Option<f64>,
    pub accuracy_slack: f64,
}

impl Default for NasSection {
    fn default() -> Self {
        let n = NasConfig::default();
        NasSection {
            budget: n.budget,
            population: n.population,
            sample: n.sample,
            epochs: 15,
            seed_genome: model_zoo::seed_genome(),
            min_accuracy: None,
            accuracy_slack: 0.03,
        }
    }
}

impl NasSection {
    pub fn nas_config(&self) -> NasConfig {
        NasConfig {
            budget: self.budget,
            population: self.population,
            sample: self.sample,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnnSection {
    pub k_set: Vec<usize>,
}

impl Default for KnnSection {
    fn default() -> Self {
        KnnSection {
            k_set: crate::eval_metrics::K_CANDIDATES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    /// Raw recordings, relative to the output directory.
    pub raw_dir: String,
    pub roi_file: String,
}

impl Default for PathsSection {
    fn default() -> Self {
        PathsSection {
            raw_dir: "raw".into(),
            roi_file: "rois.roids".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub radar: RadarConfig,
    pub tracks: TrackCounts,
    pub scenario: ScenarioParams,
    pub cfar: CfarParams,
    pub gating: GatingParams,
    pub roi: RoiParams,
    pub train: TrainSection,
    pub nas: NasSection,
    pub knn: KnnSection,
    pub paths: PathsSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            radar: RadarConfig::desk(),
            tracks: TrackCounts::default(),
            scenario: ScenarioParams::default(),
            cfar: CfarParams::default(),
            gating: GatingParams::default(),
            roi: RoiParams::default(),
            train: TrainSection::default(),
            nas: NasSection::default(),
            knn: KnnSection::default(),
            paths: PathsSection::default(),
        }
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_table() && v.is_table() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

impl RunConfig {
    /// Defaults overridden by whatever keys `text` sets.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let mut base = toml::Value::try_from(RunConfig::default())?;
        let over: toml::Value = toml::from_str(text)?;
        merge(&mut base, over);
        let cfg: RunConfig = base.try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn pipeline(&self) -> PipelineParams {
        PipelineParams {
            cfar: self.cfar.clone(),
            gating: self.gating.clone(),
            roi: self.roi.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let inv = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        self.radar.validate().map_err(|e| inv(&e))?;
        self.tracks.validate().map_err(|e| inv(&e))?;
        self.cfar.validate().map_err(|e| inv(&e))?;
        if self.gating.gate_radius_m.is_nan() || self.gating.gate_radius_m <= 0.0 {
            return Err(ConfigError::Invalid(
                "gating.gate_radius_m must be > 0".into(),
            ));
        }
        self.train
            .to_train_config(self.train.epochs)
            .validate()
            .map_err(|e| inv(&e))?;
        if self.train.learning_rate <= 0.0 {
            return Err(ConfigError::Invalid(
                "train.learning_rate must be > 0".into(),
            ));
        }
        if self.train.runs == 0 {
            return Err(ConfigError::Invalid("train.runs must be >= 1".into()));
        }
        self.nas.nas_config().validate().map_err(|e| inv(&e))?;
        self.nas.seed_genome.validate().map_err(|e| inv(&e))?;
        if self.knn.k_set.is_empty() || self.knn.k_set.contains(&0) {
            return Err(ConfigError::Invalid(
                "knn.k_set must hold positive values".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_carry_the_stated_hyperparameters() {
        let c = RunConfig::default();
        assert_eq!(c.train.learning_rate, 0.003);
        assert_eq!(c.train.batch_size, 128);
        assert_eq!(c.roi.size, 32);
        assert_eq!(c.roi.rcs_len, 30);
        assert_eq!(c.knn.k_set, vec![3, 4, 5, 7, 10]);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn file_values_override_defaults() {
        let c = RunConfig::from_toml_str("seed = 9\n[train]\nepochs = 3\n[radar]\nn_chirps = 32\n")
            .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.train.epochs, 3);
        assert_eq!(c.train.batch_size, 128);
        assert_eq!(c.radar.n_chirps, 32);
        assert_eq!(c.radar.n_samples, RadarConfig::desk().n_samples);
    }

    #[test]
    fn round_trip_and_rejections() {
        let c = RunConfig::default();
        let text = c.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
        assert!(matches!(
            RunConfig::from_toml_str("bogus = 1"),
            Err(ConfigError::Parse(_))
        ));
        assert!(matches!(
            RunConfig::from_toml_str("[train]\nlearning_rate = -1.0"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            RunConfig::from_toml_str("[nas]\nbudget = 5"),
            Err(ConfigError::Invalid(_))
        ));
    }
}

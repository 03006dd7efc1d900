//! Radar object classification from range-Doppler spectra and reflection
//! attributes.
//!
//! The crate covers the whole chain: a synthetic chirp-sequence radar
//! simulator, range-Doppler processing with OS-CFAR detection, gating
//! association and sparse ROI extraction, a small neural-network engine,
//! the spectrum / hybrid / reflection-only model builders, a
//! three-objective evolutionary architecture search, and evaluation
//! metrics with a kNN baseline.
//!
//! Data-parallel inner loops (frame rendering, per-frame DSP, per-sample
//! gradients, kNN queries, population evaluation) run on rayon when the
//! `parallel` feature is enabled (default) and fall back to plain
//! iterators otherwise. Results are identical in both modes.

pub mod association_roi;
pub mod config;
pub mod eval_metrics;
pub mod experiment;
pub mod model_zoo;
pub mod nas_engine;
pub mod par;
pub mod seed;
pub mod signal_sim;
pub mod spectra_dsp;
pub mod tensor_nn;

/// The four object categories.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub enum Category {
    Car,
    Pedestrian,
    TwoWheeler,
    Overridable,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Car,
        Category::Pedestrian,
        Category::TwoWheeler,
        Category::Overridable,
    ];

    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        match self {
            Category::Car => 0,
            Category::Pedestrian => 1,
            Category::TwoWheeler => 2,
            Category::Overridable => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Category> {
        Category::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Car => "car",
            Category::Pedestrian => "pedestrian",
            Category::TwoWheeler => "two-wheeler",
            Category::Overridable => "overridable",
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

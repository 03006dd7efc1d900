//! Reflection-to-object gating and per-object ROI / RCS-vector extraction,
//! plus the track-level dataset split and the processed dataset file.

mod dataset;
pub mod file;
mod gating;
mod roi;

pub use dataset::{
    build_dataset, build_from_dir, build_from_simulation, process_frame, split_tracks,
    FrameFeatures, PipelineParams, RoiDataset, RoiDatasetMeta, RoiSample, Split,
};
pub use gating::{associate, GatingParams};
pub use roi::{extract_roi, order_by_snr, rcs_vector, RoiParams};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RoiError {
    #[error("cannot extract an ROI from an empty association")]
    EmptyAssociation,
    #[error("spectrum ({0}x{1}) is smaller than the ROI window")]
    SpectrumTooSmall(usize, usize),
    #[error("no tracks to process")]
    NoTracks,
    #[error(transparent)]
    Dsp(#[from] crate::spectra_dsp::DspError),
    #[error(transparent)]
    Sim(#[from] crate::signal_sim::SimError),
    #[error("{0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

//! Synthetic chirp-sequence radar recordings of labeled objects.
//!
//! Objects are modeled as clouds of point scatterers. A frame is the
//! superposition of one complex exponential per scatterer over
//! (fast time, slow time, antenna) plus complex white noise.

mod config;
pub(crate) mod dataset;
pub mod io;
pub(crate) mod render;
mod scene;

pub use config::{RadarConfig, SPEED_OF_LIGHT};
pub use dataset::{
    generate_dataset, generate_track, track_plan, RcsFluctuation, ScenarioParams, TrackCounts,
    TrackRecording,
};
pub use render::{render_frame, RawFrame};
pub use scene::{synth_scene, Scatterer, SceneObject};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid radar configuration: {0}")]
    InvalidConfig(String),
    #[error("scatterer at range {range_m:.2} m / velocity {velocity_mps:.2} m/s / azimuth {azimuth_rad:.3} rad is outside the unambiguous region")]
    ScattererOutOfUnambiguousRange {
        range_m: f64,
        velocity_mps: f64,
        azimuth_rad: f64,
    },
    #[error("track counts must all be at least 1 (got {0})")]
    InvalidTrackCount(String),
    #[error("{0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

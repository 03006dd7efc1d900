//! Range-Doppler processing: 2D FFT, OS-CFAR detection, FFT beamforming
//! for azimuth, and calibrated RCS per reflection.

mod azimuth;
mod cfar;
mod fft;
mod reflection;

pub use azimuth::{azimuth_from_snapshot, estimate_azimuth};
pub use cfar::{os_cfar_detect, CfarParams, Detection};
pub use fft::{range_doppler_fft, range_doppler_fft_with, Spectrum, Window};
pub use reflection::{
    compute_rcs, extract_reflections, peak_bin_offsets, rcs_calibration_db, to_cartesian,
    write_reflections_csv, Reflection,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DspError {
    #[error("range must be positive, got {0}")]
    NonPositiveRange(f64),
    #[error("invalid CFAR parameters: {0}")]
    InvalidCfarParams(String),
    #[error("frame dimensions do not match the configuration")]
    ShapeMismatch,
}

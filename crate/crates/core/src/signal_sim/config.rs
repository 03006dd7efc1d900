use serde::{Deserialize, Serialize};

use super::SimError;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Sensor and waveform parameters of a standard chirp-sequence radar.
///
/// Samples are assumed to fill each chirp, so fast-time bin `k` maps to
/// range `k * range_resolution()` and the Doppler axis (after FFT shift)
/// has zero velocity at bin `n_chirps / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadarConfig {
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub cpi_duration_s: f64,
    pub n_samples: usize,
    pub n_chirps: usize,
    pub n_antennas: usize,
    pub antenna_spacing_wavelengths: f64,
    /// Per-sample complex noise power in dB (relative to a 0 dBsm target at 1 m).
    pub noise_floor_db: f64,
    pub dynamic_range_db: f64,
    pub rng_seed: u64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            carrier_freq_hz: 76.5e9,
            bandwidth_hz: 850e6,
            cpi_duration_s: 16e-3,
            n_samples: 128,
            n_chirps: 128,
            n_antennas: 8,
            antenna_spacing_wavelengths: 0.5,
            noise_floor_db: -60.0,
            dynamic_range_db: 60.0,
            rng_seed: 0,
        }
    }
}

impl RadarConfig {
    /// Reduced cube used for desk-scale experiments: half the chirps.
    pub fn desk() -> Self {
        Self {
            n_chirps: 64,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("cpi_duration_s", self.cpi_duration_s),
            (
                "antenna_spacing_wavelengths",
                self.antenna_spacing_wavelengths,
            ),
            ("dynamic_range_db", self.dynamic_range_db),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !self.noise_floor_db.is_finite() {
            return Err(SimError::InvalidConfig(
                "noise_floor_db must be finite".into(),
            ));
        }
        if self.n_samples < 2 || self.n_chirps < 2 {
            return Err(SimError::InvalidConfig(
                "need at least 2 samples and 2 chirps".into(),
            ));
        }
        if self.n_antennas < 2 {
            return Err(SimError::InvalidConfig(format!(
                "n_antennas must be >= 2, got {}",
                self.n_antennas
            )));
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    pub fn chirp_duration_s(&self) -> f64 {
        self.cpi_duration_s / self.n_chirps as f64
    }

    pub fn range_resolution_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)
    }

    /// Largest range representable on the complex fast-time axis.
    pub fn max_range_m(&self) -> f64 {
        self.n_samples as f64 * self.range_resolution_m()
    }

    pub fn velocity_resolution_mps(&self) -> f64 {
        self.wavelength_m() / (2.0 * self.cpi_duration_s)
    }

    /// Doppler axis spans `[-max, +max)`.
    pub fn max_velocity_mps(&self) -> f64 {
        self.wavelength_m() / (4.0 * self.chirp_duration_s())
    }

    /// Beat frequency of a target at `range_m`: 2·B·r / (c·T_chirp).
    pub fn beat_frequency_hz(&self, range_m: f64) -> f64 {
        2.0 * self.bandwidth_hz * range_m / (SPEED_OF_LIGHT * self.chirp_duration_s())
    }

    /// Doppler frequency of a radial velocity: 2·v·f_c / c.
    pub fn doppler_frequency_hz(&self, velocity_mps: f64) -> f64 {
        2.0 * velocity_mps * self.carrier_freq_hz / SPEED_OF_LIGHT
    }

    /// Fractional fast-time bin for a range.
    pub fn range_to_bin(&self, range_m: f64) -> f64 {
        // sample rate n_samples / T_chirp, bin spacing 1 / T_chirp
        self.beat_frequency_hz(range_m) * self.chirp_duration_s()
    }

    /// Fractional, FFT-shifted Doppler bin for a velocity.
    pub fn velocity_to_bin(&self, velocity_mps: f64) -> f64 {
        self.n_chirps as f64 / 2.0 + self.doppler_frequency_hz(velocity_mps) * self.cpi_duration_s
    }

    pub fn bin_to_range(&self, k: f64) -> f64 {
        k * self.range_resolution_m()
    }

    pub fn bin_to_velocity(&self, l: f64) -> f64 {
        (l - self.n_chirps as f64 / 2.0) * self.velocity_resolution_mps()
    }

    pub fn cube_len(&self) -> usize {
        self.n_samples * self.n_chirps * self.n_antennas
    }
}

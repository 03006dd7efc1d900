use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::signal_sim::RawFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    /// Periodic window coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
                .collect(),
        }
    }

    /// Coherent gain `Σ w` of a length-`n` window.
    pub fn sum(self, n: usize) -> f64 {
        self.coefficients(n).iter().sum()
    }
}

/// A k,l-spectrum: k indexes range, l indexes Doppler with zero velocity
/// at `n_l / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub n_k: usize,
    pub n_l: usize,
    pub n_antennas: usize,
    /// Complex bins, index `(k * n_l + l) * n_antennas + a`.
    pub cells: Vec<Complex64>,
    /// Noncoherent power `Σ_a |X|²`, index `k * n_l + l`.
    pub power: Vec<f64>,
    /// `10·log10(power)` clamped below at `floor_db`.
    pub magnitude_db: Vec<f64>,
    pub floor_db: f64,
}

impl Spectrum {
    /// Builds a spectrum from complex cells and derives power and dB maps.
    pub fn from_cells(n_k: usize, n_l: usize, n_antennas: usize, cells: Vec<Complex64>) -> Self {
        assert_eq!(cells.len(), n_k * n_l * n_antennas);
        let power: Vec<f64> = cells
            .chunks_exact(n_antennas)
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
            .collect();
        let mut sorted = power.clone();
        let mid = sorted.len() / 2;
        let (_, median, _) = sorted.select_nth_unstable_by(mid, f64::total_cmp);
        let floor_db = 10.0 * median.max(1e-30).log10() - 20.0;
        let magnitude_db = power
            .iter()
            .map(|&p| {
                let db = 10.0 * p.log10();
                if db > floor_db {
                    db
                } else {
                    floor_db
                }
            })
            .collect();
        Self {
            n_k,
            n_l,
            n_antennas,
            cells,
            power,
            magnitude_db,
            floor_db,
        }
    }

    #[inline]
    pub fn idx(&self, k: usize, l: usize) -> usize {
        k * self.n_l + l
    }

    pub fn power_at(&self, k: usize, l: usize) -> f64 {
        self.power[self.idx(k, l)]
    }

    pub fn db_at(&self, k: usize, l: usize) -> f64 {
        self.magnitude_db[self.idx(k, l)]
    }

    /// Antenna snapshot at one bin.
    pub fn snapshot(&self, k: usize, l: usize) -> &[Complex64] {
        let base = self.idx(k, l) * self.n_antennas;
        &self.cells[base..base + self.n_antennas]
    }

    /// Returns a copy with all linear powers multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Spectrum {
        let a = factor.sqrt();
        Spectrum::from_cells(
            self.n_k,
            self.n_l,
            self.n_antennas,
            self.cells.iter().map(|z| z * a).collect(),
        )
    }
}

/// Windowed 2D FFT over (samples, chirps) per antenna, Hann on both axes.
pub fn range_doppler_fft(frame: &RawFrame) -> Spectrum {
    range_doppler_fft_with(frame, Window::Hann)
}

/// [`range_doppler_fft`] with a selectable window. The transform is
/// unnormalised and the Doppler axis is FFT-shifted.
pub fn range_doppler_fft_with(frame: &RawFrame, window: Window) -> Spectrum {
    let (ns, nc, na) = (frame.n_samples, frame.n_chirps, frame.n_antennas);
    let ws = window.coefficients(ns);
    let wc = window.coefficients(nc);
    let mut planner = FftPlanner::<f64>::new();
    let fft_s = planner.plan_fft_forward(ns);
    let fft_c = planner.plan_fft_forward(nc);
    let mut cells = vec![Complex64::new(0.0, 0.0); ns * nc * na];
    // per antenna work buffer laid out chirp-major so fast-time rows are contiguous
    let mut buf = vec![Complex64::new(0.0, 0.0); ns * nc];
    let mut row = vec![Complex64::new(0.0, 0.0); nc];
    for a in 0..na {
        for c in 0..nc {
            for s in 0..ns {
                let z = frame.iq[(s * nc + c) * na + a];
                buf[c * ns + s] = Complex64::new(z.re as f64, z.im as f64) * (ws[s] * wc[c]);
            }
        }
        for chunk in buf.chunks_exact_mut(ns) {
            fft_s.process(chunk);
        }
        for k in 0..ns {
            for c in 0..nc {
                row[c] = buf[c * ns + k];
            }
            fft_c.process(&mut row);
            for (c, z) in row.iter().enumerate() {
                let l = (c + nc / 2) % nc;
                cells[(k * nc + l) * na + a] = *z;
            }
        }
    }
    Spectrum::from_cells(ns, nc, na, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_sim::RadarConfig;
    use num_complex::Complex32;

    fn tiny_cfg(ns: usize, nc: usize, na: usize) -> RadarConfig {
        RadarConfig {
            n_samples: ns,
            n_chirps: nc,
            n_antennas: na,
            ..RadarConfig::default()
        }
    }

    #[test]
    fn zero_input_sits_on_floor() {
        let f = RawFrame::zeros(&tiny_cfg(16, 8, 2));
        let s = range_doppler_fft(&f);
        assert!(s.magnitude_db.iter().all(|&m| m == s.floor_db));
        assert!(s.floor_db.is_finite());
    }

    #[test]
    fn unit_exponential_peaks_at_its_bin() {
        let (ns, nc) = (32, 16);
        let mut f = RawFrame::zeros(&tiny_cfg(ns, nc, 2));
        let (k0, l0) = (5usize, 3usize);
        for s in 0..ns {
            for c in 0..nc {
                let ph = 2.0
                    * PI
                    * (k0 as f64 * s as f64 / ns as f64 + l0 as f64 * c as f64 / nc as f64);
                for a in 0..2 {
                    let i = f.index(s, c, a);
                    f.iq[i] = Complex32::new(ph.cos() as f32, ph.sin() as f32);
                }
            }
        }
        let sp = range_doppler_fft_with(&f, Window::Rectangular);
        let shifted_l = (l0 + nc / 2) % nc;
        let peak = sp.snapshot(k0, shifted_l)[0].norm();
        assert!((peak - (ns * nc) as f64).abs() < 1e-3);
        let (imax, _) = sp
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(imax, sp.idx(k0, shifted_l));
    }

    #[test]
    fn scaling_scales_power() {
        let mut f = RawFrame::zeros(&tiny_cfg(8, 8, 2));
        f.iq[3] = Complex32::new(1.0, 0.5);
        let s = range_doppler_fft(&f);
        let t = s.scaled(4.0);
        for (a, b) in s.power.iter().zip(&t.power) {
            assert!((b - 4.0 * a).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::Spectrum;

const PADDING_FACTOR: usize = 8;

/// Spatial frequency (radians per element) of the dominant plane wave in
/// an array snapshot: zero-padded FFT peak refined by a parabola through
/// the peak magnitude and its two neighbours.
pub(crate) fn spatial_frequency(snapshot: &[Complex64]) -> f64 {
    let n = snapshot.len() * PADDING_FACTOR;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[..snapshot.len()].copy_from_slice(snapshot);
    FftPlanner::<f64>::new()
        .plan_fft_forward(n)
        .process(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|z| z.norm()).collect();
    let (m, _) = mag
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        });
    let (a, b, c) = (mag[(m + n - 1) % n], mag[m], mag[(m + 1) % n]);
    let denom = a - 2.0 * b + c;
    let delta = if denom.abs() > 0.0 {
        0.5 * (a - c) / denom
    } else {
        0.0
    };
    let mut f = 2.0 * PI * (m as f64 + delta) / n as f64;
    if f > PI {
        f -= 2.0 * PI;
    }
    f
}

/// Azimuth of the reflection at `(k_bin, l_bin)` from its antenna
/// snapshot, for a uniform linear array with `spacing_wavelengths`
/// element spacing. The result lies in (−π/2, π/2).
pub fn estimate_azimuth(
    spec: &Spectrum,
    k_bin: usize,
    l_bin: usize,
    spacing_wavelengths: f64,
) -> f64 {
    azimuth_from_snapshot(spec.snapshot(k_bin, l_bin), spacing_wavelengths)
}

pub fn azimuth_from_snapshot(snapshot: &[Complex64], spacing_wavelengths: f64) -> f64 {
    let f = spatial_frequency(snapshot);
    let s = (f / (2.0 * PI * spacing_wavelengths)).clamp(-1.0, 1.0);
    let lim = FRAC_PI_2 - 1e-9;
    s.asin().clamp(-lim, lim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_wave(az_deg: f64, n: usize, d: f64) -> Vec<Complex64> {
        let step = 2.0 * PI * d * az_deg.to_radians().sin();
        (0..n)
            .map(|a| Complex64::from_polar(1.3, step * a as f64 + 0.4))
            .collect()
    }

    #[test]
    fn equal_phase_is_boresight() {
        let s = vec![Complex64::new(0.3, -0.7); 8];
        assert_eq!(azimuth_from_snapshot(&s, 0.5), 0.0);
    }

    #[test]
    fn twenty_degrees_recovered() {
        let az = azimuth_from_snapshot(&plane_wave(20.0, 8, 0.5), 0.5).to_degrees();
        assert!((az - 20.0).abs() <= 1.0, "{az}");
    }

    #[test]
    fn conjugate_negates() {
        for deg in [-55.0, -12.5, 3.0, 20.0, 41.0] {
            let s = plane_wave(deg, 8, 0.5);
            let c: Vec<_> = s.iter().map(|z| z.conj()).collect();
            let (a, b) = (
                azimuth_from_snapshot(&s, 0.5),
                azimuth_from_snapshot(&c, 0.5),
            );
            assert!((a + b).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn zero_snapshot_is_boresight() {
        assert_eq!(
            azimuth_from_snapshot(&[Complex64::new(0.0, 0.0); 8], 0.5),
            0.0
        );
    }
}

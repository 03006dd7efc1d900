use std::io::Write;

use serde::{Deserialize, Serialize};

use super::azimuth::azimuth_from_snapshot;
use super::{os_cfar_detect, CfarParams, DspError, Spectrum, Window};
use crate::signal_sim::render::antenna_gain_db;
use crate::signal_sim::RadarConfig;

/// One detected reflection with its attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reflection {
    pub k_bin: usize,
    pub l_bin: usize,
    pub range_m: f64,
    pub velocity_mps: f64,
    pub azimuth_rad: f64,
    pub rcs_dbsm: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub snr_db: f64,
}

pub fn to_cartesian(range_m: f64, azimuth_rad: f64) -> (f64, f64) {
    (range_m * azimuth_rad.cos(), range_m * azimuth_rad.sin())
}

/// Constant that maps processed peak power back to dBsm: the coherent
/// gain of the windowed 2D FFT (amplitude) plus the noncoherent antenna
/// sum. The simulator references amplitude 1 to a 0 dBsm target at 1 m.
pub fn rcs_calibration_db(cfg: &RadarConfig) -> f64 {
    let w = Window::Hann;
    20.0 * (w.sum(cfg.n_samples) * w.sum(cfg.n_chirps)).log10()
        + 10.0 * (cfg.n_antennas as f64).log10()
}

/// RCS from peak power: undo the r⁻⁴ range dampening and the two-way
/// antenna gain, then subtract the calibration constant.
pub fn compute_rcs(
    snapshot_power_db: f64,
    range_m: f64,
    azimuth_rad: f64,
    cfg: &RadarConfig,
) -> Result<f64, DspError> {
    if range_m.is_nan() || range_m <= 0.0 {
        return Err(DspError::NonPositiveRange(range_m));
    }
    Ok(snapshot_power_db + 40.0 * range_m.log10()
        - 2.0 * antenna_gain_db(azimuth_rad)
        - rcs_calibration_db(cfg))
}

/// Parabolic refinement of a peak on the dB map along k and l.
///
/// Returns `(dk, dl, peak_db)`: sub-bin offsets and the interpolated peak
/// level, which removes most of the window's scalloping loss.
pub fn peak_bin_offsets(spec: &Spectrum, k: usize, l: usize) -> (f64, f64, f64) {
    let b = spec.db_at(k, l);
    let refine = |a: Option<f64>, c: Option<f64>| -> (f64, f64) {
        match (a, c) {
            (Some(a), Some(c)) => {
                let denom = a - 2.0 * b + c;
                if denom < 0.0 {
                    let d = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
                    (d, -0.25 * (a - c) * d)
                } else {
                    (0.0, 0.0)
                }
            }
            _ => (0.0, 0.0),
        }
    };
    let (dk, gk) = refine(
        k.checked_sub(1).map(|kk| spec.db_at(kk, l)),
        (k + 1 < spec.n_k).then(|| spec.db_at(k + 1, l)),
    );
    let (dl, gl) = refine(
        l.checked_sub(1).map(|ll| spec.db_at(k, ll)),
        (l + 1 < spec.n_l).then(|| spec.db_at(k, l + 1)),
    );
    (dk, dl, b + gk + gl)
}

/// Full reflection-level chain for one spectrum: OS-CFAR, sub-bin
/// range/Doppler, azimuth, RCS and Cartesian position. Detections in the
/// zero-range bin are dropped.
pub fn extract_reflections(
    spec: &Spectrum,
    cfg: &RadarConfig,
    cfar: &CfarParams,
) -> Result<Vec<Reflection>, DspError> {
    if spec.n_k != cfg.n_samples || spec.n_l != cfg.n_chirps || spec.n_antennas != cfg.n_antennas {
        return Err(DspError::ShapeMismatch);
    }
    let mut out = Vec::new();
    for d in os_cfar_detect(spec, cfar)? {
        let (dk, dl, peak_db) = peak_bin_offsets(spec, d.k_bin, d.l_bin);
        let range_m = cfg.bin_to_range(d.k_bin as f64 + dk);
        if range_m <= 0.0 {
            continue;
        }
        let velocity_mps = cfg.bin_to_velocity(d.l_bin as f64 + dl);
        let azimuth_rad = azimuth_from_snapshot(
            spec.snapshot(d.k_bin, d.l_bin),
            cfg.antenna_spacing_wavelengths,
        );
        let rcs_dbsm = compute_rcs(peak_db, range_m, azimuth_rad, cfg)?;
        let (x_m, y_m) = to_cartesian(range_m, azimuth_rad);
        out.push(Reflection {
            k_bin: d.k_bin,
            l_bin: d.l_bin,
            range_m,
            velocity_mps,
            azimuth_rad,
            rcs_dbsm,
            x_m,
            y_m,
            snr_db: d.snr_db,
        });
    }
    Ok(out)
}

/// Writes reflections as comma-separated text, one per line, after a
/// header row.
pub fn write_reflections_csv<W: Write>(
    mut w: W,
    reflections: &[Reflection],
) -> std::io::Result<()> {
    writeln!(
        w,
        "k,l,range_m,velocity_mps,azimuth_rad,rcs_dbsm,x_m,y_m,snr_db"
    )?;
    for r in reflections {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.k_bin,
            r.l_bin,
            r.range_m,
            r.velocity_mps,
            r.azimuth_rad,
            r.rcs_dbsm,
            r.x_m,
            r.y_m,
            r.snr_db
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    #[test]
    fn cartesian_examples() {
        assert_eq!(to_cartesian(10.0, 0.0), (10.0, 0.0));
        let (x, y) = to_cartesian(10.0, FRAC_PI_2 - 1e-12);
        assert!(x.abs() < 1e-9 && (y - 10.0).abs() < 1e-9);
        let (x, y) = to_cartesian(5.0, -FRAC_PI_6);
        assert!((x - 5.0 * FRAC_PI_6.cos()).abs() < 1e-12 && (y + 2.5).abs() < 1e-12);
    }

    #[test]
    fn rcs_is_linear_in_power() {
        let cfg = RadarConfig::desk();
        let a = compute_rcs(-30.0, 12.0, 0.3, &cfg).unwrap();
        let b = compute_rcs(-24.0, 12.0, 0.3, &cfg).unwrap();
        assert!((b - a - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rcs_rejects_nonpositive_range() {
        let cfg = RadarConfig::desk();
        assert_eq!(
            compute_rcs(0.0, 0.0, 0.0, &cfg),
            Err(DspError::NonPositiveRange(0.0))
        );
        assert!(compute_rcs(0.0, -1.0, 0.0, &cfg).is_err());
    }

    #[test]
    fn csv_has_one_line_per_reflection() {
        let r = Reflection {
            k_bin: 3,
            l_bin: 4,
            range_m: 1.0,
            velocity_mps: 0.5,
            azimuth_rad: 0.0,
            rcs_dbsm: -3.0,
            x_m: 1.0,
            y_m: 0.0,
            snr_db: 20.0,
        };
        let mut buf = Vec::new();
        write_reflections_csv(&mut buf, &[r.clone(), r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("3,4,1,0.5,0,-3,1,0,20"));
    }
}

use serde::{Deserialize, Serialize};

use super::RoiError;
use crate::spectra_dsp::{Reflection, Spectrum};

/// ROI and reflection-vector geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoiParams {
    /// Side of the square output window in bins.
    pub size: usize,
    /// Side of the patch cut around each reflection.
    pub patch: usize,
    pub rcs_len: usize,
    /// dBsm interval mapped affinely onto [0, 1] for the RCS vector.
    pub rcs_range_dbsm: (f64, f64),
}

impl Default for RoiParams {
    fn default() -> Self {
        Self {
            size: 32,
            patch: 7,
            rcs_len: 30,
            rcs_range_dbsm: (-40.0, 30.0),
        }
    }
}

/// Strongest first: descending SNR, then ascending (k, l).
pub fn order_by_snr(assoc: &[Reflection]) -> Vec<&Reflection> {
    let mut v: Vec<&Reflection> = assoc.iter().collect();
    v.sort_by(|a, b| {
        b.snr_db
            .total_cmp(&a.snr_db)
            .then(a.k_bin.cmp(&b.k_bin))
            .then(a.l_bin.cmp(&b.l_bin))
    });
    v
}

fn window_start(center: usize, size: usize, n: usize) -> usize {
    center.saturating_sub(size / 2).min(n - size)
}

/// Cuts the sparse ROI of one object.
///
/// Every associated reflection contributes a `patch × patch` mask around
/// its bin; the `size × size` window is centred on the strongest
/// reflection and shifted inward at the borders. Masked cells are scaled
/// from `[M - dynamic_range, M]` dB onto `[0, 1]`, where `M` is the level
/// of the strongest reflection; everything else is 0. Row index is k,
/// column index is l.
pub fn extract_roi(
    spec: &Spectrum,
    assoc: &[Reflection],
    dynamic_range_db: f64,
    params: &RoiParams,
) -> Result<Vec<f32>, RoiError> {
    let ordered = order_by_snr(assoc);
    let Some(strongest) = ordered.first() else {
        return Err(RoiError::EmptyAssociation);
    };
    let size = params.size;
    if spec.n_k < size || spec.n_l < size {
        return Err(RoiError::SpectrumTooSmall(spec.n_k, spec.n_l));
    }
    let k0 = window_start(strongest.k_bin, size, spec.n_k);
    let l0 = window_start(strongest.l_bin, size, spec.n_l);
    let peak_db = spec.db_at(strongest.k_bin, strongest.l_bin);
    let low = peak_db - dynamic_range_db;

    let mut mask = vec![false; size * size];
    let half = (params.patch / 2) as isize;
    for r in &ordered {
        for dk in -half..=half {
            for dl in -half..=half {
                let (i, j) = (
                    r.k_bin as isize + dk - k0 as isize,
                    r.l_bin as isize + dl - l0 as isize,
                );
                if (0..size as isize).contains(&i) && (0..size as isize).contains(&j) {
                    mask[i as usize * size + j as usize] = true;
                }
            }
        }
    }
    let mut out = vec![0f32; size * size];
    for (idx, v) in out.iter_mut().enumerate() {
        if mask[idx] {
            let (i, j) = (idx / size, idx % size);
            let m = spec.db_at(k0 + i, l0 + j);
            *v = ((m - low) / dynamic_range_db).clamp(0.0, 1.0) as f32;
        }
    }
    Ok(out)
}

/// Fixed-length RCS input: strongest reflections first, affinely mapped
/// to [0, 1] and clamped, zero-padded past the populated prefix.
pub fn rcs_vector(assoc: &[Reflection], params: &RoiParams) -> Vec<f32> {
    let (lo, hi) = params.rcs_range_dbsm;
    let mut out = vec![0f32; params.rcs_len];
    for (dst, r) in out.iter_mut().zip(order_by_snr(assoc)) {
        *dst = ((r.rcs_dbsm - lo) / (hi - lo)).clamp(0.0, 1.0) as f32;
    }
    out
}

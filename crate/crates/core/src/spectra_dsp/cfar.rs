use serde::{Deserialize, Serialize};

use super::{DspError, Spectrum};
use crate::par;

/// Ordered-statistics CFAR settings. The training region around a cell
/// under test spans `window_cells / 2` cells to each side in both
/// dimensions, minus a `(2·guard + 1)²` guard block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CfarParams {
    pub window_cells: usize,
    pub guard_cells: usize,
    pub rank_fraction: f64,
    pub threshold_scale_db: f64,
}

impl Default for CfarParams {
    fn default() -> Self {
        Self {
            window_cells: 16,
            guard_cells: 2,
            rank_fraction: 0.75,
            threshold_scale_db: 12.0,
        }
    }
}

impl CfarParams {
    pub fn validate(&self) -> Result<(), DspError> {
        if self.window_cells <= 2 * self.guard_cells {
            return Err(DspError::InvalidCfarParams(format!(
                "window {} must exceed twice the guard {}",
                self.window_cells, self.guard_cells
            )));
        }
        if !(self.rank_fraction > 0.0 && self.rank_fraction < 1.0) {
            return Err(DspError::InvalidCfarParams(format!(
                "rank fraction {} not in (0, 1)",
                self.rank_fraction
            )));
        }
        if !self.threshold_scale_db.is_finite() {
            return Err(DspError::InvalidCfarParams(
                "threshold scale must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn half_window(&self) -> usize {
        self.window_cells / 2
    }

    /// Zero-based index into the ascending-sorted training cells.
    pub fn rank_index(&self, population: usize) -> usize {
        let r = (self.rank_fraction * population as f64).ceil() as usize;
        r.clamp(1, population.max(1)) - 1
    }

    pub fn threshold_scale(&self) -> f64 {
        10f64.powf(self.threshold_scale_db / 10.0)
    }
}

/// One detected peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub k_bin: usize,
    pub l_bin: usize,
    /// Cell power over the ordered-statistic noise estimate.
    pub snr_db: f64,
}

/// Noise estimate and threshold test for every cell; `None` where the
/// cell stays below threshold.
fn threshold_pass(spec: &Spectrum, params: &CfarParams) -> Vec<Option<f64>> {
    let (nk, nl) = (spec.n_k, spec.n_l);
    let hw = params.half_window() as isize;
    let g = params.guard_cells as isize;
    let scale = params.threshold_scale();
    let rows = par::map_range(nk, |k| {
        let mut train = Vec::with_capacity(((2 * hw + 1) * (2 * hw + 1)) as usize);
        let k0 = (k as isize - hw).max(0) as usize;
        let k1 = (k as isize + hw).min(nk as isize - 1) as usize;
        (0..nl)
            .map(|l| {
                let l0 = (l as isize - hw).max(0) as usize;
                let l1 = (l as isize + hw).min(nl as isize - 1) as usize;
                train.clear();
                for kk in k0..=k1 {
                    let dk = (kk as isize - k as isize).abs();
                    let row = &spec.power[kk * nl..(kk + 1) * nl];
                    if dk > g {
                        train.extend_from_slice(&row[l0..=l1]);
                    } else {
                        let gl0 = (l as isize - g).max(l0 as isize) as usize;
                        let gl1 = (l as isize + g).min(l1 as isize) as usize;
                        train.extend_from_slice(&row[l0..gl0]);
                        train.extend_from_slice(&row[gl1 + 1..=l1]);
                    }
                }
                if train.is_empty() {
                    return None;
                }
                let r = params.rank_index(train.len());
                let (_, q, _) = train.select_nth_unstable_by(r, f64::total_cmp);
                let q = *q;
                let p = spec.power[k * nl + l];
                (p > scale * q).then(|| 10.0 * (p / q.max(f64::MIN_POSITIVE)).log10().min(300.0))
            })
            .collect::<Vec<_>>()
    });
    rows.into_iter().flatten().collect()
}

/// OS-CFAR over the noncoherent power map, reduced to local maxima.
///
/// A cell is detected when its power exceeds the threshold scale times
/// the `rank_fraction` quantile of its training cells. Windows are clamped
/// at the spectrum borders. Detected cells are kept only if their power is
/// at least that of each of their 8 neighbours.
pub fn os_cfar_detect(spec: &Spectrum, params: &CfarParams) -> Result<Vec<Detection>, DspError> {
    params.validate()?;
    let (nk, nl) = (spec.n_k, spec.n_l);
    let pass = threshold_pass(spec, params);
    let mut out = Vec::new();
    for k in 0..nk {
        for l in 0..nl {
            let Some(snr_db) = pass[k * nl + l] else {
                continue;
            };
            let p = spec.power[k * nl + l];
            let is_peak = (k.saturating_sub(1)..=(k + 1).min(nk - 1))
                .flat_map(|kk| (l.saturating_sub(1)..=(l + 1).min(nl - 1)).map(move |ll| (kk, ll)))
                .all(|(kk, ll)| spec.power[kk * nl + ll] <= p);
            if is_peak {
                out.push(Detection {
                    k_bin: k,
                    l_bin: l,
                    snr_db,
                });
            }
        }
    }
    Ok(out)
}

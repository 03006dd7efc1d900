//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use radarnas::signal_sim::{Scatterer, SceneObject};
use radarnas::spectra_dsp::{CfarParams, Spectrum};
use radarnas::Category;

/// A single point scatterer with no micro-Doppler.
pub fn point(range_m: f64, v: f64, az: f64, rcs: f64) -> SceneObject {
    SceneObject {
        category: Category::Overridable,
        scatterers: vec![Scatterer {
            range_m,
            radial_velocity_mps: v,
            azimuth_rad: az,
            rcs_dbsm: rcs,
            micro_doppler_amplitude_mps: 0.0,
            micro_doppler_freq_hz: 0.0,
            micro_doppler_phase_rad: 0.0,
        }],
        centroid_xy_m: (range_m * az.cos(), range_m * az.sin()),
        lateral_velocity_mps: 0.0,
    }
}

/// Straightforward OS-CFAR: for every cell, gather the training cells by
/// scanning the full clamped window and skipping the guard block, sort,
/// pick the rank, then keep 8-neighbourhood maxima.
pub fn brute_force_cfar(spec: &Spectrum, p: &CfarParams) -> Vec<(usize, usize)> {
    let (nk, nl) = (spec.n_k as isize, spec.n_l as isize);
    let hw = (p.window_cells / 2) as isize;
    let g = p.guard_cells as isize;
    let scale = 10f64.powf(p.threshold_scale_db / 10.0);
    let pw = |k: isize, l: isize| spec.power[(k * nl + l) as usize];
    let mut pass = vec![false; (nk * nl) as usize];
    for k in 0..nk {
        for l in 0..nl {
            let mut train = Vec::new();
            for kk in k - hw..=k + hw {
                for ll in l - hw..=l + hw {
                    let inside = kk >= 0 && kk < nk && ll >= 0 && ll < nl;
                    let guard = (kk - k).abs() <= g && (ll - l).abs() <= g;
                    if inside && !guard {
                        train.push(pw(kk, ll));
                    }
                }
            }
            train.sort_by(f64::total_cmp);
            let rank = ((p.rank_fraction * train.len() as f64).ceil() as usize).max(1) - 1;
            pass[(k * nl + l) as usize] = pw(k, l) > scale * train[rank];
        }
    }
    let mut out = Vec::new();
    for k in 0..nk {
        for l in 0..nl {
            if !pass[(k * nl + l) as usize] {
                continue;
            }
            let peak = (-1..=1).all(|dk| {
                (-1..=1).all(|dl| {
                    let (kk, ll) = (k + dk, l + dl);
                    !(kk >= 0 && kk < nk && ll >= 0 && ll < nl) || pw(kk, ll) <= pw(k, l)
                })
            });
            if peak {
                out.push((k as usize, l as usize));
            }
        }
    }
    out
}

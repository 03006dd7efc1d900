use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{associate, extract_roi, rcs_vector, GatingParams, RoiError, RoiParams};
use crate::seed::rng_for;
use crate::signal_sim::io::{read_index, read_track};
use crate::signal_sim::{
    generate_track, RadarConfig, RawFrame, ScenarioParams, TrackCounts, TrackRecording,
};
use crate::spectra_dsp::{extract_reflections, range_doppler_fft, CfarParams};
use crate::{par, Category};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn tag(self) -> u8 {
        match self {
            Split::Train => 0,
            Split::Val => 1,
            Split::Test => 2,
        }
    }

    pub fn from_tag(t: u8) -> Option<Split> {
        Split::ALL.get(t as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// One network input record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiSample {
    /// Row-major `size × size`, rows are k (range), columns l (Doppler).
    pub roi: Vec<f32>,
    pub rcs_vector: Vec<f32>,
    pub n_reflections: usize,
    pub category: Category,
    pub track_id: u32,
    pub frame_index: u32,
    pub split: Split,
}

/// Everything after the raw frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct PipelineParams {
    pub cfar: CfarParams,
    pub gating: GatingParams,
    pub roi: RoiParams,
}

/// Header record echoed into the processed dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiDatasetMeta {
    pub radar: RadarConfig,
    pub pipeline: PipelineParams,
    pub seed: u64,
    pub n_tracks: usize,
    pub rcs_normalisation: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoiDataset {
    pub meta: RoiDatasetMeta,
    pub samples: Vec<RoiSample>,
}

impl RoiDataset {
    pub fn split(&self, split: Split) -> Vec<&RoiSample> {
        self.samples.iter().filter(|s| s.split == split).collect()
    }

    /// `[split][category]` sample counts.
    pub fn counts(&self) -> [[usize; 4]; 3] {
        let mut c = [[0; 4]; 3];
        for s in &self.samples {
            c[s.split.tag() as usize][s.category.index()] += 1;
        }
        c
    }

    pub fn summary(&self) -> String {
        let c = self.counts();
        let mut out = format!("{:<8}", "split");
        for cat in Category::ALL {
            out += &format!("{:>13}", cat.name());
        }
        out += &format!("{:>9}\n", "total");
        for sp in Split::ALL {
            let row = c[sp.tag() as usize];
            out += &format!("{:<8}", sp.name());
            for v in row {
                out += &format!("{v:>13}");
            }
            out += &format!("{:>9}\n", row.iter().sum::<usize>());
        }
        out
    }
}

/// Stratified 70/10/20 track split. Within each category the track order
/// is shuffled with a seed-derived generator; `round(0.1·n)` tracks go to
/// validation and `round(0.2·n)` to test (each at least one when n ≥ 3),
/// the rest to training.
pub fn split_tracks(tracks: &[(u32, Category)], seed: u64) -> HashMap<u32, Split> {
    let mut out = HashMap::new();
    for cat in Category::ALL {
        let mut ids: Vec<u32> = tracks.iter().filter(|t| t.1 == cat).map(|t| t.0).collect();
        ids.sort_unstable();
        ids.shuffle(&mut rng_for(seed, &format!("split/{}", cat.name())));
        let n = ids.len();
        let mut n_val = (0.1 * n as f64).round() as usize;
        let mut n_test = (0.2 * n as f64).round() as usize;
        if n >= 3 {
            n_val = n_val.max(1);
            n_test = n_test.max(1);
        }
        let n_train = n - n_val - n_test;
        for (i, id) in ids.into_iter().enumerate() {
            let s = if i < n_train {
                Split::Train
            } else if i < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
            out.insert(id, s);
        }
    }
    out
}

/// ROI, RCS vector and reflection count of one processed frame.
pub type FrameFeatures = (Vec<f32>, Vec<f32>, usize);

/// Runs the full chain on one frame and returns the labeled object's
/// sample, if it gathered enough reflections. `truth[0]` is the labeled
/// object; other truth entries only act as competing gating anchors.
pub fn process_frame(
    frame: &RawFrame,
    cfg: &RadarConfig,
    params: &PipelineParams,
) -> Result<Option<FrameFeatures>, RoiError> {
    if !frame.matches(cfg) {
        return Err(crate::spectra_dsp::DspError::ShapeMismatch.into());
    }
    if frame.truth.is_empty() {
        return Ok(None);
    }
    let spec = range_doppler_fft(frame);
    let reflections = extract_reflections(&spec, cfg, &params.cfar)?;
    let anchors: Vec<(f64, f64)> = frame.truth.iter().map(|o| o.centroid_xy_m).collect();
    let assoc = associate(&reflections, &anchors, &params.gating);
    let mine = &assoc[0];
    if mine.is_empty() {
        return Ok(None);
    }
    let roi = extract_roi(&spec, mine, cfg.dynamic_range_db, &params.roi)?;
    let rcs = rcs_vector(mine, &params.roi);
    Ok(Some((roi, rcs, mine.len().min(params.roi.rcs_len))))
}

fn track_samples(
    track: &TrackRecording,
    split: Split,
    cfg: &RadarConfig,
    params: &PipelineParams,
) -> Result<Vec<RoiSample>, RoiError> {
    let mut out = Vec::new();
    for (i, frame) in track.frames.iter().enumerate() {
        if let Some((roi, rcs_vector, n_reflections)) = process_frame(frame, cfg, params)? {
            out.push(RoiSample {
                roi,
                rcs_vector,
                n_reflections,
                category: track.category,
                track_id: track.track_id,
                frame_index: i as u32,
                split,
            });
        }
    }
    Ok(out)
}

fn meta(cfg: &RadarConfig, params: &PipelineParams, seed: u64, n_tracks: usize) -> RoiDatasetMeta {
    RoiDatasetMeta {
        radar: cfg.clone(),
        pipeline: params.clone(),
        seed,
        n_tracks,
        rcs_normalisation: format!(
            "affine [{}, {}] dBsm -> [0, 1], clamped",
            params.roi.rcs_range_dbsm.0, params.roi.rcs_range_dbsm.1
        ),
    }
}

/// Processes recorded tracks into split-tagged samples, ordered by track
/// then frame.
pub fn build_dataset(
    tracks: &[TrackRecording],
    cfg: &RadarConfig,
    params: &PipelineParams,
    seed: u64,
) -> Result<RoiDataset, RoiError> {
    if tracks.is_empty() {
        return Err(RoiError::NoTracks);
    }
    let ids: Vec<_> = tracks.iter().map(|t| (t.track_id, t.category)).collect();
    let splits = split_tracks(&ids, seed);
    let per_track = par::map(tracks, |t| {
        track_samples(t, splits[&t.track_id], cfg, params)
    });
    let mut samples = Vec::new();
    for r in per_track {
        samples.extend(r?);
    }
    Ok(RoiDataset {
        meta: meta(cfg, params, seed, tracks.len()),
        samples,
    })
}

/// Processes a raw dataset directory written by
/// [`crate::signal_sim::write_dataset`], reading one track at a time.
/// Errors name the offending track.
pub fn build_from_dir(
    root: &Path,
    params: &PipelineParams,
    seed: u64,
) -> Result<RoiDataset, RoiError> {
    let index = read_index(root)?;
    if index.tracks.is_empty() {
        return Err(RoiError::NoTracks);
    }
    let cfg = &index.config;
    cfg.validate()?;
    let ids: Vec<_> = index
        .tracks
        .iter()
        .map(|e| (e.track_id, e.category))
        .collect();
    let splits = split_tracks(&ids, seed);
    let per_track = par::map(&index.tracks, |e| -> Result<Vec<RoiSample>, RoiError> {
        let t = read_track(&root.join(&e.dir))?;
        if t.track_id != e.track_id || t.category != e.category {
            return Err(RoiError::Format(format!(
                "track {}: directory {} holds track {} ({})",
                e.track_id, e.dir, t.track_id, t.category
            )));
        }
        track_samples(&t, splits[&e.track_id], cfg, params)
            .map_err(|err| RoiError::Format(format!("track {}: {err}", e.track_id)))
    });
    let mut samples = Vec::new();
    for r in per_track {
        samples.extend(r?);
    }
    Ok(RoiDataset {
        meta: meta(cfg, params, seed, index.tracks.len()),
        samples,
    })
}

/// Simulates and processes a dataset track by track without keeping raw
/// frames around. Produces the same samples as generating the tracks and
/// calling [`build_dataset`] with the same seed.
pub fn build_from_simulation(
    counts: &TrackCounts,
    cfg: &RadarConfig,
    scenario: &ScenarioParams,
    params: &PipelineParams,
    seed: u64,
) -> Result<RoiDataset, RoiError> {
    counts.validate()?;
    cfg.validate()?;
    let plan = crate::signal_sim::dataset::track_plan(counts);
    let splits = split_tracks(&plan, seed);
    let per_track = par::map(&plan, |&(id, cat)| -> Result<Vec<RoiSample>, RoiError> {
        let t = generate_track(id, cat, cfg, scenario, seed)?;
        track_samples(&t, splits[&id], cfg, params)
    });
    let mut samples = Vec::new();
    for r in per_track {
        samples.extend(r?);
    }
    Ok(RoiDataset {
        meta: meta(cfg, params, seed, plan.len()),
        samples,
    })
}

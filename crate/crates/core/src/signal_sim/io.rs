//! On-disk raw dataset: one directory per track holding `meta.json` and
//! one binary file per frame.
//!
//! Frame files start with a fixed 32-byte little-endian header:
//!
//! | offset | size | field                                  |
//! |--------|------|----------------------------------------|
//! | 0      | 6    | magic `RRNAS1`                         |
//! | 6      | 2    | format version (1)                     |
//! | 8      | 4    | n_samples                              |
//! | 12     | 4    | n_chirps                               |
//! | 16     | 4    | n_antennas                             |
//! | 20     | 4    | dtype code (1 = complex f32, re/im)    |
//! | 24     | 8    | reserved, zero                         |
//!
//! followed by `n_samples * n_chirps * n_antennas` interleaved `(re, im)`
//! f32 pairs in sample-major order (antenna fastest).

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use super::dataset::track_plan;
use super::{
    generate_track, RadarConfig, RawFrame, ScenarioParams, SceneObject, SimError, TrackCounts,
    TrackRecording,
};
use crate::{par, Category};

pub const FRAME_MAGIC: &[u8; 6] = b"RRNAS1";
pub const FRAME_HEADER_LEN: usize = 32;
pub const DTYPE_COMPLEX_F32: u32 = 1;
const VERSION: u16 = 1;

pub fn encode_frame(frame: &RawFrame) -> Vec<u8> {
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + frame.iq.len() * 8);
    out.extend_from_slice(FRAME_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in [frame.n_samples, frame.n_chirps, frame.n_antennas] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&DTYPE_COMPLEX_F32.to_le_bytes());
    out.extend_from_slice(&[0u8; 8]);
    for z in &frame.iq {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

/// Decodes a frame file. `truth` is left empty; it lives in `meta.json`.
pub fn decode_frame(bytes: &[u8]) -> Result<RawFrame, String> {
    if bytes.len() < FRAME_HEADER_LEN {
        return Err(format!("file too short for header ({} bytes)", bytes.len()));
    }
    if &bytes[..6] != FRAME_MAGIC {
        return Err("bad magic".into());
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let version = u16::from_le_bytes([bytes[6], bytes[7]]);
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let (ns, nc, na) = (u32_at(8), u32_at(12), u32_at(16));
    if u32_at(20) != DTYPE_COMPLEX_F32 as usize {
        return Err(format!("unsupported dtype code {}", u32_at(20)));
    }
    let n = ns * nc * na;
    let payload = &bytes[FRAME_HEADER_LEN..];
    if payload.len() != n * 8 {
        return Err(format!(
            "payload has {} bytes, expected {}",
            payload.len(),
            n * 8
        ));
    }
    let iq = payload
        .chunks_exact(8)
        .map(|c| {
            Complex32::new(
                f32::from_le_bytes(c[..4].try_into().unwrap()),
                f32::from_le_bytes(c[4..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(RawFrame {
        n_samples: ns,
        n_chirps: nc,
        n_antennas: na,
        iq,
        truth: Vec::new(),
    })
}

/// Per-track metadata record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackMeta {
    pub track_id: u32,
    pub category: Category,
    pub scenario_tag: String,
    pub n_frames: usize,
    pub config: RadarConfig,
    /// Ground-truth objects per frame; the first entry is the labeled one.
    pub truth: Vec<Vec<SceneObject>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub format: String,
    pub config: RadarConfig,
    pub seed: u64,
    pub tracks: Vec<IndexEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexEntry {
    pub track_id: u32,
    pub category: Category,
    pub dir: String,
}

fn track_dir_name(id: u32) -> String {
    format!("track_{id:05}")
}

fn frame_file_name(i: usize) -> String {
    format!("frame_{i:04}.bin")
}

/// Writes one track below `root`.
pub fn write_track(root: &Path, track: &TrackRecording, cfg: &RadarConfig) -> Result<(), SimError> {
    let dir = root.join(track_dir_name(track.track_id));
    fs::create_dir_all(&dir)?;
    let meta = TrackMeta {
        track_id: track.track_id,
        category: track.category,
        scenario_tag: track.scenario_tag.clone(),
        n_frames: track.frames.len(),
        config: cfg.clone(),
        truth: track.frames.iter().map(|f| f.truth.clone()).collect(),
    };
    fs::write(dir.join("meta.json"), serde_json::to_vec_pretty(&meta)?)?;
    for (i, f) in track.frames.iter().enumerate() {
        let mut file = fs::File::create(dir.join(frame_file_name(i)))?;
        file.write_all(&encode_frame(f))?;
    }
    Ok(())
}

pub fn write_index(
    root: &Path,
    cfg: &RadarConfig,
    seed: u64,
    tracks: &[(u32, Category)],
) -> Result<(), SimError> {
    fs::create_dir_all(root)?;
    let index = DatasetIndex {
        format: "RRNAS1".into(),
        config: cfg.clone(),
        seed,
        tracks: tracks
            .iter()
            .map(|&(track_id, category)| IndexEntry {
                track_id,
                category,
                dir: track_dir_name(track_id),
            })
            .collect(),
    };
    fs::write(
        root.join("dataset.json"),
        serde_json::to_vec_pretty(&index)?,
    )?;
    Ok(())
}

/// Writes a whole dataset: `dataset.json` plus one directory per track.
pub fn write_dataset(
    root: &Path,
    tracks: &[TrackRecording],
    cfg: &RadarConfig,
    seed: u64,
) -> Result<(), SimError> {
    let ids: Vec<_> = tracks.iter().map(|t| (t.track_id, t.category)).collect();
    write_index(root, cfg, seed, &ids)?;
    for t in tracks {
        write_track(root, t, cfg)?;
    }
    Ok(())
}

/// Simulates and writes a dataset one track at a time, so only the tracks
/// in flight are held in memory. Produces the same files as
/// [`generate_dataset`](super::generate_dataset) followed by [`write_dataset`].
pub fn simulate_to_dir(
    root: &Path,
    counts: &TrackCounts,
    cfg: &RadarConfig,
    params: &ScenarioParams,
    seed: u64,
) -> Result<(), SimError> {
    counts.validate()?;
    cfg.validate()?;
    let plan = track_plan(counts);
    write_index(root, cfg, seed, &plan)?;
    par::map(&plan, |&(id, cat)| {
        write_track(root, &generate_track(id, cat, cfg, params, seed)?, cfg)
    })
    .into_iter()
    .collect()
}

pub fn read_index(root: &Path) -> Result<DatasetIndex, SimError> {
    let bytes = fs::read(root.join("dataset.json"))?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Reads one track directory, reporting the offending track/frame on
/// corrupt input.
pub fn read_track(track_dir: &Path) -> Result<TrackRecording, SimError> {
    let meta_path = track_dir.join("meta.json");
    let meta: TrackMeta = serde_json::from_slice(&fs::read(&meta_path)?)
        .map_err(|e| SimError::Format(format!("{}: {e}", meta_path.display())))?;
    if meta.truth.len() != meta.n_frames {
        return Err(SimError::Format(format!(
            "track {}: truth has {} frames, meta says {}",
            meta.track_id,
            meta.truth.len(),
            meta.n_frames
        )));
    }
    let mut frames = Vec::with_capacity(meta.n_frames);
    for (i, truth) in meta.truth.into_iter().enumerate() {
        let path: PathBuf = track_dir.join(frame_file_name(i));
        let mut bytes = Vec::new();
        fs::File::open(&path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| SimError::Format(format!("track {} frame {i}: {e}", meta.track_id)))?;
        let mut frame = decode_frame(&bytes)
            .map_err(|e| SimError::Format(format!("track {} frame {i}: {e}", meta.track_id)))?;
        if !frame.matches(&meta.config) {
            return Err(SimError::Format(format!(
                "track {} frame {i}: dimensions do not match the configuration",
                meta.track_id
            )));
        }
        frame.truth = truth;
        frames.push(frame);
    }
    Ok(TrackRecording {
        track_id: meta.track_id,
        category: meta.category,
        frames,
        scenario_tag: meta.scenario_tag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_sim::{generate_track, ScenarioParams};

    #[test]
    fn frame_header_layout() {
        let cfg = RadarConfig {
            n_samples: 4,
            n_chirps: 3,
            n_antennas: 2,
            ..RadarConfig::default()
        };
        let mut f = RawFrame::zeros(&cfg);
        f.iq[5] = Complex32::new(1.5, -2.0);
        let b = encode_frame(&f);
        assert_eq!(b.len(), 32 + 24 * 8);
        assert_eq!(&b[..6], b"RRNAS1");
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 4);
        assert_eq!(u32::from_le_bytes(b[20..24].try_into().unwrap()), 1);
        assert_eq!(
            f32::from_le_bytes(b[32 + 40..32 + 44].try_into().unwrap()),
            1.5
        );
        let back = decode_frame(&b).unwrap();
        assert_eq!(back.iq, f.iq);
        assert!(decode_frame(&b[..40]).is_err());
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(decode_frame(&bad).is_err());
    }

    #[test]
    fn track_round_trip_and_corruption_message() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RadarConfig {
            n_chirps: 16,
            n_antennas: 2,
            ..RadarConfig::desk()
        };
        let p = ScenarioParams {
            frames_per_track: 2,
            ego_speed_mps: (0.5, 0.8),
            ..Default::default()
        };
        let t = generate_track(4, Category::Overridable, &cfg, &p, 9).unwrap();
        write_dataset(dir.path(), std::slice::from_ref(&t), &cfg, 9).unwrap();
        let idx = read_index(dir.path()).unwrap();
        assert_eq!(idx.tracks.len(), 1);
        let back = read_track(&dir.path().join(&idx.tracks[0].dir)).unwrap();
        assert_eq!(back, t);

        let frame = dir.path().join("track_00004/frame_0001.bin");
        let bytes = fs::read(&frame).unwrap();
        fs::write(&frame, &bytes[..100]).unwrap();
        let err = read_track(&dir.path().join("track_00004"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("track 4 frame 1"), "{err}");
    }
}

//! Processed dataset file.
//!
//! Header (little-endian):
//!
//! | offset | size | field                                |
//! |--------|------|--------------------------------------|
//! | 0      | 6    | magic `ROIDS1`                       |
//! | 6      | 2    | version (1)                          |
//! | 8      | 8    | record count (u64)                   |
//! | 16     | 12   | train / val / test counts (3 × u32)  |
//! | 28     | 4    | ROI side length (u32)                |
//! | 32     | 4    | RCS vector length (u32)              |
//! | 36     | 4    | JSON length `n` (u32)                |
//! | 40     | n    | JSON config echo                     |
//!
//! Then fixed-size records: ROI as `side²` f32, RCS vector as f32s,
//! u8 label, u32 track id, u32 frame index, u8 split tag.

use std::fs;
use std::path::Path;

use super::{RoiDataset, RoiDatasetMeta, RoiError, RoiSample, Split};
use crate::Category;

pub const MAGIC: &[u8; 6] = b"ROIDS1";
const VERSION: u16 = 1;
const HEADER_FIXED: usize = 40;

pub fn record_len(side: usize, rcs_len: usize) -> usize {
    4 * side * side + 4 * rcs_len + 1 + 4 + 4 + 1
}

pub fn encode(ds: &RoiDataset) -> Result<Vec<u8>, RoiError> {
    let side = ds.meta.pipeline.roi.size;
    let rcs_len = ds.meta.pipeline.roi.rcs_len;
    let json = serde_json::to_vec(&ds.meta)?;
    let mut out = Vec::with_capacity(
        HEADER_FIXED + json.len() + ds.samples.len() * record_len(side, rcs_len),
    );
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(ds.samples.len() as u64).to_le_bytes());
    for sp in Split::ALL {
        let n = ds.samples.iter().filter(|s| s.split == sp).count() as u32;
        out.extend_from_slice(&n.to_le_bytes());
    }
    out.extend_from_slice(&(side as u32).to_le_bytes());
    out.extend_from_slice(&(rcs_len as u32).to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for s in &ds.samples {
        if s.roi.len() != side * side || s.rcs_vector.len() != rcs_len {
            return Err(RoiError::Format(format!(
                "sample of track {} frame {} has inconsistent tensor sizes",
                s.track_id, s.frame_index
            )));
        }
        for v in s.roi.iter().chain(&s.rcs_vector) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.push(s.category.index() as u8);
        out.extend_from_slice(&s.track_id.to_le_bytes());
        out.extend_from_slice(&s.frame_index.to_le_bytes());
        out.push(s.split.tag());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<RoiDataset, RoiError> {
    let bad = |m: &str| RoiError::Format(format!("ROIDS1: {m}"));
    if bytes.len() < HEADER_FIXED || &bytes[..6] != MAGIC {
        return Err(bad("missing header or bad magic"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    if u16::from_le_bytes([bytes[6], bytes[7]]) != VERSION {
        return Err(bad("unsupported version"));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let (side, rcs_len, json_len) = (u32_at(28), u32_at(32), u32_at(36));
    let body = HEADER_FIXED + json_len;
    if bytes.len() < body {
        return Err(bad("truncated config record"));
    }
    let meta: RoiDatasetMeta = serde_json::from_slice(&bytes[HEADER_FIXED..body])?;
    let rec = record_len(side, rcs_len);
    if bytes.len() != body + n * rec {
        return Err(bad(&format!(
            "expected {} record bytes, found {}",
            n * rec,
            bytes.len() - body
        )));
    }
    let f32s = |b: &[u8]| -> Vec<f32> {
        b.chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect()
    };
    let mut samples = Vec::with_capacity(n);
    for (i, r) in bytes[body..].chunks_exact(rec).enumerate() {
        let a = 4 * side * side;
        let b = a + 4 * rcs_len;
        let category = Category::from_index(r[b] as usize)
            .ok_or_else(|| bad(&format!("record {i}: bad label")))?;
        let split =
            Split::from_tag(r[b + 9]).ok_or_else(|| bad(&format!("record {i}: bad split tag")))?;
        let roi = f32s(&r[..a]);
        let rcs_vector = f32s(&r[a..b]);
        let n_reflections = rcs_vector
            .iter()
            .rposition(|&v| v != 0.0)
            .map_or(0, |p| p + 1);
        samples.push(RoiSample {
            roi,
            rcs_vector,
            n_reflections,
            category,
            track_id: u32::from_le_bytes(r[b + 1..b + 5].try_into().unwrap()),
            frame_index: u32::from_le_bytes(r[b + 5..b + 9].try_into().unwrap()),
            split,
        });
    }
    for (t, sp) in Split::ALL.iter().enumerate() {
        let declared = u32_at(16 + 4 * t);
        if samples.iter().filter(|s| s.split == *sp).count() != declared {
            return Err(bad("split counts disagree with records"));
        }
    }
    Ok(RoiDataset { meta, samples })
}

pub fn write(path: &Path, ds: &RoiDataset) -> Result<(), RoiError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, encode(ds)?)?;
    Ok(())
}

pub fn read(path: &Path) -> Result<RoiDataset, RoiError> {
    decode(&fs::read(path)?)
}

//! Checkpoints are a JSON header (`<stem>.json`) describing the
//! architecture and tensor layout, plus a raw little-endian `f32` blob
//! (`<stem>.bin`).

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::model::{Architecture, ModelGraph};
use super::train::EpochRecord;
use super::NnError;

const FORMAT: &str = "radarnas-checkpoint";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub version: u32,
    pub architecture: Architecture,
    pub n_params: usize,
    pub tensors: Vec<TensorEntry>,
    #[serde(default)]
    pub meta: serde_json::Value,
}

fn ck(e: impl std::fmt::Display) -> NnError {
    NnError::Checkpoint(e.to_string())
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

fn tensor_names(model: &ModelGraph<f32>) -> Vec<String> {
    let mut names = Vec::new();
    for (b, layers) in model.branches.iter().enumerate() {
        for (i, l) in layers.iter().enumerate() {
            if l.spec.is_parametric() {
                names.push(format!("branch{b}.layer{i}.weight"));
                names.push(format!("branch{b}.layer{i}.bias"));
            }
        }
    }
    for (i, l) in model.head.iter().enumerate() {
        if l.spec.is_parametric() {
            names.push(format!("head.layer{i}.weight"));
            names.push(format!("head.layer{i}.bias"));
        }
    }
    names
}

pub fn save(model: &ModelGraph<f32>, stem: &Path, meta: serde_json::Value) -> Result<(), NnError> {
    let mut blob = Vec::with_capacity(model.count_params() * 4);
    let mut tensors = Vec::new();
    let mut offset = 0;
    for (name, t) in tensor_names(model).into_iter().zip(model.params()) {
        for v in t {
            blob.extend_from_slice(&v.to_le_bytes());
        }
        tensors.push(TensorEntry {
            name,
            offset,
            len: t.len(),
        });
        offset += t.len();
    }
    let header = CheckpointHeader {
        format: FORMAT.into(),
        version: VERSION,
        architecture: model.arch.clone(),
        n_params: offset,
        tensors,
        meta,
    };
    let (json, bin) = paths(stem);
    if let Some(dir) = json.parent() {
        fs::create_dir_all(dir).map_err(ck)?;
    }
    fs::write(&json, serde_json::to_vec_pretty(&header).map_err(ck)?).map_err(ck)?;
    fs::write(&bin, blob).map_err(ck)?;
    Ok(())
}

pub fn load(stem: &Path) -> Result<(ModelGraph<f32>, CheckpointHeader), NnError> {
    let (json, bin) = paths(stem);
    let header: CheckpointHeader = serde_json::from_slice(
        &fs::read(&json).map_err(|e| ck(format!("{}: {e}", json.display())))?,
    )
    .map_err(ck)?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(ck(format!(
            "unsupported checkpoint {} v{}",
            header.format, header.version
        )));
    }
    let blob = fs::read(&bin).map_err(|e| ck(format!("{}: {e}", bin.display())))?;
    if blob.len() != header.n_params * 4 {
        return Err(ck(format!(
            "weight blob has {} bytes, header declares {} parameters",
            blob.len(),
            header.n_params
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let mut model = ModelGraph::<f32>::new(&header.architecture, &mut rng)?;
    let params = model.params_mut();
    if params.len() != header.tensors.len() {
        return Err(ck("tensor table does not match the architecture"));
    }
    for (p, entry) in params.into_iter().zip(&header.tensors) {
        if p.len() != entry.len || entry.offset + entry.len > header.n_params {
            return Err(ck(format!(
                "tensor {} has an inconsistent size",
                entry.name
            )));
        }
        for (i, v) in p.iter_mut().enumerate() {
            let at = (entry.offset + i) * 4;
            *v = f32::from_le_bytes(blob[at..at + 4].try_into().unwrap());
        }
    }
    Ok((model, header))
}

pub fn write_history_csv(path: &Path, history: &[EpochRecord]) -> Result<(), NnError> {
    let mut s = String::from("epoch,train_loss,val_mean_acc\n");
    for r in history {
        s.push_str(&format!(
            "{},{},{}\n",
            r.epoch, r.train_loss, r.val_mean_acc
        ));
    }
    fs::write(path, s).map_err(ck)
}

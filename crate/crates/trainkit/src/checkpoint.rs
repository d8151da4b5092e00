//! Binary parameter blobs with a JSON sidecar.
//!
//! Blob layout: magic `CFCK`, u32 LE version, u64 LE parameter count, then
//! the parameters as f64 LE.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::TrainError;
use crate::model::{ModelConfig, PolicyModel};
use crate::schedule::Phase;

const MAGIC: &[u8; 4] = b"CFCK";
pub const BLOB_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub name: String,
    pub blob_version: u32,
    pub config_hash: String,
    pub model: ModelConfig,
    pub phase: Phase,
    pub round: usize,
    pub metrics: BTreeMap<String, f64>,
    pub sha256: String,
}

/// `f_SL_0`, `f_VF_2`, ...
pub fn checkpoint_name(phase: Phase, round: usize) -> String {
    format!("f_{phase}_{round}")
}

pub fn encode(params: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + params.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&BLOB_VERSION.to_le_bytes());
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Vec<f64>, TrainError> {
    let bad = |m: &str| TrainError::Checkpoint(m.to_string());
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(bad("not a checkpoint blob"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != BLOB_VERSION {
        return Err(bad(&format!("unsupported blob version {version}")));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    if body.len() != count * 8 {
        return Err(bad("blob length does not match parameter count"));
    }
    Ok(body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn params_hash(params: &[f64]) -> String {
    hex::encode(Sha256::digest(encode(params)))
}

/// Writes `<dir>/<name>.bin` and `<dir>/<name>.json`.
pub fn save(dir: &Path, model: &PolicyModel, mut sidecar: Sidecar) -> Result<PathBuf, TrainError> {
    fs::create_dir_all(dir)?;
    let blob = encode(model.params());
    sidecar.sha256 = hex::encode(Sha256::digest(&blob));
    sidecar.model = model.config().clone();
    let path = dir.join(format!("{}.bin", sidecar.name));
    fs::write(&path, &blob)?;
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| TrainError::Checkpoint(e.to_string()))?;
    fs::write(dir.join(format!("{}.json", sidecar.name)), json)?;
    Ok(path)
}

/// Loads a checkpoint by name and verifies its hash.
pub fn load(dir: &Path, name: &str) -> Result<(PolicyModel, Sidecar), TrainError> {
    let json = fs::read_to_string(dir.join(format!("{name}.json")))?;
    let sidecar: Sidecar = serde_json::from_str(&json).map_err(|e| TrainError::Checkpoint(e.to_string()))?;
    let blob = fs::read(dir.join(format!("{name}.bin")))?;
    if hex::encode(Sha256::digest(&blob)) != sidecar.sha256 {
        return Err(TrainError::Checkpoint(format!("{name}: hash mismatch")));
    }
    let model = PolicyModel::from_params(sidecar.model.clone(), decode(&blob)?)?;
    Ok((model, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> PolicyModel {
        PolicyModel::new(ModelConfig { vocab: 8, d_model: 4, layers: 1, heads: 2, d_ff: 4, context: 4 }, 3).unwrap()
    }

    fn sidecar() -> Sidecar {
        Sidecar {
            name: checkpoint_name(Phase::Vf, 2),
            blob_version: BLOB_VERSION,
            config_hash: "abc".into(),
            model: model().config().clone(),
            phase: Phase::Vf,
            round: 2,
            metrics: BTreeMap::from([("loss".to_string(), 0.5)]),
            sha256: String::new(),
        }
    }

    #[test]
    fn blob_round_trip() {
        let p = [1.5, -0.0, f64::MIN_POSITIVE, 3e300];
        assert_eq!(decode(&encode(&p)).unwrap(), p);
        let mut bad = encode(&p);
        bad.pop();
        assert!(decode(&bad).is_err());
        assert!(decode(b"nope").is_err());
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let m = model();
        save(dir.path(), &m, sidecar()).unwrap();
        let (back, side) = load(dir.path(), "f_VF_2").unwrap();
        assert_eq!(back, m);
        assert_eq!(side.sha256, params_hash(m.params()));
        fs::write(dir.path().join("f_VF_2.bin"), encode(&[0.0])).unwrap();
        assert!(matches!(load(dir.path(), "f_VF_2"), Err(TrainError::Checkpoint(_))));
    }

    #[test]
    fn names() {
        assert_eq!(checkpoint_name(Phase::Sl, 0), "f_SL_0");
    }
}

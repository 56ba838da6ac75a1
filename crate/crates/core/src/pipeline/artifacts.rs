use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::StageFailure;
use crate::conditioning::{encode_png, ConditioningFrame};
use crate::landmarks::{parse_sequence, serialize_sequence, PoseSequence};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Writes through a sibling `.partial` file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

pub fn read_sequence(path: &Path) -> Result<PoseSequence, StageFailure> {
    let bytes = fs::read(path).map_err(|e| StageFailure::Read(path.to_owned(), e))?;
    Ok(parse_sequence(&bytes)?)
}

pub fn write_sequence_file(path: &Path, seq: &PoseSequence) -> std::io::Result<()> {
    write_atomic(path, &serialize_sequence(seq))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), StageFailure> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(write_atomic(path, &bytes)?)
}

/// Face-mesh indices from a JSON array file.
pub fn read_rigid_face(path: &Path) -> Result<Vec<usize>, StageFailure> {
    let bytes = fs::read(path).map_err(|e| StageFailure::Read(path.to_owned(), e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

pub fn frame_file_name(prefix: &str, frame_index: u64, ext: &str) -> String {
    format!("{prefix}_{frame_index:06}.{ext}")
}

/// `ccbr_NNNNNN.png` and `gaze_NNNNNN.png` per frame, plus `cond_NNNNNN.raw`
/// when `raw` is set.
pub fn write_conditioning(dir: &Path, frames: &[ConditioningFrame], raw: bool) -> Result<(), StageFailure> {
    for f in frames {
        write_atomic(&dir.join(frame_file_name("ccbr", f.frame_index, "png")), &encode_png(&f.ccbr)?)?;
        write_atomic(&dir.join(frame_file_name("gaze", f.frame_index, "png")), &encode_png(&f.gaze)?)?;
        if raw {
            write_atomic(&dir.join(frame_file_name("cond", f.frame_index, "raw")), &f.to_raw())?;
        }
    }
    Ok(())
}

/// Hashes of every file under `root`, keyed by `/`-separated relative path.
pub fn hash_tree(root: &Path) -> std::io::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_owned()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).expect("walked from root");
                let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
                out.insert(key, hash_file(&path)?);
            }
        }
    }
    Ok(out)
}

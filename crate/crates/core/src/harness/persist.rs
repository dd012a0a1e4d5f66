//! Byte-deterministic artifact files: pretty JSON hashed with SHA-256 over
//! the file bytes. A transcript file hashes to `Transcript::hash`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::forcing::{sha256_hex, Transcript};
use crate::omega_model::CodedModelApprox;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed at line {line}, column {column}: {message}")]
    Structure { path: PathBuf, line: usize, column: usize, message: String },
}

pub fn to_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec_pretty(value).expect("artifact serializes")
}

/// Writes `value` to `path` and returns the hash of the written bytes.
pub fn emit<T: Serialize>(value: &T, path: &Path) -> Result<String, PersistError> {
    let bytes = to_bytes(value);
    fs::write(path, &bytes).map_err(|source| PersistError::Write { path: path.to_path_buf(), source })?;
    Ok(sha256_hex(&bytes))
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, PersistError> {
    let text = fs::read_to_string(path).map_err(|source| PersistError::Read { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| PersistError::Structure {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn emit_transcript(t: &Transcript, path: &Path) -> Result<String, PersistError> {
    emit(t, path)
}

pub fn load_transcript(path: &Path) -> Result<Transcript, PersistError> {
    load(path)
}

pub fn emit_model(m: &CodedModelApprox, path: &Path) -> Result<String, PersistError> {
    emit(m, path)
}

pub fn load_model(path: &Path) -> Result<CodedModelApprox, PersistError> {
    load(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::SetPresentation;
    use crate::forcing::{run_coh, CohSchedule, ForcingConfig, SelectionRule};
    use crate::omega_model::{build_model, ModelConfig};

    fn transcript() -> Transcript {
        let family = vec![SetPresentation::evens(64), SetPresentation::primes(64)];
        let cfg = ForcingConfig::default().without_models();
        run_coh(&family, 64, 12, &cfg, CohSchedule::RoundRobin, SelectionRule::Pi2Search).unwrap().transcript
    }

    #[test]
    fn transcript_round_trip_and_stable_hash() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
        let t = transcript();
        let ha = emit_transcript(&t, &a).unwrap();
        let hb = emit_transcript(&transcript(), &b).unwrap();
        assert_eq!(ha, hb);
        assert_eq!(ha, t.hash());
        assert_eq!(load_transcript(&a).unwrap(), t);
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }

    #[test]
    fn corrupted_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        emit_transcript(&transcript(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap().replacen("\"stages\"", "\"stagez\"", 1);
        fs::write(&path, text).unwrap();
        assert!(matches!(load_transcript(&path), Err(PersistError::Structure { .. })));
        fs::write(&path, "{\"header\": [").unwrap();
        let err = load_transcript(&path).unwrap_err();
        assert!(matches!(err, PersistError::Structure { line: 1, .. }), "{err}");
    }

    #[test]
    fn unwritable_destination() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("t.json");
        assert!(matches!(emit_transcript(&transcript(), &path), Err(PersistError::Write { .. })));
    }

    #[test]
    fn model_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let m = build_model(&SetPresentation::evens(64), 40, false, ModelConfig::default()).unwrap();
        emit_model(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
    }
}

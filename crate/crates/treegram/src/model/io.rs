//! Versioned binary model container.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::CountTable;
use crate::tgram::ExtractionConfig;
use crate::treebank::TagLexicon;

const MAGIC: &[u8; 4] = b"TGRM";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model version {0} (expected {VERSION})")]
    Version(u32),
    #[error("truncated model file")]
    Truncated,
    #[error("model payload corrupt: {0}")]
    Corrupt(String),
}

/// Training settings the parser must replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub prehead_order: u8,
    pub markov: bool,
    pub unknown_threshold: u64,
    pub extraction: ExtractionConfig,
}

/// Everything a parse run needs: counts, lexicon and the training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub meta: TrainMeta,
    pub lexicon: TagLexicon,
    pub table: CountTable,
}

/// Serialize with a magic/version header. Byte-identical for equal models.
pub fn save_model(model: &ModelFile) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let payload = bincode::serialize(model).expect("model serialization cannot fail");
    out.extend_from_slice(&payload);
    out
}

pub fn load_model(bytes: &[u8]) -> Result<ModelFile, ModelError> {
    if bytes.len() < 8 {
        return Err(ModelError::Truncated);
    }
    if &bytes[0..4] != MAGIC {
        return Err(ModelError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(ModelError::Version(version));
    }
    bincode::deserialize(&bytes[8..]).map_err(|e| match *e {
        bincode::ErrorKind::Io(_) => ModelError::Truncated,
        other => ModelError::Corrupt(other.to_string()),
    })
}

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SequenceModel;
use crate::ensemble::{MetaLearner, WeightVector};
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "blendcast-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StoredModel {
    Sequence(SequenceModel),
    MetaLearner(MetaLearner),
    WeightedAverage(WeightVector),
}

impl StoredModel {
    fn validate(&self) -> Result<()> {
        match self {
            StoredModel::Sequence(m) => m.validate(),
            StoredModel::MetaLearner(m) => m.validate(),
            StoredModel::WeightedAverage(w) => WeightVector::new(w.as_slice().to_vec()).map(|_| ()),
        }
    }
}

/// On-disk envelope. Floats are written in shortest round-trip form, so a
/// save/load cycle reproduces every parameter bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub model: StoredModel,
}

impl From<StoredModel> for ModelDocument {
    fn from(model: StoredModel) -> Self {
        ModelDocument {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_FORMAT_VERSION,
            model,
        }
    }
}

pub fn save_model(model: &StoredModel, path: &Path) -> Result<()> {
    let doc = ModelDocument::from(model.clone());
    let json = serde_json::to_vec_pretty(&doc)?;
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(&json).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<StoredModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let doc: ModelDocument = serde_json::from_slice(&bytes).map_err(|e| Error::Data {
        path: path.display().to_string(),
        message: format!("not a model document: {e}"),
    })?;
    if doc.format != MODEL_FORMAT {
        return Err(Error::Data {
            path: path.display().to_string(),
            message: format!("unexpected format `{}`", doc.format),
        });
    }
    if doc.version != MODEL_FORMAT_VERSION {
        return Err(Error::Data {
            path: path.display().to_string(),
            message: format!("unsupported model version {}", doc.version),
        });
    }
    doc.model.validate()?;
    Ok(doc.model)
}

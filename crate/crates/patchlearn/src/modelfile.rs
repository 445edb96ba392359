//! Versioned JSON documents for trained patch-learning models.
//!
//! ```json
//! {
//!   "format": "patchlearn-model",
//!   "version": 1,
//!   "model": {
//!     "patches": [ { "patch_box": {..}, "model": { "kind": "tsk", .. }, "examples": 73 } ],
//!     "global": { "kind": "tsk", "mfs": [[{"a":..,"b":..,"c":..,"d":..}]], "rules": [..], "input_ranges": [..] },
//!     "global_update": { "status": "refit", "examples": 421 },
//!     "alpha": 0.25, "training_rmse": .., "loss": .., "stage_rmse": [..], "skipped": [..]
//!   }
//! }
//! ```
//!
//! Patches are stored in routing order. Models are tagged by `kind`: `tsk`,
//! `polynomial`, `tree` or `ensemble`. Floats are written in shortest
//! round-trip form, so a loaded model predicts bit-for-bit like the saved one.

use std::fs;
use std::path::Path;

use patchlearn_core::{PlModel, TrainedModel};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const FORMAT_TAG: &str = "patchlearn-model";
pub const FORMAT_VERSION: u64 = 1;

pub type SavedModel = PlModel<TrainedModel, TrainedModel>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u64,
    pub model: SavedModel,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u64,
}

impl ModelFile {
    pub fn new(model: SavedModel) -> Self {
        Self { format: FORMAT_TAG.to_string(), version: FORMAT_VERSION, model }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        // The header is checked first so an unknown version is reported as
        // such rather than as whatever field changed shape.
        if let Ok(h) = serde_json::from_str::<Header>(text) {
            if h.format != FORMAT_TAG {
                return Err(HarnessError::Format { expected: FORMAT_TAG, found: h.format });
            }
            if h.version != FORMAT_VERSION {
                return Err(HarnessError::Version { found: h.version, supported: FORMAT_VERSION });
            }
        }
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            HarnessError::Parse { path, message: e.into_inner().to_string() }
        })
    }
}

pub fn save_model(model: &SavedModel, path: &Path) -> Result<()> {
    let text = ModelFile::new(model.clone()).to_json();
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<SavedModel> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(ModelFile::from_json(&text)?.model)
}

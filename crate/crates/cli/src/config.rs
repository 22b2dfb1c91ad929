use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use headfit::raster::{ImageSize, RasterConfig};

/// A command configuration together with the top-level keys the file set.
#[derive(Clone, Debug)]
pub struct Loaded<T> {
    pub value: T,
    pub keys: BTreeSet<String>,
}

impl<T> Loaded<T> {
    pub fn has(&self, key: &str) -> bool {
        self.keys.contains(key)
    }
}

/// Parses a JSON config, rejecting unknown keys; defaults when `path` is
/// `None`. Errors name the offending key path.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<Loaded<T>> {
    let Some(path) = path else {
        return Ok(Loaded { value: T::default(), keys: BTreeSet::new() });
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let raw: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let keys = match &raw {
        serde_json::Value::Object(map) => map.keys().cloned().collect(),
        _ => return Err(CliError::config(format!("{}: top level must be a JSON object", path.display()))),
    };
    let value = serde_path_to_error::deserialize(raw).map_err(|e| {
        let key = e.path().to_string();
        CliError::config(format!("{}: key `{key}`: {}", path.display(), e.inner()))
    })?;
    Ok(Loaded { value, keys })
}

/// Maps a validation failure to a configuration error.
pub fn validated<T>(r: headfit::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::config(e.to_string()))
}

/// Hex SHA-256 of the canonical JSON of an effective configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("configs serialise");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Settings of `render`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    pub image_size: ImageSize,
    pub raster: RasterConfig,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            image_size: ImageSize { height: 128, width: 128 },
            raster: RasterConfig::default(),
        }
    }
}

/// Settings of `eval`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub iou_threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { iou_threshold: 0.5 }
    }
}

/// Settings of `distill`, `reconstruct` and `edit`, which take no options
/// beyond their flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmptyConfig {}

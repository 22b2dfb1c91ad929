//! File formats: OBJ meshes, PGM/PNG masks, little-endian `f32` arrays,
//! JSON configs, and model, field and basis containers.

mod basis_dir;
mod field;
mod mask;
mod model_dir;
mod obj;

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub use basis_dir::{load_basis_dir, save_basis_dir, BasisManifest};
pub use field::{read_field, write_field, FIELD_MAGIC, FIELD_VERSION};
pub use mask::{read_mask, read_pgm, read_png, write_mask, write_pgm, write_png};
pub use model_dir::{load_model_dir, save_model_dir, ModelManifest};
pub use obj::{load_mesh, read_obj, read_regions, write_obj, write_regions, ObjData};

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(io_err(path))
}

/// Writes `bytes`, creating parent directories as needed.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push(b'\n');
    write_bytes(path, &text)
}

/// Values narrowed to `f32` and written little-endian.
pub fn write_f32_le(path: &Path, values: impl IntoIterator<Item = f64>) -> Result<()> {
    let bytes: Vec<u8> = values.into_iter().flat_map(|v| (v as f32).to_le_bytes()).collect();
    write_bytes(path, &bytes)
}

/// Reads exactly `expected` little-endian `f32` values.
pub fn read_f32_le(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let bytes = read_bytes(path)?;
    if bytes.len() != 4 * expected {
        return Err(Error::Format {
            format: "f32 array",
            path: path.to_path_buf(),
            message: format!("expected {} bytes ({expected} values), found {}", 4 * expected, bytes.len()),
        });
    }
    Ok(bytes.chunks_exact(4).map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]]))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f32_arrays_round_trip_and_check_length() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/a.bin");
        write_f32_le(&p, [1.0, -2.5, 1e-3]).unwrap();
        let back = read_f32_le(&p, 3).unwrap();
        assert_eq!(back, vec![1.0, -2.5, f64::from(1e-3f32)]);
        assert!(read_f32_le(&p, 4).is_err());
    }

    #[test]
    fn json_errors_name_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        write_bytes(&p, b"{").unwrap();
        let err = read_json::<serde_json::Value>(&p).unwrap_err();
        assert!(err.to_string().contains("bad.json"));
    }
}

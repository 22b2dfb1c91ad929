use std::path::Path;

use super::{read_bytes, write_bytes};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub const FIELD_MAGIC: &[u8; 4] = b"OFLD";
pub const FIELD_VERSION: u32 = 1;

/// Per-vertex displacement field: magic, `u32` version, then N×3
/// little-endian `f32` row-major.
pub fn write_field(path: &Path, field: &[Vec3]) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 + 12 * field.len());
    bytes.extend_from_slice(FIELD_MAGIC);
    bytes.extend_from_slice(&FIELD_VERSION.to_le_bytes());
    for v in field {
        for x in v.iter() {
            bytes.extend_from_slice(&(*x as f32).to_le_bytes());
        }
    }
    write_bytes(path, &bytes)
}

pub fn read_field(path: &Path) -> Result<Vec<Vec3>> {
    let bytes = read_bytes(path)?;
    let err = |message: String| Error::Format {
        format: "offset field",
        path: path.to_path_buf(),
        message,
    };
    if bytes.len() < 8 || &bytes[..4] != FIELD_MAGIC {
        return Err(err("missing OFLD header".into()));
    }
    let version = u32::from_le_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]);
    if version != FIELD_VERSION {
        return Err(err(format!("unsupported version {version}")));
    }
    let body = &bytes[8..];
    if body.len() % 12 != 0 {
        return Err(err(format!("payload of {} bytes is not a whole number of rows", body.len())));
    }
    let f = |c: &[u8]| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]]));
    Ok(body.chunks_exact(12).map(|r| Vec3::new(f(&r[0..4]), f(&r[4..8]), f(&r[8..12]))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_at_f32(rows in prop::collection::vec(prop::array::uniform3(-1e3f64..1e3), 0..40)) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("f.bin");
            let field: Vec<Vec3> = rows.iter().map(|r| Vec3::from(*r)).collect();
            write_field(&p, &field).unwrap();
            let back = read_field(&p).unwrap();
            prop_assert_eq!(back.len(), field.len());
            for (a, b) in back.iter().zip(&field) {
                prop_assert_eq!(a.map(|x| x as f32), b.map(|x| x as f32));
            }
        }
    }

    #[test]
    fn header_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.bin");
        write_field(&p, &[Vec3::new(1.0, 2.0, 3.0)]).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..8], b"OFLD\x01\0\0\0");
        assert_eq!(bytes.len(), 20);
        write_bytes(&p, &bytes[..19]).unwrap();
        assert!(read_field(&p).is_err());
        write_bytes(&p, b"OFLD\x02\0\0\0").unwrap();
        assert!(read_field(&p).unwrap_err().to_string().contains("version 2"));
    }
}

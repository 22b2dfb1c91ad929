use std::path::Path;

use super::{read_bytes, write_bytes};
use crate::error::{Error, Result};
use crate::raster::{ImageSize, SilhouetteImage};

fn pgm_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        format: "PGM",
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Binary (P5) 8-bit PGM.
pub fn write_pgm(path: &Path, image: &SilhouetteImage) -> Result<()> {
    let mut bytes = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    bytes.extend(image.to_u8());
    write_bytes(path, &bytes)
}

/// Reads binary (P5) or ASCII (P2) PGM with any maxval up to 65535.
pub fn read_pgm(path: &Path) -> Result<SilhouetteImage> {
    let bytes = read_bytes(path)?;
    let mut pos = 0;
    let mut token = |bytes: &[u8]| -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(pgm_err(path, "truncated header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token(&bytes)?;
    let mut number = |name: &str| -> Result<usize> {
        let t = token(&bytes)?;
        t.parse().map_err(|_| pgm_err(path, format!("bad {name} {t:?}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(pgm_err(path, format!("maxval {maxval} outside 1..=65535")));
    }
    let size = ImageSize::new(height, width).map_err(|e| pgm_err(path, e.to_string()))?;
    let count = size.pixel_count();
    let values: Vec<usize> = match magic.as_str() {
        "P5" => {
            let data = &bytes[(pos + 1).min(bytes.len())..];
            let wide = maxval > 255;
            let need = count * if wide { 2 } else { 1 };
            if data.len() < need {
                return Err(pgm_err(path, format!("expected {need} bytes of pixels, found {}", data.len())));
            }
            if wide {
                data[..need].chunks_exact(2).map(|c| usize::from(u16::from_be_bytes([c[0], c[1]]))).collect()
            } else {
                data[..need].iter().map(|&b| usize::from(b)).collect()
            }
        }
        "P2" => (0..count).map(|_| number("pixel")).collect::<Result<_>>()?,
        other => return Err(pgm_err(path, format!("unsupported magic {other:?}"))),
    };
    if let Some(v) = values.iter().find(|&&v| v > maxval) {
        return Err(pgm_err(path, format!("pixel value {v} exceeds maxval {maxval}")));
    }
    SilhouetteImage::new(size, values.into_iter().map(|v| v as f64 / maxval as f64).collect())
}

pub fn write_png(path: &Path, image: &SilhouetteImage) -> Result<()> {
    let buf = image::GrayImage::from_raw(image.width() as u32, image.height() as u32, image.to_u8())
        .expect("buffer matches dimensions");
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(super::io_err(parent))?;
    }
    buf.save_with_format(path, image::ImageFormat::Png).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_png(path: &Path) -> Result<SilhouetteImage> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let gray = img.into_luma8();
    let size = ImageSize::new(gray.height() as usize, gray.width() as usize)?;
    SilhouetteImage::from_u8(size, gray.as_raw())
}

fn is_png(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// PNG for `.png` paths, PGM otherwise.
pub fn read_mask(path: &Path) -> Result<SilhouetteImage> {
    if is_png(path) {
        read_png(path)
    } else {
        read_pgm(path)
    }
}

/// PNG for `.png` paths, PGM otherwise.
pub fn write_mask(path: &Path, image: &SilhouetteImage) -> Result<()> {
    if is_png(path) {
        write_png(path, image)
    } else {
        write_pgm(path, image)
    }
}

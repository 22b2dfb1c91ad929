use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::Vec2;

/// Image dimensions in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageSize {
    pub height: usize,
    pub width: usize,
}

impl ImageSize {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidArgument(format!(
                "image size must be at least 1x1, got {height}x{width}"
            )));
        }
        Ok(Self { height, width })
    }

    pub fn square(side: usize) -> Result<Self> {
        Self::new(side, side)
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    /// NDC position of the centre of pixel (row, col); row 0 is the top.
    pub fn pixel_center(&self, row: usize, col: usize) -> Vec2 {
        Vec2::new(
            2.0 * (col as f64 + 0.5) / self.width as f64 - 1.0,
            1.0 - 2.0 * (row as f64 + 0.5) / self.height as f64,
        )
    }

    /// Continuous pixel coordinates `(col, row)` of an NDC point.
    pub fn to_pixel(&self, p: &Vec2) -> (f64, f64) {
        (
            (p[0] + 1.0) / 2.0 * self.width as f64 - 0.5,
            (1.0 - p[1]) / 2.0 * self.height as f64 - 0.5,
        )
    }

    /// Nearest pixel `(row, col)` of an NDC point, clamped into the image.
    pub fn nearest_pixel(&self, p: &Vec2) -> (usize, usize) {
        let (x, y) = self.to_pixel(p);
        let clamp = |v: f64, n: usize| v.round().clamp(0.0, (n - 1) as f64) as usize;
        (clamp(y, self.height), clamp(x, self.width))
    }

    /// Width of one pixel in NDC units along x.
    pub fn pixel_width_ndc(&self) -> f64 {
        2.0 / self.width as f64
    }
}

/// Row-major grid of occupancy values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SilhouetteImage {
    size: ImageSize,
    values: Vec<f64>,
}

impl SilhouetteImage {
    pub fn new(size: ImageSize, values: Vec<f64>) -> Result<Self> {
        check_len("silhouette pixels", size.pixel_count(), values.len())?;
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "silhouette value {v} outside [0, 1]"
            )));
        }
        Ok(Self { size, values })
    }

    pub fn zeros(size: ImageSize) -> Self {
        Self {
            size,
            values: vec![0.0; size.pixel_count()],
        }
    }

    pub fn from_fn(size: ImageSize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let values = (0..size.height)
            .flat_map(|r| (0..size.width).map(move |c| (r, c)))
            .map(|(r, c)| f(r, c))
            .collect();
        Self::new(size, values)
    }

    pub fn size(&self) -> ImageSize {
        self.size
    }

    pub fn height(&self) -> usize {
        self.size.height
    }

    pub fn width(&self) -> usize {
        self.size.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.size.width + col]
    }

    pub fn same_size(&self, other: &Self) -> Result<()> {
        if self.size == other.size {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "image sizes differ: {}x{} vs {}x{}",
                self.size.height, self.size.width, other.size.height, other.size.width
            )))
        }
    }

    /// Binary image `value > threshold`.
    pub fn binarize(&self, threshold: f64) -> Vec<bool> {
        self.values.iter().map(|&v| v > threshold).collect()
    }

    /// Values quantised to 8 bits the way silhouettes are stored on disk.
    pub fn to_u8(&self) -> Vec<u8> {
        self.values
            .iter()
            .map(|v| (255.0 * v).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn from_u8(size: ImageSize, bytes: &[u8]) -> Result<Self> {
        Self::new(size, bytes.iter().map(|&b| f64::from(b) / 255.0).collect())
    }
}

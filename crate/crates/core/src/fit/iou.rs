use crate::error::Result;
use crate::raster::SilhouetteImage;

/// Intersection over union of `value > threshold` masks; 1 when both are
/// empty.
pub fn compute_iou(pred: &SilhouetteImage, target: &SilhouetteImage, threshold: f64) -> Result<f64> {
    pred.same_size(target)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (a, b) in pred.binarize(threshold).into_iter().zip(target.binarize(threshold)) {
        inter += (a && b) as usize;
        union += (a || b) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::ImageSize;

    fn rect(size: ImageSize, c0: usize, c1: usize) -> SilhouetteImage {
        SilhouetteImage::from_fn(size, |r, c| ((2..8).contains(&r) && (c0..c1).contains(&c)) as u8 as f64).unwrap()
    }

    #[test]
    fn identical_disjoint_and_empty() {
        let size = ImageSize::square(10).unwrap();
        let a = rect(size, 0, 4);
        assert_eq!(compute_iou(&a, &a, 0.5).unwrap(), 1.0);
        assert_eq!(compute_iou(&a, &rect(size, 5, 9), 0.5).unwrap(), 0.0);
        let z = SilhouetteImage::zeros(size);
        assert_eq!(compute_iou(&z, &z, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn half_overlapping_rectangles() {
        let size = ImageSize::square(10).unwrap();
        let (a, b) = (rect(size, 0, 4), rect(size, 2, 6));
        // 6x4 each, overlap 6x2: 12 / (24 + 24 - 12)
        let inter = a.values().iter().zip(b.values()).filter(|(x, y)| **x > 0.5 && **y > 0.5).count();
        assert_eq!(inter, 12);
        assert!((compute_iou(&a, &b, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }
}

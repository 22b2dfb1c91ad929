use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::raster::SilhouetteImage;

/// Draw `count` pixel centres (NDC) i.i.d. with probability proportional to
/// the mask value.
pub fn sample_mask_points(mask: &SilhouetteImage, count: usize, seed: u64) -> Result<Vec<Vec2>> {
    if !mask.values().iter().any(|&v| v > 0.5) {
        return Err(Error::EmptyMask);
    }
    let dist = WeightedIndex::new(mask.values()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = mask.size();
    Ok((0..count)
        .map(|_| {
            let idx = dist.sample(&mut rng);
            size.pixel_center(idx / size.width, idx % size.width)
        })
        .collect())
}

/// Per-step sampling seed derived from the run seed (splitmix64 finaliser).
pub fn step_seed(run_seed: u64, step: usize) -> u64 {
    let mut z = run_seed ^ (step as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

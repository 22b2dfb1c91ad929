use crate::error::Result;
use crate::raster::SilhouetteImage;

/// Mean squared pixel difference `mean_p (pred_p - target_p)^2`.
pub fn squared_error(pred: &SilhouetteImage, target: &SilhouetteImage) -> Result<f64> {
    pred.same_size(target)?;
    let sum: f64 = pred
        .values()
        .iter()
        .zip(target.values())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.values().len() as f64)
}

/// Value and `d/dpred` of [`squared_error`].
pub fn squared_error_grad(pred: &SilhouetteImage, target: &SilhouetteImage) -> Result<(f64, Vec<f64>)> {
    let value = squared_error(pred, target)?;
    let scale = 2.0 / pred.values().len() as f64;
    let grad = pred
        .values()
        .iter()
        .zip(target.values())
        .map(|(p, t)| scale * (p - t))
        .collect();
    Ok((value, grad))
}

/// `lambda_hair * |o_hair - s_hair|^2 + lambda_o * |o_full - s_full|^2`,
/// each norm averaged over pixels.
pub fn occupancy_loss(
    rendered_hair: &SilhouetteImage,
    rendered_full: &SilhouetteImage,
    target_hair: &SilhouetteImage,
    target_full: &SilhouetteImage,
    lambda_hair: f64,
    lambda_o: f64,
) -> Result<f64> {
    rendered_hair.same_size(rendered_full)?;
    Ok(lambda_hair * squared_error(rendered_hair, target_hair)?
        + lambda_o * squared_error(rendered_full, target_full)?)
}

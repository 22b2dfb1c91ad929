use crate::error::{Error, Result};
use crate::raster::SilhouetteImage;

struct DiceParts {
    overlap: f64,
    denominator: f64,
}

fn parts(pred: &SilhouetteImage, target: &SilhouetteImage) -> Result<DiceParts> {
    pred.same_size(target)?;
    let (mut overlap, mut pp, mut tt) = (0.0, 0.0, 0.0);
    for (p, t) in pred.values().iter().zip(target.values()) {
        overlap += p * t;
        pp += p * p;
        tt += t * t;
    }
    if pp + tt == 0.0 {
        return Err(Error::UndefinedDice);
    }
    Ok(DiceParts {
        overlap,
        denominator: pp + tt,
    })
}

/// `1 - 2 (pred . target) / (|pred|^2 + |target|^2)`.
pub fn dice_loss(pred: &SilhouetteImage, target: &SilhouetteImage) -> Result<f64> {
    let d = parts(pred, target)?;
    Ok(1.0 - 2.0 * d.overlap / d.denominator)
}

/// Value and gradient with respect to `pred`.
pub fn dice_loss_grad(pred: &SilhouetteImage, target: &SilhouetteImage) -> Result<(f64, Vec<f64>)> {
    let d = parts(pred, target)?;
    let value = 1.0 - 2.0 * d.overlap / d.denominator;
    let den2 = d.denominator * d.denominator;
    let grad = pred
        .values()
        .iter()
        .zip(target.values())
        .map(|(p, t)| -2.0 * (t * d.denominator - 2.0 * p * d.overlap) / den2)
        .collect();
    Ok((value, grad))
}

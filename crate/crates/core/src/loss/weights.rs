use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights of the geometric objective terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    pub lambda_hair: f64,
    pub lambda_o: f64,
    pub lambda_chm: f64,
    pub lambda_lap: f64,
    pub lambda_seg: f64,
}

impl LossWeights {
    /// All five terms, including the Dice term.
    pub const fn with_segmentation() -> Self {
        Self {
            lambda_hair: 10.0,
            lambda_o: 1.0,
            lambda_chm: 0.01,
            lambda_lap: 10.0,
            lambda_seg: 10.0,
        }
    }

    /// Same as [`Self::with_segmentation`] without the Dice term; the fit default.
    pub const fn geometric() -> Self {
        Self {
            lambda_seg: 0.0,
            ..Self::with_segmentation()
        }
    }

    pub const fn zero() -> Self {
        Self {
            lambda_hair: 0.0,
            lambda_o: 0.0,
            lambda_chm: 0.0,
            lambda_lap: 0.0,
            lambda_seg: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in self.named() {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be a finite nonnegative number, got {w}")));
            }
        }
        Ok(())
    }

    fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("lambda_hair", self.lambda_hair),
            ("lambda_o", self.lambda_o),
            ("lambda_chm", self.lambda_chm),
            ("lambda_lap", self.lambda_lap),
            ("lambda_seg", self.lambda_seg),
        ]
    }

    /// Weight paired with a report term name.
    pub fn weight_of(&self, term: &str) -> Option<f64> {
        Some(match term {
            LossReport::OCCUPANCY_HAIR => self.lambda_hair,
            LossReport::OCCUPANCY_FULL => self.lambda_o,
            LossReport::CHAMFER => self.lambda_chm,
            LossReport::LAPLACIAN => self.lambda_lap,
            LossReport::SEGMENTATION => self.lambda_seg,
            _ => return None,
        })
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self::geometric()
    }
}

/// Unweighted term values and their weighted total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub terms: BTreeMap<String, f64>,
    pub total: f64,
}

impl LossReport {
    pub const OCCUPANCY_HAIR: &'static str = "occupancy_hair";
    pub const OCCUPANCY_FULL: &'static str = "occupancy_full";
    pub const CHAMFER: &'static str = "chamfer";
    pub const LAPLACIAN: &'static str = "laplacian";
    pub const SEGMENTATION: &'static str = "segmentation";

    /// Builds a report whose total is the weighted sum of `terms`.
    pub fn weighted(terms: BTreeMap<String, f64>, weights: &LossWeights) -> Self {
        let total = terms
            .iter()
            .map(|(name, v)| weights.weight_of(name).unwrap_or(0.0) * v)
            .sum();
        Self { terms, total }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.get(name).copied()
    }
}

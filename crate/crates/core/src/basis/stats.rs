use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Quantile levels of [`OrderStatistics`].
pub const QUANTILES: [f64; 6] = [0.0, 0.1, 0.25, 0.75, 0.9, 1.0];

/// Nearest-rank order statistics of one coefficient over a dataset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderStatistics {
    pub min: f64,
    pub p10: f64,
    pub p25: f64,
    pub p75: f64,
    pub p90: f64,
    pub max: f64,
}

impl OrderStatistics {
    pub fn as_array(&self) -> [f64; 6] {
        [self.min, self.p10, self.p25, self.p75, self.p90, self.max]
    }

    /// Value at level `q` of `sorted`: element `clamp(floor(q M), 1, M)`
    /// counting from 1.
    pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
        let m = sorted.len();
        let rank = ((q * m as f64).floor() as usize).clamp(1, m);
        sorted[rank - 1]
    }

    fn of(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        let [min, p10, p25, p75, p90, max] = QUANTILES.map(|q| Self::nearest_rank(&values, q));
        Self { min, p10, p25, p75, p90, max }
    }
}

/// Per-component order statistics of coefficient vectors from several fits.
pub fn coefficient_statistics(dataset: &[DVector<f64>]) -> Result<Vec<OrderStatistics>> {
    let first = dataset.first().ok_or(Error::InvalidArgument("coefficient dataset is empty".into()))?;
    for eta in dataset {
        check_len("coefficient vector", first.len(), eta.len())?;
    }
    Ok((0..first.len())
        .map(|k| OrderStatistics::of(dataset.iter().map(|eta| eta[k]).collect()))
        .collect())
}

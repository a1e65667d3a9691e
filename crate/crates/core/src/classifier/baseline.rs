use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::quantile::QuantileLevel;

use super::decide;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Metric {
    SquaredL2,
    L1,
}

/// Component-wise nearest-center classifier: per-class means with squared
/// Euclidean distance, or per-class medians with L1 distance.
#[derive(Debug, Clone)]
pub struct NearestCenter {
    centers: Vec<f64>,
    p: usize,
    metric: Metric,
}

impl NearestCenter {
    pub fn centroid(train: &Dataset) -> Self {
        let (g, p) = (train.num_classes(), train.p());
        let mut sums = vec![0.0; g * p];
        let counts = train.class_counts();
        for (row, &k) in train.rows().zip(train.labels()) {
            for (acc, &v) in sums[k * p..(k + 1) * p].iter_mut().zip(row) {
                *acc += v;
            }
        }
        for k in 0..g {
            for v in &mut sums[k * p..(k + 1) * p] {
                *v /= counts[k] as f64;
            }
        }
        NearestCenter {
            centers: sums,
            p,
            metric: Metric::SquaredL2,
        }
    }

    /// Medians are the empirical 0.5-quantiles (lower median for even sizes).
    pub fn median(train: &Dataset) -> Self {
        let centers = train
            .sorted_class_columns()
            .iter()
            .flat_map(|cols| cols.iter().map(|s| s.quantile(QuantileLevel::HALF)))
            .collect();
        NearestCenter {
            centers,
            p: train.p(),
            metric: Metric::L1,
        }
    }

    pub fn center(&self, k: usize) -> &[f64] {
        &self.centers[k * self.p..(k + 1) * self.p]
    }

    pub fn classify(&self, z: &[f64]) -> Result<usize> {
        if z.len() != self.p {
            return Err(Error::invalid(format!(
                "point has {} coordinates, training data has {}",
                z.len(),
                self.p
            )));
        }
        let scores: Vec<f64> = self
            .centers
            .chunks_exact(self.p)
            .map(|c| match self.metric {
                Metric::SquaredL2 => z.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum(),
                Metric::L1 => z.iter().zip(c).map(|(a, b)| (a - b).abs()).sum(),
            })
            .collect();
        Ok(decide(&scores))
    }

    pub fn error_rate(&self, data: &Dataset) -> Result<f64> {
        let mut wrong = 0usize;
        for (row, &label) in data.rows().zip(data.labels()) {
            if self.classify(row)? != label {
                wrong += 1;
            }
        }
        Ok(wrong as f64 / data.n() as f64)
    }
}

pub fn centroid_classify(train: &Dataset, z: &[f64]) -> Result<usize> {
    NearestCenter::centroid(train).classify(z)
}

pub fn median_classify(train: &Dataset, z: &[f64]) -> Result<usize> {
    NearestCenter::median(train).classify(z)
}

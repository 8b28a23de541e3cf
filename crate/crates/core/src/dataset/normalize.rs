//! Per-column standardization fitted on a subset of rows.

use ndarray::{Array2, Axis};

use super::bundle::FeatureView;
use crate::error::{Error, Result};

/// Column means and population standard deviations of one view.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormalizationStats {
    pub fn width(&self) -> usize {
        self.mean.len()
    }
}

/// Fits column statistics over `subset` rows only (divide-by-n).
pub fn fit_normalizer(view: &FeatureView, subset: &[usize]) -> Result<NormalizationStats> {
    fit_matrix(view.matrix(), subset)
}

fn fit_matrix(matrix: &Array2<f64>, subset: &[usize]) -> Result<NormalizationStats> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let n = subset.len() as f64;
    let d = matrix.ncols();
    let mut mean = vec![0.0; d];
    for &r in subset {
        for (m, v) in mean.iter_mut().zip(matrix.row(r)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for &r in subset {
        for ((s, v), m) in var.iter_mut().zip(matrix.row(r)).zip(&mean) {
            let dv = v - m;
            *s += dv * dv;
        }
    }
    let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
    Ok(NormalizationStats { mean, std })
}

/// Maps every column to `(x - mean) / std`; zero-variance columns become 0.
pub fn apply_normalizer(view: &FeatureView, stats: &NormalizationStats) -> Result<FeatureView> {
    if stats.width() != view.width() {
        return Err(Error::WidthMismatch {
            context: format!("normalizer for view '{}'", view.name()),
            expected: view.width(),
            found: stats.width(),
        });
    }
    let mut out = view.matrix().clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        for ((v, m), s) in row.iter_mut().zip(&stats.mean).zip(&stats.std) {
            *v = if *s > 0.0 { (*v - m) / s } else { 0.0 };
        }
    }
    FeatureView::new(view.name(), out)
}

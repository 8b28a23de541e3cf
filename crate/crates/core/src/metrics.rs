//! Confusion-matrix metrics and cross-fold aggregation.
//!
//! Rows of a [`ConfusionMatrix`] are true classes, columns predicted
//! classes. Ratios with a zero denominator evaluate to 0 and set a
//! `degenerate` flag rather than producing NaN.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(n_classes: usize) -> Self {
        ConfusionMatrix {
            n_classes,
            counts: vec![0; n_classes * n_classes],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let c = rows.len();
        if rows.iter().any(|r| r.len() != c) {
            return Err(Error::Config("confusion matrix must be square".into()));
        }
        Ok(ConfusionMatrix {
            n_classes: c,
            counts: rows.concat(),
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.n_classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, class: usize) -> u64 {
        (0..self.n_classes).map(|j| self.get(class, j)).sum()
    }

    pub fn col_sum(&self, class: usize) -> u64 {
        (0..self.n_classes).map(|i| self.get(i, class)).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|i| self.get(i, i)).sum()
    }

    pub fn true_positives(&self, class: usize) -> u64 {
        self.get(class, class)
    }

    pub fn false_positives(&self, class: usize) -> u64 {
        self.col_sum(class) - self.get(class, class)
    }

    pub fn false_negatives(&self, class: usize) -> u64 {
        self.row_sum(class) - self.get(class, class)
    }

    pub fn true_negatives(&self, class: usize) -> u64 {
        self.total() + self.get(class, class) - self.row_sum(class) - self.col_sum(class)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks(self.n_classes.max(1))
    }

    /// Element-wise sum, e.g. to pool folds.
    pub fn add(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.n_classes, other.n_classes);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

pub fn confusion(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            context: "true vs predicted labels".into(),
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::Empty("label vectors".into()));
    }
    let mut cm = ConfusionMatrix::zeros(n_classes);
    for (i, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        if t >= n_classes || p >= n_classes {
            return Err(Error::UnknownLabel {
                sample: i.to_string(),
                label: t.max(p),
            });
        }
        cm.counts[t * n_classes + p] += 1;
    }
    Ok(cm)
}

/// Fractions in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: bool,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Harmonic mean of precision and recall (any common scale); 0 and flagged
/// when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> (f64, bool) {
    let s = precision + recall;
    if s == 0.0 {
        (0.0, true)
    } else {
        (2.0 * precision * recall / s, false)
    }
}

pub fn class_metrics(cm: &ConfusionMatrix) -> Vec<ClassMetrics> {
    (0..cm.n_classes())
        .map(|c| {
            let tp = cm.true_positives(c);
            let (precision, dp) = ratio(tp, tp + cm.false_positives(c));
            let (recall, dr) = ratio(tp, tp + cm.false_negatives(c));
            let (f1, df) = f1_score(precision, recall);
            ClassMetrics { precision, recall, f1, degenerate: dp || dr || df }
        })
        .collect()
}

/// Trace over total; 0 for an empty matrix.
pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.trace(), cm.total()).0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub kappa: f64,
    /// `p_o`
    pub observed: f64,
    /// `p_e = sum_c row_c * col_c / n^2`
    pub expected: f64,
    pub degenerate: bool,
}

/// Cohen's kappa, `(p_o - p_e) / (1 - p_e)`; 0 and flagged when `p_e = 1`.
pub fn agreement(cm: &ConfusionMatrix) -> Agreement {
    let n = cm.total() as f64;
    if n == 0.0 {
        return Agreement { kappa: 0.0, observed: 0.0, expected: 0.0, degenerate: true };
    }
    let observed = cm.trace() as f64 / n;
    let expected = (0..cm.n_classes())
        .map(|c| cm.row_sum(c) as f64 * cm.col_sum(c) as f64)
        .sum::<f64>()
        / (n * n);
    if expected >= 1.0 {
        return Agreement { kappa: 0.0, observed, expected, degenerate: true };
    }
    Agreement {
        kappa: (observed - expected) / (1.0 - expected),
        observed,
        expected,
        degenerate: false,
    }
}

pub fn kappa(cm: &ConfusionMatrix) -> f64 {
    agreement(cm).kappa
}

/// Rounds half away from zero at `decimals` places. Values within `1e-9`
/// of a decimal tie count as ties, so `98.785` rounds to `98.79` even though
/// its binary value sits just below the midpoint.
pub fn round_half_away(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let y = x * scale;
    let frac = y.abs().fract();
    let r = if (frac - 0.5).abs() < 1e-9 {
        y.signum() * (y.abs().trunc() + 1.0)
    } else {
        y.round()
    };
    r / scale
}

pub fn format_fixed(x: f64, decimals: u32) -> String {
    let r = round_half_away(x, decimals);
    // Avoid "-0.0".
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{:.*}", decimals as usize, r)
}

/// Mean and sample (k - 1) standard deviation of per-fold values.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldSummary {
    pub values: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl FoldSummary {
    /// `"M.M (S.S)"`, one decimal each.
    pub fn render(&self) -> String {
        format!("{} ({})", format_fixed(self.mean, 1), format_fixed(self.std, 1))
    }
}

impl fmt::Display for FoldSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn aggregate_folds(values: &[f64]) -> Result<FoldSummary> {
    if values.len() < 2 {
        return Err(Error::Config(format!(
            "fold aggregation needs at least 2 values, got {}",
            values.len()
        )));
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(FoldSummary {
        values: values.to_vec(),
        mean: mean.clamp(
            values.iter().copied().fold(f64::INFINITY, f64::min),
            values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ),
        std: var.sqrt(),
    })
}

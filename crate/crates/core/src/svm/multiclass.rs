//! One-vs-one reduction: one binary machine per unordered class pair.

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use super::kernel::KernelSpec;
use super::smo::{smo_train, BinarySvmModel, SmoConfig};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Binary machine for `positive` (label +1) against `negative` (-1), with
/// `positive < negative`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairModel {
    pub positive: usize,
    pub negative: usize,
    pub model: BinarySvmModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassSvmModel {
    pub class_names: Vec<String>,
    /// Ordered lexicographically by `(positive, negative)`.
    pub pairs: Vec<PairModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassPrediction {
    pub label: usize,
    pub votes: Vec<usize>,
    /// Decision values summed per class, each oriented toward that class.
    pub margins: Vec<f64>,
}

impl MulticlassPrediction {
    /// Share of the `C - 1` pairwise contests won by the predicted class.
    pub fn confidence(&self) -> f64 {
        let c = self.votes.len();
        if c < 2 {
            return 1.0;
        }
        self.votes[self.label] as f64 / (c - 1) as f64
    }
}

impl MulticlassSvmModel {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn dim(&self) -> usize {
        self.pairs.first().map_or(0, |p| p.model.dim())
    }

    pub fn predict(&self, features: &Array2<f64>) -> Result<Vec<MulticlassPrediction>> {
        let features = features.as_standard_layout();
        features
            .rows()
            .into_iter()
            .map(|r| multiclass_predict(self, r.as_slice().expect("standard layout")))
            .collect()
    }
}

pub fn multiclass_train(
    features: &Array2<f64>,
    labels: &[usize],
    n_classes: usize,
    kernel: &KernelSpec,
    config: &SmoConfig,
) -> Result<MulticlassSvmModel> {
    if n_classes < 2 {
        return Err(Error::FewerThanTwoClasses);
    }
    if features.nrows() != labels.len() {
        return Err(Error::LengthMismatch {
            context: "SVM features vs labels".into(),
            left: features.nrows(),
            right: labels.len(),
        });
    }
    if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= n_classes) {
        return Err(Error::UnknownLabel { sample: i.to_string(), label: l });
    }
    let pairs: Vec<(usize, usize)> = (0..n_classes)
        .flat_map(|a| (a + 1..n_classes).map(move |b| (a, b)))
        .collect();
    let pairs = pairs
        .into_par_iter()
        .map(|(a, b)| {
            let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == a || labels[i] == b).collect();
            let x = features.select(Axis(0), &idx);
            let y: Vec<f64> = idx.iter().map(|&i| if labels[i] == a { 1.0 } else { -1.0 }).collect();
            let cfg = SmoConfig {
                seed: derive_seed(config.seed, &[a as u64, b as u64]),
                ..config.clone()
            };
            let model = smo_train(&x, &y, kernel, &cfg)?;
            if !model.status.converged {
                log::warn!(
                    "SMO for classes {a} vs {b} stopped before convergence (max KKT residual {:.3e})",
                    model.status.max_kkt_violation
                );
            }
            Ok(PairModel { positive: a, negative: b, model })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MulticlassSvmModel {
        class_names: (0..n_classes).map(|c| format!("class_{c}")).collect(),
        pairs,
    })
}

/// Most votes wins; ties go to the larger summed margin, then to the lower
/// class id.
pub fn resolve_votes(votes: &[usize], margins: &[f64]) -> usize {
    let mut best = 0;
    for c in 1..votes.len() {
        if votes[c] > votes[best] || (votes[c] == votes[best] && margins[c] > margins[best]) {
            best = c;
        }
    }
    best
}

pub fn multiclass_predict(model: &MulticlassSvmModel, x: &[f64]) -> Result<MulticlassPrediction> {
    if x.len() != model.dim() {
        return Err(Error::WidthMismatch {
            context: "multiclass SVM input".into(),
            expected: model.dim(),
            found: x.len(),
        });
    }
    let c = model.n_classes();
    let mut votes = vec![0; c];
    let mut margins = vec![0.0; c];
    for p in &model.pairs {
        let f = p.model.decision_unchecked(x);
        if f >= 0.0 {
            votes[p.positive] += 1;
        } else {
            votes[p.negative] += 1;
        }
        margins[p.positive] += f;
        margins[p.negative] -= f;
    }
    let label = resolve_votes(&votes, &margins);
    Ok(MulticlassPrediction { label, votes, margins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::SmoStatus;
    use ndarray::array;

    fn constant_machine(value: f64) -> BinarySvmModel {
        BinarySvmModel {
            support_vectors: Array2::zeros((0, 1)),
            dual_coef: vec![],
            bias: value,
            kernel: KernelSpec::rbf(1.0),
            c: 1.0,
            status: SmoStatus {
                converged: true,
                iterations: 0,
                passes: 0,
                dual_objective: 0.0,
                max_kkt_violation: 0.0,
            },
        }
    }

    fn fixed(pairs: &[(usize, usize, f64)], c: usize) -> MulticlassSvmModel {
        MulticlassSvmModel {
            class_names: (0..c).map(|i| i.to_string()).collect(),
            pairs: pairs
                .iter()
                .map(|&(a, b, v)| PairModel { positive: a, negative: b, model: constant_machine(v) })
                .collect(),
        }
    }

    #[test]
    fn clear_winner() {
        // A beats B, A beats C, B beats C
        let m = fixed(&[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)], 3);
        let p = multiclass_predict(&m, &[0.0]).unwrap();
        assert_eq!((p.label, p.votes[0]), (0, 2));
        assert_eq!(p.confidence(), 1.0);
    }

    #[test]
    fn circular_tie_uses_margins() {
        assert_eq!(resolve_votes(&[1, 1, 1], &[0.9, 0.5, 0.1]), 0);
        assert_eq!(resolve_votes(&[1, 1, 1], &[0.1, 0.5, 0.9]), 2);
        assert_eq!(resolve_votes(&[1, 1, 1], &[0.5, 0.5, 0.1]), 0);
        // A>B with 0.2, B>C with 0.4, C>A with 0.3: margins A -0.1, B 0.2, C -0.1
        let m = fixed(&[(0, 1, 0.2), (0, 2, -0.3), (1, 2, 0.4)], 3);
        let p = multiclass_predict(&m, &[0.0]).unwrap();
        assert_eq!(p.votes, vec![1, 1, 1]);
        assert_eq!(p.label, 1);
    }

    #[test]
    fn two_classes_follow_the_sign() {
        let m = fixed(&[(0, 1, -0.25)], 2);
        assert_eq!(multiclass_predict(&m, &[3.0]).unwrap().label, 1);
        let m = fixed(&[(0, 1, 0.25)], 2);
        assert_eq!(multiclass_predict(&m, &[3.0]).unwrap().label, 0);
    }

    #[test]
    fn separable_blobs() {
        let centres = [[0.0, 4.0], [4.0, -2.0], [-4.0, -2.0]];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, centre) in centres.iter().enumerate() {
            for k in 0..10 {
                let t = k as f64 * 0.6;
                rows.extend_from_slice(&[centre[0] + t.cos() * 0.5, centre[1] + t.sin() * 0.5]);
                labels.push(c);
            }
        }
        let x = Array2::from_shape_vec((30, 2), rows).unwrap();
        let m = multiclass_train(&x, &labels, 3, &KernelSpec::rbf(0.5), &SmoConfig::default()).unwrap();
        assert_eq!(m.pairs.len(), 3);
        let pred: Vec<usize> = m.predict(&x).unwrap().into_iter().map(|p| p.label).collect();
        assert_eq!(pred, labels);
    }

    #[test]
    fn pair_count_and_errors() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let m = multiclass_train(&x, &[0, 1, 0, 1], 2, &KernelSpec::rbf(1.0), &SmoConfig::default()).unwrap();
        assert_eq!(m.pairs.len(), 1);
        assert!(multiclass_predict(&m, &[1.0, 2.0]).is_err());
        assert!(multiclass_train(&x, &[0, 0, 0, 0], 1, &KernelSpec::rbf(1.0), &SmoConfig::default()).is_err());
        // class 2 has no samples
        assert!(multiclass_train(&x, &[0, 1, 0, 1], 3, &KernelSpec::rbf(1.0), &SmoConfig::default()).is_err());
    }
}

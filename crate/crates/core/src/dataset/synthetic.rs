//! Gaussian-blob feature bundles for desk-scale experiments.

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};

use super::bundle::{ClassLabel, FeatureBundle, FeatureView};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticView {
    pub name: String,
    pub width: usize,
    /// One mean vector of length `width` per class.
    pub class_means: Vec<Vec<f64>>,
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub dataset: String,
    pub class_names: Vec<String>,
    pub class_sizes: Vec<usize>,
    pub views: Vec<SyntheticView>,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Three classes and two views, each blind to one class pair: `view_a`
    /// places classes 1 and 2 on the same mean, `view_b` does the same for
    /// classes 0 and 1. Only the concatenation separates all three.
    pub fn complementary(samples_per_class: usize, seed: u64) -> Self {
        let far = |s: f64| vec![s, s, 0.0, 0.0];
        SyntheticSpec {
            dataset: "complementary".into(),
            class_names: vec!["class_0".into(), "class_1".into(), "class_2".into()],
            class_sizes: vec![samples_per_class; 3],
            views: vec![
                SyntheticView {
                    name: "view_a".into(),
                    width: 4,
                    class_means: vec![far(2.0), far(-2.0), far(-2.0)],
                    noise: 0.6,
                },
                SyntheticView {
                    name: "view_b".into(),
                    width: 4,
                    class_means: vec![far(-2.0), far(-2.0), far(2.0)],
                    noise: 0.6,
                },
            ],
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let c = self.class_names.len();
        if c == 0 || self.class_sizes.len() != c {
            return Err(Error::Config(format!(
                "synthetic spec needs one size per class ({} names, {} sizes)",
                c,
                self.class_sizes.len()
            )));
        }
        if self.class_sizes.contains(&0) {
            return Err(Error::Config("class sizes must be positive".into()));
        }
        if self.views.is_empty() {
            return Err(Error::Config("synthetic spec has no views".into()));
        }
        for v in &self.views {
            if v.width == 0 {
                return Err(Error::Config(format!("view '{}' has zero width", v.name)));
            }
            if !(v.noise >= 0.0 && v.noise.is_finite()) {
                return Err(Error::Config(format!("view '{}' has invalid noise {}", v.name, v.noise)));
            }
            if v.class_means.len() != c || v.class_means.iter().any(|m| m.len() != v.width) {
                return Err(Error::Config(format!(
                    "view '{}' needs {c} mean vectors of length {}",
                    v.name, v.width
                )));
            }
        }
        Ok(())
    }
}

/// Samples are grouped by class in class order; each sample draws its views
/// in view order from a single seeded stream.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<FeatureBundle> {
    spec.validate()?;
    let n: usize = spec.class_sizes.iter().sum();
    let mut rng = rng_from_seed(spec.seed);
    let mut matrices: Vec<Array2<f64>> = spec.views.iter().map(|v| Array2::zeros((n, v.width))).collect();
    let mut labels = Vec::with_capacity(n);
    let mut row = 0;
    for (class, &size) in spec.class_sizes.iter().enumerate() {
        for _ in 0..size {
            for (view, m) in spec.views.iter().zip(matrices.iter_mut()) {
                for (j, mean) in view.class_means[class].iter().enumerate() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m[[row, j]] = mean + view.noise * z;
                }
            }
            labels.push(class);
            row += 1;
        }
    }
    let views = spec
        .views
        .iter()
        .zip(matrices)
        .map(|(v, m)| FeatureView::new(v.name.clone(), m))
        .collect::<Result<Vec<_>>>()?;
    let classes = spec
        .class_names
        .iter()
        .enumerate()
        .map(|(id, name)| ClassLabel { id, name: name.clone() })
        .collect();
    let ids = (0..n).map(|i| format!("s{i:05}")).collect();
    FeatureBundle::new(spec.dataset.clone(), classes, ids, labels, views)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::concatenate_views;

    /// Nearest-class-mean classifier scored on its own training data.
    fn nearest_centroid_accuracy(m: &Array2<f64>, labels: &[usize], c: usize) -> f64 {
        let d = m.ncols();
        let mut centroids = vec![vec![0.0; d]; c];
        let mut counts = vec![0.0; c];
        for (row, &l) in m.rows().into_iter().zip(labels) {
            counts[l] += 1.0;
            for (acc, v) in centroids[l].iter_mut().zip(row) {
                *acc += v;
            }
        }
        for (cent, n) in centroids.iter_mut().zip(&counts) {
            cent.iter_mut().for_each(|x| *x /= n);
        }
        let correct = m
            .rows()
            .into_iter()
            .zip(labels)
            .filter(|(row, &l)| {
                let dist = |cent: &Vec<f64>| row.iter().zip(cent).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
                let best = (0..c)
                    .min_by(|&a, &b| dist(&centroids[a]).total_cmp(&dist(&centroids[b])))
                    .unwrap();
                best == l
            })
            .count();
        correct as f64 / labels.len() as f64
    }

    #[test]
    fn shape_echo() {
        let b = generate_synthetic(&SyntheticSpec::complementary(50, 1)).unwrap();
        assert_eq!(b.n_samples(), 150);
        assert_eq!(b.views().len(), 2);
    }

    #[test]
    fn zero_noise_hits_means() {
        let mut spec = SyntheticSpec::complementary(5, 2);
        spec.views.iter_mut().for_each(|v| v.noise = 0.0);
        let b = generate_synthetic(&spec).unwrap();
        for (i, &l) in b.labels().iter().enumerate() {
            for (view, vs) in b.views().iter().zip(&spec.views) {
                assert_eq!(view.matrix().row(i).to_vec(), vs.class_means[l]);
            }
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let a = generate_synthetic(&SyntheticSpec::complementary(10, 4)).unwrap();
        let b = generate_synthetic(&SyntheticSpec::complementary(10, 4)).unwrap();
        let c = generate_synthetic(&SyntheticSpec::complementary(10, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn complementary_views_need_fusion() {
        let b = generate_synthetic(&SyntheticSpec::complementary(60, 11)).unwrap();
        for v in b.views() {
            let acc = nearest_centroid_accuracy(v.matrix(), b.labels(), 3);
            assert!(acc < 0.9, "{} scored {acc}", v.name());
        }
        let joined = concatenate_views(&b, &["view_a", "view_b"]).unwrap();
        assert_eq!(nearest_centroid_accuracy(joined.matrix(), b.labels(), 3), 1.0);
    }

    #[test]
    fn invalid_specs() {
        let mut s = SyntheticSpec::complementary(5, 0);
        s.class_sizes[1] = 0;
        assert!(generate_synthetic(&s).is_err());
        let mut s = SyntheticSpec::complementary(5, 0);
        s.views[0].width = 0;
        assert!(generate_synthetic(&s).is_err());
        let mut s = SyntheticSpec::complementary(5, 0);
        s.views[0].class_means.pop();
        assert!(generate_synthetic(&s).is_err());
    }
}

//! Multinomial logistic regression ("softmax classifier").
//!
//! Parameters start at zero and are trained by mini-batch SGD with classical
//! momentum (`v <- mu * v - lr * g; theta <- theta + v`). The seed only
//! drives the per-epoch shuffle. The final short batch of an epoch is kept.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub l2: f64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            learning_rate: 1e-4,
            momentum: 0.9,
            epochs: 50,
            batch_size: 16,
            seed: 0,
            l2: 0.0,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("softmax: {m}")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad("l2 must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    /// `C x d`
    pub weights: Array2<f64>,
    /// length `C`
    pub bias: Array1<f64>,
    pub class_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxGradient {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl SoftmaxModel {
    pub fn zeros(n_classes: usize, dim: usize) -> Self {
        SoftmaxModel {
            weights: Array2::zeros((n_classes, dim)),
            bias: Array1::zeros(n_classes),
            class_names: (0..n_classes).map(|c| format!("class_{c}")).collect(),
        }
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.n_classes());
        self.class_names = names;
        self
    }

    pub fn n_classes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    fn check_width(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::WidthMismatch {
                context: "softmax input".into(),
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    fn probabilities(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let mut logits = self.weights.dot(&x) + &self.bias;
        let max = logits.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        logits.mapv_inplace(|v| (v - max).exp());
        let z = logits.sum();
        logits / z
    }

    /// Hard labels and max-probability confidences for every row.
    pub fn predict(&self, features: &Array2<f64>) -> Result<Vec<(usize, f64)>> {
        self.check_width(features.ncols())?;
        Ok(features
            .rows()
            .into_iter()
            .map(|row| {
                let p = self.probabilities(row);
                argmax(p.view())
            })
            .collect())
    }

    /// Writes a text header followed by `W` (row-major) then `b` as
    /// little-endian `f32`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::new();
        writeln!(out, "FUSE-SOFTMAX 1").unwrap();
        writeln!(out, "classes {}", self.n_classes()).unwrap();
        writeln!(out, "dim {}", self.dim()).unwrap();
        for (i, n) in self.class_names.iter().enumerate() {
            writeln!(out, "class {i} {n}").unwrap();
        }
        writeln!(out, "end").unwrap();
        for v in self.weights.iter().chain(self.bias.iter()) {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let header = crate::svm::io::parse_header(&bytes, path, "FUSE-SOFTMAX 1")?;
        let c: usize = header.field(0, "classes")?;
        let d: usize = header.field(1, "dim")?;
        let names = header.class_names(2, c)?;
        let values = header.f32_payload(c * d + c)?;
        Ok(SoftmaxModel {
            weights: Array2::from_shape_vec((c, d), values[..c * d].to_vec()).unwrap(),
            bias: Array1::from(values[c * d..].to_vec()),
            class_names: names,
        })
    }
}

pub(crate) fn argmax(p: ArrayView1<f64>) -> (usize, f64) {
    p.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
}

pub fn predict_proba(model: &SoftmaxModel, x: &[f64]) -> Result<Vec<f64>> {
    model.check_width(x.len())?;
    Ok(model.probabilities(ArrayView1::from(x)).to_vec())
}

fn check_inputs(features: &Array2<f64>, labels: &[usize], n_classes: usize) -> Result<()> {
    if features.nrows() != labels.len() {
        return Err(Error::LengthMismatch {
            context: "softmax features vs labels".into(),
            left: features.nrows(),
            right: labels.len(),
        });
    }
    if let Some(((row, col), _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { view: "softmax input".into(), row, col });
    }
    if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= n_classes) {
        return Err(Error::UnknownLabel { sample: i.to_string(), label: l });
    }
    Ok(())
}

/// Mean cross-entropy plus `l2 / 2 * ||W||^2`, and its exact gradient.
pub fn loss_and_gradient(
    model: &SoftmaxModel,
    features: &Array2<f64>,
    labels: &[usize],
    l2: f64,
) -> Result<(f64, SoftmaxGradient)> {
    model.check_width(features.ncols())?;
    check_inputs(features, labels, model.n_classes())?;
    if labels.is_empty() {
        return Err(Error::Empty("softmax batch".into()));
    }
    Ok(batch_loss_gradient(model, features, labels, l2))
}

fn batch_loss_gradient(
    model: &SoftmaxModel,
    features: &Array2<f64>,
    labels: &[usize],
    l2: f64,
) -> (f64, SoftmaxGradient) {
    let n = labels.len() as f64;
    let mut gw = Array2::zeros(model.weights.raw_dim());
    let mut gb = Array1::zeros(model.n_classes());
    let mut loss = 0.0;
    for (x, &y) in features.rows().into_iter().zip(labels) {
        let mut p = model.probabilities(x);
        loss -= p[y].max(f64::MIN_POSITIVE).ln();
        p[y] -= 1.0;
        for (c, &r) in p.iter().enumerate() {
            gw.row_mut(c).scaled_add(r, &x);
        }
        gb += &p;
    }
    gw /= n;
    gb /= n;
    loss /= n;
    if l2 > 0.0 {
        loss += 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>();
        gw.scaled_add(l2, &model.weights);
    }
    (loss, SoftmaxGradient { weights: gw, bias: gb })
}

pub fn train_softmax(
    features: &Array2<f64>,
    labels: &[usize],
    n_classes: usize,
    config: &SgdConfig,
) -> Result<SoftmaxModel> {
    config.validate()?;
    check_inputs(features, labels, n_classes)?;
    if labels.is_empty() {
        return Err(Error::Empty("softmax training set".into()));
    }
    let mut present = vec![false; n_classes];
    labels.iter().for_each(|&l| present[l] = true);
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::FewerThanTwoClasses);
    }

    let mut model = SoftmaxModel::zeros(n_classes, features.ncols());
    let mut vel_w = Array2::<f64>::zeros(model.weights.raw_dim());
    let mut vel_b = Array1::<f64>::zeros(n_classes);
    let mut order: Vec<usize> = (0..labels.len()).collect();
    let mut rng = rng_from_seed(config.seed);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let x = features.select(Axis(0), batch);
            let y: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
            let (_, g) = batch_loss_gradient(&model, &x, &y, config.l2);
            vel_w *= config.momentum;
            vel_w.scaled_add(-config.learning_rate, &g.weights);
            vel_b *= config.momentum;
            vel_b.scaled_add(-config.learning_rate, &g.bias);
            model.weights += &vel_w;
            model.bias += &vel_b;
        }
    }
    Ok(model)
}

//! Class activation maps.
//!
//! A map is the per-pixel weighted sum `M(i, j) = sum_k w_k A(i, j, k)` of
//! the last convolutional feature maps `A` with the classifier weights `w`
//! of one class. Raw maps are min-max normalized into a [`CamHeatmap`],
//! optionally upsampled to image resolution, and exported as PGM/PPM.

mod export;
mod format;

use ndarray::Array2;

use crate::error::{Error, Result};

pub use export::{color_ramp, export_heatmap, pgm_bytes, ppm_bytes, quantize};
pub use format::{decode_activations, encode_activations, read_activations, write_activations, ACTIVATION_MAGIC};

/// `H x W x K` activations stored in (row, column, channel) order.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTensor {
    height: usize,
    width: usize,
    channels: usize,
    values: Vec<f64>,
}

impl ActivationTensor {
    pub fn new(height: usize, width: usize, channels: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::Config(format!(
                "activation tensor dimensions must be positive, got {height}x{width}x{channels}"
            )));
        }
        if values.len() != height * width * channels {
            return Err(Error::LengthMismatch {
                context: "activation values vs H*W*K".into(),
                left: values.len(),
                right: height * width * channels,
            });
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            let (pix, col) = (p / channels, p % channels);
            return Err(Error::NonFinite {
                view: "activations".into(),
                row: pix,
                col,
            });
        }
        Ok(ActivationTensor { height, width, channels, values })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.width + j) * self.channels + k]
    }

    /// Global average of each channel.
    pub fn channel_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.channels];
        for px in self.values.chunks(self.channels) {
            for (m, v) in means.iter_mut().zip(px) {
                *m += v;
            }
        }
        let n = (self.height * self.width) as f64;
        means.iter_mut().for_each(|m| *m /= n);
        means
    }
}

pub fn compute_cam(activations: &ActivationTensor, weights: &[f64]) -> Result<Array2<f64>> {
    let (h, w, k) = activations.dims();
    if weights.len() != k {
        return Err(Error::WidthMismatch {
            context: "class weights vs activation channels".into(),
            expected: k,
            found: weights.len(),
        });
    }
    if weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("class weights must be finite".into()));
    }
    let mut map = Array2::zeros((h, w));
    for ((i, j), m) in map.indexed_iter_mut() {
        let base = (i * w + j) * k;
        *m = activations.values[base..base + k]
            .iter()
            .zip(weights)
            .map(|(a, w)| a * w)
            .sum();
    }
    Ok(map)
}

/// Index of the class whose weights give the largest score on the
/// channel-averaged activations.
pub fn top_class(activations: &ActivationTensor, class_weights: &Array2<f64>) -> Result<usize> {
    let means = activations.channel_means();
    if class_weights.ncols() != means.len() || class_weights.nrows() == 0 {
        return Err(Error::WidthMismatch {
            context: "class weight matrix vs activation channels".into(),
            expected: means.len(),
            found: class_weights.ncols(),
        });
    }
    let scores: Vec<f64> = class_weights
        .rows()
        .into_iter()
        .map(|r| r.iter().zip(&means).map(|(w, m)| w * m).sum())
        .collect();
    Ok((0..scores.len())
        .fold(0, |best, c| if scores[c] > scores[best] { c } else { best }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub source_dims: (usize, usize, usize),
    pub class_id: usize,
}

/// Values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CamHeatmap {
    pub values: Array2<f64>,
    /// Set when the raw map was constant and normalized to zeros.
    pub constant: bool,
    pub provenance: Option<Provenance>,
}

impl CamHeatmap {
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("heatmap".into()));
        }
        Ok(CamHeatmap {
            values: values.mapv(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }),
            constant: false,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn dims(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn upsample(&self, height: usize, width: usize) -> Result<CamHeatmap> {
        Ok(CamHeatmap {
            values: bilinear_upsample(&self.values, height, width)?.mapv(|v| v.clamp(0.0, 1.0)),
            constant: self.constant,
            provenance: self.provenance,
        })
    }
}

/// Zeroes negative evidence before normalization.
pub fn relu(map: &Array2<f64>) -> Array2<f64> {
    map.mapv(|v| v.max(0.0))
}

/// `(x - min) / (max - min)`; a constant map becomes all zeros, flagged.
pub fn normalize_minmax(map: &Array2<f64>) -> CamHeatmap {
    let lo = map.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = map.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if map.is_empty() || !(range > 0.0) {
        return CamHeatmap {
            values: Array2::zeros(map.raw_dim()),
            constant: true,
            provenance: None,
        };
    }
    CamHeatmap {
        values: map.mapv(|v| ((v - lo) / range).clamp(0.0, 1.0)),
        constant: false,
        provenance: None,
    }
}

/// Corner-aligned bilinear resampling: output corners coincide with input
/// corners, and a size-1 axis samples the single input row/column.
pub fn bilinear_upsample(map: &Array2<f64>, height: usize, width: usize) -> Result<Array2<f64>> {
    let (h, w) = map.dim();
    if height == 0 || width == 0 {
        return Err(Error::Config(format!("upsample target must be positive, got {height}x{width}")));
    }
    if h == 0 || w == 0 {
        return Err(Error::Empty("map to upsample".into()));
    }
    let coord = |o: usize, out: usize, inp: usize| -> (usize, usize, f64) {
        if out == 1 || inp == 1 {
            return (0, 0, 0.0);
        }
        let s = o as f64 * (inp - 1) as f64 / (out - 1) as f64;
        let i0 = (s.floor() as usize).min(inp - 1);
        let i1 = (i0 + 1).min(inp - 1);
        (i0, i1, s - i0 as f64)
    };
    Ok(Array2::from_shape_fn((height, width), |(r, c)| {
        let (r0, r1, fr) = coord(r, height, h);
        let (c0, c1, fc) = coord(c, width, w);
        let top = map[[r0, c0]] * (1.0 - fc) + map[[r0, c1]] * fc;
        let bottom = map[[r1, c0]] * (1.0 - fc) + map[[r1, c1]] * fc;
        top * (1.0 - fr) + bottom * fr
    }))
}

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Rbf,
    Polynomial,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Rbf => "rbf",
            KernelKind::Polynomial => "poly",
        }
    }
}

/// `rbf`: `exp(-gamma * |x - z|^2)`;
/// `polynomial`: `(gamma * <x, z> + coef0)^degree`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: f64,
    pub degree: u32,
    pub coef0: f64,
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Rbf,
            gamma,
            degree: 0,
            coef0: 0.0,
        }
    }

    pub fn polynomial(gamma: f64, degree: u32, coef0: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Polynomial,
            gamma,
            degree,
            coef0,
        }
    }

    /// `gamma = 1 / (d * var)`, the variance taken over every entry of the
    /// training matrix. Falls back to `1 / d` for constant data.
    pub fn rbf_scaled(features: &Array2<f64>) -> Self {
        let d = features.ncols().max(1) as f64;
        let n = features.len() as f64;
        let mean = features.sum() / n;
        let var = features.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let gamma = if var > 0.0 && var.is_finite() { 1.0 / (d * var) } else { 1.0 / d };
        KernelSpec::rbf(gamma)
    }

    /// Degree 3, `gamma = 1 / d`, `coef0 = 0`.
    pub fn polynomial_default(dim: usize) -> Self {
        KernelSpec::polynomial(1.0 / dim.max(1) as f64, 3, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("kernel gamma must be positive, got {}", self.gamma)));
        }
        if self.kind == KernelKind::Polynomial && self.degree < 1 {
            return Err(Error::Config("polynomial degree must be at least 1".into()));
        }
        if !self.coef0.is_finite() {
            return Err(Error::Config("kernel coef0 must be finite".into()));
        }
        Ok(())
    }

    /// Unchecked evaluation; both slices must have the same length.
    #[inline]
    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Rbf => {
                let dist: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                (-self.gamma * dist).exp()
            }
            KernelKind::Polynomial => {
                let dot: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
                (self.gamma * dot + self.coef0).powi(self.degree as i32)
            }
        }
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], z: &[f64]) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::WidthMismatch {
            context: "kernel arguments".into(),
            expected: x.len(),
            found: z.len(),
        });
    }
    Ok(spec.eval(x, z))
}

/// Gram matrix access for the solver: precomputed when `n^2` doubles fit in
/// the budget, otherwise evaluated on demand.
pub(crate) enum Gram<'a> {
    Cached { n: usize, values: Vec<f64> },
    Lazy { rows: Vec<&'a [f64]>, spec: KernelSpec },
}

impl<'a> Gram<'a> {
    pub fn new(rows: Vec<&'a [f64]>, spec: KernelSpec, budget_bytes: usize) -> Result<Self> {
        let n = rows.len();
        let gram = if n.saturating_mul(n).saturating_mul(8) <= budget_bytes {
            let mut values = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let k = spec.eval(rows[i], rows[j]);
                    values[i * n + j] = k;
                    values[j * n + i] = k;
                }
            }
            Gram::Cached { n, values }
        } else {
            Gram::Lazy { rows, spec }
        };
        gram.check_finite()?;
        Ok(gram)
    }

    /// Wraps a caller-provided symmetric matrix.
    pub fn from_matrix(k: &Array2<f64>) -> Self {
        Gram::Cached {
            n: k.nrows(),
            values: k.iter().copied().collect(),
        }
    }

    fn check_finite(&self) -> Result<()> {
        match self {
            Gram::Cached { n, values } => {
                if let Some(p) = values.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteKernel { i: p / n, j: p % n });
                }
            }
            Gram::Lazy { rows, .. } => {
                for i in 0..rows.len() {
                    if !self.get(i, i).is_finite() {
                        return Err(Error::NonFiniteKernel { i, j: i });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match self {
            Gram::Cached { n, .. } => *n,
            Gram::Lazy { rows, .. } => rows.len(),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Gram::Cached { n, values } => values[i * n + j],
            Gram::Lazy { rows, spec } => spec.eval(rows[i], rows[j]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rbf_examples() {
        let k = KernelSpec::rbf(1.0);
        assert_eq!(kernel_eval(&k, &[0.3, -1.0], &[0.3, -1.0]).unwrap(), 1.0);
        assert!((kernel_eval(&k, &[0.0], &[1.0]).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!((kernel_eval(&k, &[0.0], &[1.0]).unwrap() - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn poly_example() {
        let k = KernelSpec::polynomial(1.0, 2, 1.0);
        assert_eq!(kernel_eval(&k, &[1.0, 0.0], &[1.0, 1.0]).unwrap(), 4.0);
    }

    #[test]
    fn width_mismatch() {
        assert!(kernel_eval(&KernelSpec::rbf(1.0), &[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn validation() {
        assert!(KernelSpec::rbf(0.0).validate().is_err());
        assert!(KernelSpec::polynomial(1.0, 0, 0.0).validate().is_err());
        assert!(KernelSpec::polynomial(1.0, 3, 0.0).validate().is_ok());
    }

    #[test]
    fn scaled_gamma() {
        let x = ndarray::array![[0.0, 2.0], [2.0, 0.0]];
        // entries {0, 2, 2, 0}: variance 1, d = 2
        assert_eq!(KernelSpec::rbf_scaled(&x).gamma, 0.5);
        assert_eq!(KernelSpec::rbf_scaled(&ndarray::array![[1.0, 1.0]]).gamma, 0.5);
    }

    #[test]
    fn lazy_matches_cached() {
        let data = [[0.1, 0.2], [1.0, -1.0], [3.0, 0.5]];
        let rows: Vec<&[f64]> = data.iter().map(|r| r.as_slice()).collect();
        let spec = KernelSpec::polynomial(0.5, 3, 1.0);
        let a = Gram::new(rows.clone(), spec, usize::MAX).unwrap();
        let b = Gram::new(rows, spec, 0).unwrap();
        assert!(matches!(b, Gram::Lazy { .. }));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.get(i, j), b.get(i, j));
            }
        }
    }

    #[test]
    fn non_finite_kernel_is_reported() {
        let data = [[1e200, 1e200]];
        let rows: Vec<&[f64]> = data.iter().map(|r| r.as_slice()).collect();
        let spec = KernelSpec::polynomial(1.0, 3, 0.0);
        assert!(matches!(Gram::new(rows, spec, usize::MAX), Err(Error::NonFiniteKernel { .. })));
    }

    proptest! {
        #[test]
        fn symmetric_with_unit_rbf_diagonal(
            x in prop::collection::vec(-10.0f64..10.0, 4),
            z in prop::collection::vec(-10.0f64..10.0, 4),
            gamma in 0.01f64..5.0,
        ) {
            for spec in [KernelSpec::rbf(gamma), KernelSpec::polynomial(gamma, 3, 1.0)] {
                prop_assert_eq!(spec.eval(&x, &z), spec.eval(&z, &x));
            }
            prop_assert_eq!(KernelSpec::rbf(gamma).eval(&x, &x), 1.0);
        }
    }
}

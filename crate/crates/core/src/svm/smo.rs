//! Soft-margin SVM dual solved by Sequential Minimal Optimization.
//!
//! The solver maximizes
//!
//! ```text
//! W(a) = sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//! subject to 0 <= a_i <= C, sum_i a_i y_i = 0
//! ```
//!
//! two multipliers at a time. The outer loop alternates a sweep over every
//! sample with sweeps over the non-bound samples until a full sweep changes
//! nothing. For a sample violating its KKT condition the partner is first
//! chosen by the largest `|E1 - E2|` step, then from the non-bound set and
//! finally from all samples, each scan starting at an offset drawn from the
//! seeded stream. Errors `E_i = f(x_i) - y_i` are kept for every sample.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::kernel::{Gram, KernelSpec};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoConfig {
    pub c: f64,
    /// KKT tolerance on `y_i f(x_i) - 1`.
    pub tolerance: f64,
    /// Upper bound on sweeps over the full sample set.
    pub max_passes: usize,
    /// Upper bound on accepted pair updates.
    pub max_iterations: usize,
    pub seed: u64,
    /// Gram matrices larger than this many bytes are evaluated on demand.
    pub cache_budget_bytes: usize,
}

impl Default for SmoConfig {
    fn default() -> Self {
        SmoConfig {
            c: 1.0,
            tolerance: 1e-3,
            max_passes: 10,
            max_iterations: 1_000_000,
            seed: 0,
            cache_budget_bytes: 256 << 20,
        }
    }
}

impl SmoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("SVM C must be positive, got {}", self.c)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("SMO tolerance must be positive".into()));
        }
        if self.max_passes == 0 || self.max_iterations == 0 {
            return Err(Error::Config("SMO pass and iteration caps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoStatus {
    pub converged: bool,
    pub iterations: usize,
    pub passes: usize,
    pub dual_objective: f64,
    /// Largest KKT residual over the training set, recomputed from scratch.
    pub max_kkt_violation: f64,
}

/// Multipliers for every training sample plus solver bookkeeping.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub status: SmoStatus,
    /// Dual objective after each accepted update (only when tracing).
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvmModel {
    pub support_vectors: Array2<f64>,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub c: f64,
    pub status: SmoStatus,
}

impl BinarySvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.ncols()
    }

    /// `f(x) = sum_i coef_i K(sv_i, x) + b`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::WidthMismatch {
                context: "SVM input".into(),
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.decision_unchecked(x))
    }

    pub(crate) fn decision_unchecked(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .rows()
            .into_iter()
            .zip(&self.dual_coef)
            .map(|(sv, c)| c * self.kernel.eval(sv.as_slice().expect("standard layout"), x))
            .sum::<f64>()
            + self.bias
    }
}

/// `W(a)` evaluated directly from a Gram matrix.
pub fn dual_objective(alpha: &[f64], y: &[f64], k: &Array2<f64>) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[[i, j]];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

struct Solver<'g> {
    gram: &'g Gram<'g>,
    y: &'g [f64],
    alpha: Vec<f64>,
    errors: Vec<f64>,
    bias: f64,
    c: f64,
    tol: f64,
    eps: f64,
    rng: ChaCha8Rng,
    iterations: usize,
    trace: Option<Vec<f64>>,
}

impl Solver<'_> {
    fn non_bound(&self, i: usize) -> bool {
        self.alpha[i] > 0.0 && self.alpha[i] < self.c
    }

    fn objective(&self) -> f64 {
        // f_i - b = E_i + y_i - b, so sum_ij a_i a_j y_i y_j K_ij = sum_i a_i y_i (E_i + y_i - b).
        let quad: f64 = (0..self.alpha.len())
            .map(|i| self.alpha[i] * self.y[i] * (self.errors[i] + self.y[i] - self.bias))
            .sum();
        self.alpha.iter().sum::<f64>() - 0.5 * quad
    }

    fn snap(&self, a: f64) -> f64 {
        let margin = 1e-12 * self.c;
        if a < margin {
            0.0
        } else if a > self.c - margin {
            self.c
        } else {
            a
        }
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;
        let (lo, hi) = if s < 0.0 {
            ((a2 - a1).max(0.0), (self.c + a2 - a1).min(self.c))
        } else {
            ((a2 + a1 - self.c).max(0.0), (a2 + a1).min(self.c))
        };
        if hi - lo <= 0.0 {
            return false;
        }
        let k11 = self.gram.get(i1, i1);
        let k12 = self.gram.get(i1, i2);
        let k22 = self.gram.get(i2, i2);
        let eta = k11 + k22 - 2.0 * k12;

        // Gain along the feasible line as a function of the new a2.
        let slope = y2 * (e1 - e2);
        let gain = |t: f64| slope * (t - a2) - 0.5 * eta * (t - a2) * (t - a2);
        let mut a2_new = if eta > 0.0 {
            (a2 + slope / eta).clamp(lo, hi)
        } else {
            let (g_lo, g_hi) = (gain(lo), gain(hi));
            if g_lo > g_hi + self.eps {
                lo
            } else if g_hi > g_lo + self.eps {
                hi
            } else {
                a2
            }
        };
        a2_new = self.snap(a2_new);
        if (a2_new - a2).abs() < self.eps * (a2_new + a2 + self.eps) || gain(a2_new) <= 0.0 {
            return false;
        }
        let a1_new = self.snap(a1 + s * (a2 - a2_new));
        let d1 = y1 * (a1_new - a1);
        let d2 = y2 * (a2_new - a2);

        let b1 = self.bias - e1 - d1 * k11 - d2 * k12;
        let b2 = self.bias - e2 - d1 * k12 - d2 * k22;
        let b_new = if a1_new > 0.0 && a1_new < self.c {
            b1
        } else if a2_new > 0.0 && a2_new < self.c {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        let db = b_new - self.bias;
        for i in 0..self.errors.len() {
            self.errors[i] += d1 * self.gram.get(i1, i) + d2 * self.gram.get(i2, i) + db;
        }
        self.alpha[i1] = a1_new;
        self.alpha[i2] = a2_new;
        self.bias = b_new;
        self.iterations += 1;
        if self.trace.is_some() {
            let w = self.objective();
            if let Some(t) = self.trace.as_mut() {
                t.push(w);
            }
        }
        true
    }

    fn violates_kkt(&self, i: usize) -> bool {
        let r = self.errors[i] * self.y[i];
        (r < -self.tol && self.alpha[i] < self.c) || (r > self.tol && self.alpha[i] > 0.0)
    }

    fn examine(&mut self, i2: usize) -> bool {
        if !self.violates_kkt(i2) {
            return false;
        }
        let n = self.alpha.len();
        let e2 = self.errors[i2];
        let non_bound: Vec<usize> = (0..n).filter(|&i| self.non_bound(i)).collect();
        if non_bound.len() > 1 {
            let best = non_bound
                .iter()
                .copied()
                .max_by(|&a, &b| (self.errors[a] - e2).abs().total_cmp(&(self.errors[b] - e2).abs()));
            if let Some(i1) = best {
                if self.take_step(i1, i2) {
                    return true;
                }
            }
        }
        if !non_bound.is_empty() {
            let start = self.rng.random_range(0..non_bound.len());
            for k in 0..non_bound.len() {
                let i1 = non_bound[(start + k) % non_bound.len()];
                if self.take_step(i1, i2) {
                    return true;
                }
            }
        }
        let start = self.rng.random_range(0..n);
        for k in 0..n {
            if self.take_step((start + k) % n, i2) {
                return true;
            }
        }
        false
    }

    /// Recomputes `b` from fresh outputs: the mean over free multipliers, or
    /// the middle of the feasible interval when every multiplier is at a bound.
    fn refit_bias(&mut self) {
        let n = self.alpha.len();
        let g: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| self.alpha[j] * self.y[j] * self.gram.get(i, j)).sum())
            .collect();
        let free: Vec<usize> = (0..n).filter(|&i| self.non_bound(i)).collect();
        let b = if free.is_empty() {
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for i in 0..n {
                let v = self.y[i] - g[i];
                if (self.alpha[i] <= 0.0) == (self.y[i] > 0.0) {
                    lo = lo.max(v);
                } else {
                    hi = hi.min(v);
                }
            }
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo,
                (false, true) => hi,
                (false, false) => self.bias,
            }
        } else {
            free.iter().map(|&i| self.y[i] - g[i]).sum::<f64>() / free.len() as f64
        };
        for i in 0..n {
            self.errors[i] = g[i] + b - self.y[i];
        }
        self.bias = b;
    }

    fn max_kkt_violation(&self) -> f64 {
        let n = self.alpha.len();
        (0..n)
            .map(|i| {
                let f: f64 = (0..n)
                    .map(|j| self.alpha[j] * self.y[j] * self.gram.get(i, j))
                    .sum::<f64>()
                    + self.bias;
                let r = self.y[i] * f - 1.0;
                if self.alpha[i] <= 0.0 {
                    (-r).max(0.0)
                } else if self.alpha[i] >= self.c {
                    r.max(0.0)
                } else {
                    r.abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn solve_gram(gram: &Gram, y: &[f64], config: &SmoConfig, trace: bool) -> Result<DualSolution> {
    config.validate()?;
    let n = y.len();
    if gram.len() != n {
        return Err(Error::LengthMismatch {
            context: "Gram matrix vs labels".into(),
            left: gram.len(),
            right: n,
        });
    }
    if n < 2 || !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(Error::FewerThanTwoClasses);
    }
    if let Some(i) = y.iter().position(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::Config(format!("binary label {} at {i} is not +1/-1", y[i])));
    }
    let mut solver = Solver {
        gram,
        y,
        alpha: vec![0.0; n],
        errors: y.iter().map(|v| -v).collect(),
        bias: 0.0,
        c: config.c,
        tol: config.tolerance,
        eps: 1e-12,
        rng: rng_from_seed(config.seed),
        iterations: 0,
        trace: trace.then(Vec::new),
    };

    let mut passes = 0;
    let mut examine_all = true;
    let mut converged = false;
    loop {
        if solver.iterations >= config.max_iterations {
            break;
        }
        let mut changed = 0;
        if examine_all {
            if passes == config.max_passes {
                break;
            }
            passes += 1;
            for i in 0..n {
                if solver.iterations >= config.max_iterations {
                    break;
                }
                changed += usize::from(solver.examine(i));
            }
        } else {
            for i in 0..n {
                if solver.iterations >= config.max_iterations {
                    break;
                }
                if solver.non_bound(i) {
                    changed += usize::from(solver.examine(i));
                }
            }
        }
        if solver.iterations >= config.max_iterations {
            break;
        }
        if examine_all {
            if changed == 0 {
                converged = true;
                break;
            }
            examine_all = false;
        } else if changed == 0 {
            examine_all = true;
        }
    }

    solver.refit_bias();
    let max_kkt_violation = solver.max_kkt_violation();
    // The maintained errors drift slightly; judge convergence on fresh values.
    let converged = converged && max_kkt_violation <= config.tolerance * (1.0 + 1e-6) + 1e-12;
    let status = SmoStatus {
        converged,
        iterations: solver.iterations,
        passes,
        dual_objective: solver.objective(),
        max_kkt_violation,
    };
    Ok(DualSolution {
        alpha: solver.alpha,
        bias: solver.bias,
        status,
        objective_trace: solver.trace.unwrap_or_default(),
    })
}

/// Solves the dual for a precomputed Gram matrix.
pub fn solve_dual(k: &Array2<f64>, y: &[f64], config: &SmoConfig, trace: bool) -> Result<DualSolution> {
    if k.nrows() != y.len() || k.ncols() != y.len() {
        return Err(Error::LengthMismatch {
            context: "Gram matrix vs labels".into(),
            left: k.nrows(),
            right: y.len(),
        });
    }
    solve_gram(&Gram::from_matrix(k), y, config, trace)
}

fn row_slices<S: ndarray::Data<Elem = f64>>(features: &ndarray::ArrayBase<S, ndarray::Ix2>) -> Vec<&[f64]> {
    features
        .rows()
        .into_iter()
        .map(|r| r.to_slice().expect("standard layout"))
        .collect()
}

/// Trains a binary model; `labels` must be +1/-1 with both present.
pub fn smo_train(features: &Array2<f64>, labels: &[f64], kernel: &KernelSpec, config: &SmoConfig) -> Result<BinarySvmModel> {
    let (model, _) = smo_train_with_solution(features, labels, kernel, config)?;
    Ok(model)
}

pub fn smo_train_with_solution(
    features: &Array2<f64>,
    labels: &[f64],
    kernel: &KernelSpec,
    config: &SmoConfig,
) -> Result<(BinarySvmModel, DualSolution)> {
    kernel.validate()?;
    config.validate()?;
    if features.nrows() != labels.len() {
        return Err(Error::LengthMismatch {
            context: "SVM features vs labels".into(),
            left: features.nrows(),
            right: labels.len(),
        });
    }
    let features = features.as_standard_layout();
    let gram = Gram::new(row_slices(&features), *kernel, config.cache_budget_bytes)?;
    let solution = solve_gram(&gram, labels, config, false)?;
    let support: Vec<usize> = (0..labels.len()).filter(|&i| solution.alpha[i] > 0.0).collect();
    let model = BinarySvmModel {
        support_vectors: features.select(ndarray::Axis(0), &support),
        dual_coef: support.iter().map(|&i| solution.alpha[i] * labels[i]).collect(),
        bias: solution.bias,
        kernel: *kernel,
        c: config.c,
        status: solution.status.clone(),
    };
    Ok((model, solution))
}

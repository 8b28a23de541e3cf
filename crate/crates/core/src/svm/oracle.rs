//! Exact dual solver for tiny problems, used to check the SMO solver.
//!
//! Every sample is assigned one of three states: pinned at 0, pinned at `C`,
//! or free. For each of the `3^n` assignments the free multipliers are
//! obtained from the stationarity conditions of the equality-constrained
//! subproblem,
//!
//! ```text
//! Q_FF a_F - nu y_F = 1 - Q_FU a_U
//! y_F . a_F         = -y_U . a_U
//! ```
//!
//! with `Q_ij = y_i y_j K_ij`. Candidates that are infeasible or whose
//! system is singular are discarded, and the best feasible objective wins.
//! Some optimum always has a non-singular free block (moving along a null
//! direction leaves the objective unchanged until a bound is hit), so the
//! enumeration returns the true optimum up to rounding in the `(|F|+1)`-sized
//! linear solves: roughly `1e-12` relative for well-conditioned Gram
//! matrices.

use ndarray::Array2;

use super::kernel::KernelSpec;
use super::smo::dual_objective;
use crate::error::{Error, Result};

pub const MAX_ORACLE_SAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub alpha: Vec<f64>,
    pub objective: f64,
}

pub fn brute_force_dual(features: &Array2<f64>, labels: &[f64], kernel: &KernelSpec, c: f64) -> Result<OracleSolution> {
    kernel.validate()?;
    let n = labels.len();
    if features.nrows() != n {
        return Err(Error::LengthMismatch {
            context: "oracle features vs labels".into(),
            left: features.nrows(),
            right: n,
        });
    }
    let k = Array2::from_shape_fn((n, n), |(i, j)| {
        kernel.eval(
            features.row(i).to_slice().expect("standard layout"),
            features.row(j).to_slice().expect("standard layout"),
        )
    });
    brute_force_dual_gram(&k, labels, c)
}

pub fn brute_force_dual_gram(k: &Array2<f64>, y: &[f64], c: f64) -> Result<OracleSolution> {
    let n = y.len();
    if n > MAX_ORACLE_SAMPLES {
        return Err(Error::OracleTooLarge { n, max: MAX_ORACLE_SAMPLES });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("SVM C must be positive, got {c}")));
    }
    let q = Array2::from_shape_fn((n, n), |(i, j)| y[i] * y[j] * k[[i, j]]);
    let feas_tol = 1e-10 * c.max(1.0);

    let mut best: Option<OracleSolution> = None;
    let mut state = vec![0u8; n];
    for code in 0..3usize.pow(n as u32) {
        let mut rest = code;
        for s in state.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        if !free.is_empty() {
            let m = free.len();
            let mut a = vec![vec![0.0; m + 2]; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[r][s] = q[[i, j]];
                }
                a[r][m] = -y[i];
                let bound_term: f64 = (0..n).filter(|&j| state[j] == 1).map(|j| q[[i, j]] * c).sum();
                a[r][m + 1] = 1.0 - bound_term;
            }
            for (s, &j) in free.iter().enumerate() {
                a[m][s] = y[j];
            }
            a[m][m + 1] = -(0..n).filter(|&j| state[j] == 1).map(|j| y[j] * c).sum::<f64>();
            let Some(sol) = solve_linear(a) else { continue };
            if sol[..m].iter().any(|&v| v < -feas_tol || v > c + feas_tol) {
                continue;
            }
            for (&i, &v) in free.iter().zip(&sol) {
                alpha[i] = v.clamp(0.0, c);
            }
        }
        let eq: f64 = alpha.iter().zip(y).map(|(a, y)| a * y).sum();
        if eq.abs() > feas_tol * n as f64 {
            continue;
        }
        let objective = dual_objective(&alpha, y, k);
        if best.as_ref().is_none_or(|b| objective > b.objective) {
            best = Some(OracleSolution { alpha, objective });
        }
    }
    Ok(best.expect("the all-zero assignment is always feasible"))
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_linear(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    let scale = a
        .iter()
        .flat_map(|r| r[..n].iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-11 * scale {
            return None;
        }
        a.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for k in col..=n {
                        a[r][k] -= f * a[col][k];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

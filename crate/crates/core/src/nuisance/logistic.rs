//! Logistic regression fitted by iteratively reweighted least squares.
//!
//! The fit maximizes the ridge-penalized log-likelihood
//! `Σ [y_i·lp_i − ln(1 + exp(lp_i))] − (ridge/2)·|β|²` with Newton steps and
//! step-halving, so the penalized log-likelihood is non-decreasing across
//! accepted iterations. With `ridge > 0` the objective is strictly concave
//! and the optimum unique; with `ridge = 0` diverging coefficients are
//! reported as a separation error.

use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::math::expit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub max_iter: usize,
    /// Convergence threshold on the max-norm of the penalized gradient.
    pub tol: f64,
    /// L2 penalty on all coordinates (intercept included); keeps the
    /// optimum finite on separable or single-class data.
    pub ridge: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            max_iter: 100,
            tol: 1e-8,
            ridge: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Largest f64 strictly below 1; predictions saturate here rather than at
/// an exact 1.0 (expit already cannot reach an exact 0 for predictors
/// above -700).
const MAX_PROB: f64 = 1.0 - f64::EPSILON / 2.0;

impl LogisticModel {
    /// `intercept + x · coefficients`, clamped to ±700 so the link never
    /// overflows.
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        let mut lp = self.intercept;
        for (c, v) in self.coefficients.iter().zip(x) {
            lp += c * v;
        }
        lp.clamp(-700.0, 700.0)
    }

    /// Probability strictly inside (0, 1).
    pub fn predict_one(&self, x: &[f64]) -> f64 {
        expit(self.linear_predictor(x)).min(MAX_PROB)
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.cols() != self.coefficients.len() {
            return Err(Error::DimensionMismatch {
                what: "prediction columns",
                expected: self.coefficients.len(),
                got: x.cols(),
            });
        }
        Ok((0..x.rows()).map(|i| self.predict_one(x.row(i))).collect())
    }
}

/// Probabilities in (0, 1) for every row of `x`.
pub fn predict_proba(model: &LogisticModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    model.predict(x)
}

/// Fit a logistic regression of the 0/1 vector `y` on `x`.
pub fn fit_logistic(
    x: &FeatureMatrix,
    y: &[f64],
    config: &LogisticConfig,
) -> Result<LogisticModel> {
    let n = x.rows();
    let d = x.cols();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            what: "logistic target length",
            expected: n,
            got: y.len(),
        });
    }
    if let Some(row) = y.iter().position(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::NonFinite {
            column: "y (must be 0/1)".to_string(),
            row,
        });
    }
    if config.ridge < 0.0 {
        return Err(Error::invalid("ridge", "must be >= 0"));
    }
    if config.ridge == 0.0 {
        if n < d + 1 {
            return Err(Error::invalid("n", "need n >= d + 1 when ridge = 0"));
        }
        let ones = y.iter().filter(|&&v| v == 1.0).count();
        if ones == 0 || ones == n {
            // Single-class data: the unpenalized MLE runs off to infinity.
            return Err(Error::Separation);
        }
    }

    let p_dim = d + 1; // [intercept, coefficients..]
    let mut beta = vec![0.0; p_dim];
    let mut lp = vec![0.0; n];
    let mut probs = vec![0.5; n];

    let penalized_ll = |beta: &[f64], lp: &[f64]| -> f64 {
        let mut ll = 0.0;
        for (i, &l) in lp.iter().enumerate() {
            // y*lp - ln(1+e^lp), computed on the non-overflowing branch.
            ll += if l > 0.0 {
                (y[i] - 1.0) * l - (-l).exp().ln_1p()
            } else {
                y[i] * l - l.exp().ln_1p()
            };
        }
        ll - 0.5 * config.ridge * beta.iter().map(|b| b * b).sum::<f64>()
    };

    let eval_lp = |beta: &[f64], lp: &mut Vec<f64>| {
        for (i, slot) in lp.iter_mut().enumerate() {
            let mut v = beta[0];
            for (j, xv) in x.row(i).iter().enumerate() {
                v += beta[j + 1] * xv;
            }
            *slot = v;
        }
    };

    let mut ll = penalized_ll(&beta, &lp);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=config.max_iter {
        iterations = iter;
        for (p, l) in probs.iter_mut().zip(&lp) {
            *p = expit(*l);
        }

        // Perfect separation drives every residual to zero while the
        // coefficients run off; a finite unpenalized optimum always keeps
        // residual mass somewhere.
        if config.ridge == 0.0
            && iter > 1
            && probs.iter().zip(y).all(|(p, yv)| (yv - p).abs() < 1e-6)
        {
            return Err(Error::Separation);
        }

        // Penalized gradient: X'(y - p) - ridge * beta.
        let mut grad = vec![0.0; p_dim];
        for i in 0..n {
            let r = y[i] - probs[i];
            grad[0] += r;
            for (j, xv) in x.row(i).iter().enumerate() {
                grad[j + 1] += r * xv;
            }
        }
        for j in 0..p_dim {
            grad[j] -= config.ridge * beta[j];
        }
        if grad.iter().all(|g| g.abs() <= config.tol) {
            converged = true;
            break;
        }

        // Newton direction from the weighted normal equations.
        let mut hess = vec![0.0; p_dim * p_dim];
        for (i, p) in probs.iter().enumerate() {
            let w = (p * (1.0 - p)).max(1e-10);
            let row = x.row(i);
            hess[0] += w;
            for j in 0..d {
                hess[j + 1] += w * row[j];
                for k in j..d {
                    hess[(j + 1) * p_dim + (k + 1)] += w * row[j] * row[k];
                }
            }
        }
        // Mirror the upper triangle and add the ridge diagonal.
        for j in 0..p_dim {
            for k in 0..j {
                hess[j * p_dim + k] = hess[k * p_dim + j];
            }
            hess[j * p_dim + j] += config.ridge;
        }

        let step = solve(&mut hess, &grad, p_dim).ok_or_else(|| {
            Error::invalid("design", "singular information matrix (collinear features)")
        })?;

        // Step-halving keeps the penalized log-likelihood non-decreasing.
        let mut scale = 1.0;
        let mut accepted = false;
        let mut cand = vec![0.0; p_dim];
        let mut cand_lp = vec![0.0; n];
        for _ in 0..30 {
            for j in 0..p_dim {
                cand[j] = beta[j] + scale * step[j];
            }
            eval_lp(&cand, &mut cand_lp);
            let cand_ll = penalized_ll(&cand, &cand_lp);
            if cand_ll >= ll - 1e-10 * (1.0 + ll.abs()) {
                beta.copy_from_slice(&cand);
                lp.copy_from_slice(&cand_lp);
                ll = cand_ll;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::Separation);
    }
    Ok(LogisticModel {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        converged,
        iterations,
    })
}

/// Solve the symmetric positive system in-place by Gaussian elimination with
/// partial pivoting; `None` if numerically singular.
fn solve(a: &mut [f64], b: &[f64], dim: usize) -> Option<Vec<f64>> {
    let mut rhs = b.to_vec();
    for col in 0..dim {
        let mut pivot = col;
        for row in (col + 1)..dim {
            if a[row * dim + col].abs() > a[pivot * dim + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * dim + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..dim {
                a.swap(col * dim + k, pivot * dim + k);
            }
            rhs.swap(col, pivot);
        }
        let inv = 1.0 / a[col * dim + col];
        for row in (col + 1)..dim {
            let f = a[row * dim + col] * inv;
            if f == 0.0 {
                continue;
            }
            for k in col..dim {
                a[row * dim + k] -= f * a[col * dim + k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut xsol = vec![0.0; dim];
    for col in (0..dim).rev() {
        let mut v = rhs[col];
        for k in (col + 1)..dim {
            v -= a[col * dim + k] * xsol[k];
        }
        xsol[col] = v / a[col * dim + col];
    }
    Some(xsol)
}

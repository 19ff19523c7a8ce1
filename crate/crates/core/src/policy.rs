//! Plug-in and budget-constrained treatment rules built from CATEs.
//!
//! The budget-λ rule treats a unit when its CATE is strictly positive AND
//! strictly above the empirical upper-(1−λ) quantile of the CATE sample the
//! threshold was computed from:
//!
//! `π_λ(x) = 1{τ(x) > 0} · 1{τ(x) > q_{1−λ}}`
//!
//! Ties at the threshold or at zero are NOT treated (strict `>`); with
//! continuous covariates ties are measure-zero, with discrete data the rule
//! may under-spend the budget. λ = 1 uses a −∞ threshold sentinel so the
//! same code path reduces to the plug-in sign rule `1{τ(x) > 0}`.

use serde::{Deserialize, Serialize};

use crate::data::Endpoint;
use crate::error::{Error, Result};

/// A CATE estimate evaluated per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CateVector {
    pub values: Vec<f64>,
    pub endpoint: Endpoint,
}

/// Elementwise CATE `mu1 - mu0`.
pub fn cate(mu1: &[f64], mu0: &[f64], endpoint: Endpoint) -> Result<CateVector> {
    if mu1.len() != mu0.len() {
        return Err(Error::DimensionMismatch {
            what: "cate arm predictions",
            expected: mu1.len(),
            got: mu0.len(),
        });
    }
    Ok(CateVector {
        values: mu1.iter().zip(mu0).map(|(a, b)| a - b).collect(),
        endpoint,
    })
}

/// Validate a budget fraction; λ must lie in (0, 1] (λ = 0 would be the
/// trivial treat-nobody rule and is rejected).
pub fn validate_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "lambda",
            format!("must lie in (0, 1], got {lambda}"),
        ))
    }
}

/// Smallest observed value `t` with `(1/n) Σ 1{τ_i <= t} >= 1−λ`, i.e. the
/// empirical upper-(1−λ) quantile of the sample. Returns the −∞ sentinel
/// for λ = 1 (no budget cut).
pub fn empirical_quantile(values: &[f64], lambda: f64) -> Result<f64> {
    validate_lambda(lambda)?;
    if values.is_empty() {
        return Err(Error::EmptyInput("quantile of an empty sample"));
    }
    if lambda == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(crate::math::quantile_at(values, 1.0 - lambda))
}

/// A budget-constrained treatment rule realized on a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetPolicy {
    pub lambda: f64,
    /// Quantile threshold the rule was built with; −∞ when λ = 1.
    pub threshold: f64,
    pub assignments: Vec<u8>,
}

/// Single-row policy decision.
#[inline]
pub fn assign(tau: f64, threshold: f64) -> u8 {
    u8::from(tau > 0.0 && tau > threshold)
}

/// Realize the budget rule on a CATE vector. `threshold` should come from
/// [`empirical_quantile`] of the matching sample, or the −∞ sentinel for
/// λ = 1.
pub fn budget_policy(tau: &CateVector, lambda: f64, threshold: f64) -> Result<BudgetPolicy> {
    validate_lambda(lambda)?;
    Ok(BudgetPolicy {
        lambda,
        threshold,
        assignments: tau.values.iter().map(|&t| assign(t, threshold)).collect(),
    })
}

impl BudgetPolicy {
    /// Fraction of rows treated.
    pub fn treated_fraction(&self) -> f64 {
        if self.assignments.is_empty() {
            return 0.0;
        }
        self.assignments.iter().map(|&a| a as usize).sum::<usize>() as f64
            / self.assignments.len() as f64
    }

    /// CSV export `(row id, cate, assignment)` for downstream audit.
    pub fn to_csv_string(&self, tau: &CateVector) -> String {
        let mut out = String::from("row,cate,assignment\n");
        for (i, (t, a)) in tau.values.iter().zip(&self.assignments).enumerate() {
            out.push_str(&format!("{i},{t},{a}\n"));
        }
        out
    }
}

/// Agreement between two policies among rows treated by either: the size of
/// the intersection of the treated sets over the size of their union.
/// Defined as 1.0 when neither policy treats anyone.
pub fn policy_agreement(p1: &BudgetPolicy, p2: &BudgetPolicy) -> Result<f64> {
    if p1.assignments.len() != p2.assignments.len() {
        return Err(Error::DimensionMismatch {
            what: "policy lengths",
            expected: p1.assignments.len(),
            got: p2.assignments.len(),
        });
    }
    let mut both = 0usize;
    let mut either = 0usize;
    for (&a, &b) in p1.assignments.iter().zip(&p2.assignments) {
        if a == 1 || b == 1 {
            either += 1;
            if a == 1 && b == 1 {
                both += 1;
            }
        }
    }
    Ok(if either == 0 {
        1.0
    } else {
        both as f64 / either as f64
    })
}

//! Doubly robust influence functions for the three surrogate metrics.
//!
//! Each metric is the mean of a per-row influence value built from the
//! fitted nuisances `η = (μ̂₀, μ̂₁, ê, π̂_Y, π̂_S)`. With `w(a, e) = a/e −
//! (1−a)/(1−e)` and residual `y − μ̂_a(x)`:
//!
//! - regret:     `(π̂_Y − π̂_S) · w·resid + τ̂_Y · (π̂_Y − π̂_S)`
//! - gain:       ` π̂_S        · w·resid + τ̂_Y ·  π̂_S`
//! - efficiency: `(π̂_S − λ)   · w·resid + τ̂_Y · (π̂_S − λ)`
//!
//! The augmentation term corrects the plug-in `τ̂_Y` so that the mean is
//! consistent if either the propensity or the outcome regressions are
//! correct; only products of their errors survive in the conditional bias
//! (see [`crate::bias`] for the exact decomposition).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{assign, validate_lambda};

/// Per-row nuisance values for one budget level, row-aligned with the data
/// they will be evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuisanceBundle {
    pub mu0: Vec<f64>,
    pub mu1: Vec<f64>,
    /// Propensity, already clipped into the overlap band.
    pub e: Vec<f64>,
    pub tau_y: Vec<f64>,
    pub tau_s: Vec<f64>,
    pub pi_y: Vec<u8>,
    pub pi_s: Vec<u8>,
    pub lambda: f64,
    /// Budget threshold for the outcome CATE; −∞ when λ = 1.
    pub y_threshold: f64,
    /// Budget threshold for the surrogate CATE; −∞ when λ = 1.
    pub s_threshold: f64,
}

impl NuisanceBundle {
    /// Build a bundle from CATEs and thresholds, deriving the policy columns
    /// by the budget rule. `tau_y` must be `mu1 - mu0` elementwise.
    #[allow(clippy::too_many_arguments)]
    pub fn from_cates(
        mu0: Vec<f64>,
        mu1: Vec<f64>,
        e: Vec<f64>,
        tau_s: Vec<f64>,
        lambda: f64,
        y_threshold: f64,
        s_threshold: f64,
        clip_epsilon: f64,
    ) -> Result<Self> {
        let tau_y: Vec<f64> = mu1.iter().zip(&mu0).map(|(a, b)| a - b).collect();
        let pi_y = tau_y.iter().map(|&t| assign(t, y_threshold)).collect();
        let pi_s = tau_s.iter().map(|&t| assign(t, s_threshold)).collect();
        let bundle = NuisanceBundle {
            mu0,
            mu1,
            e,
            tau_y,
            tau_s,
            pi_y,
            pi_s,
            lambda,
            y_threshold,
            s_threshold,
        };
        bundle.check(Some(clip_epsilon))?;
        Ok(bundle)
    }

    /// Build a bundle with explicitly injected policy columns.
    ///
    /// This is the simulation-mode escape hatch: oracle-agreement and
    /// robustness experiments hold the policies fixed (e.g. at the true
    /// budget rules) while the regression pieces are deliberately altered,
    /// so the policy columns need not reproduce the budget rule applied to
    /// the stored `tau` columns.
    #[allow(clippy::too_many_arguments)]
    pub fn with_policies(
        mu0: Vec<f64>,
        mu1: Vec<f64>,
        e: Vec<f64>,
        tau_s: Vec<f64>,
        pi_y: Vec<u8>,
        pi_s: Vec<u8>,
        lambda: f64,
        y_threshold: f64,
        s_threshold: f64,
    ) -> Result<Self> {
        let tau_y: Vec<f64> = mu1.iter().zip(&mu0).map(|(a, b)| a - b).collect();
        let bundle = NuisanceBundle {
            mu0,
            mu1,
            e,
            tau_y,
            tau_s,
            pi_y,
            pi_s,
            lambda,
            y_threshold,
            s_threshold,
        };
        bundle.check(None)?;
        Ok(bundle)
    }

    fn check(&self, clip_epsilon: Option<f64>) -> Result<()> {
        validate_lambda(self.lambda)?;
        let n = self.mu0.len();
        for (what, len) in [
            ("bundle column mu1", self.mu1.len()),
            ("bundle column e", self.e.len()),
            ("bundle column tau_y", self.tau_y.len()),
            ("bundle column tau_s", self.tau_s.len()),
            ("bundle column pi_y", self.pi_y.len()),
            ("bundle column pi_s", self.pi_s.len()),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    got: len,
                });
            }
        }
        if let Some(eps) = clip_epsilon {
            if let Some(row) = self.e.iter().position(|&v| !(v >= eps && v <= 1.0 - eps)) {
                return Err(Error::NonFinite {
                    column: format!("e (outside clip band [{eps}, {}])", 1.0 - eps),
                    row,
                });
            }
        } else if let Some(row) = self.e.iter().position(|&v| !(v > 0.0 && v < 1.0)) {
            return Err(Error::NonFinite {
                column: "e (outside (0,1))".to_string(),
                row,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.mu0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu0.is_empty()
    }
}

/// Inverse-propensity-weighted regression residual
/// `(a/e − (1−a)/(1−e)) · (y − μ̂_a)`.
#[inline]
pub fn ipw_residual(a: u8, y: f64, e: f64, mu0: f64, mu1: f64) -> f64 {
    let (weight, fitted) = if a == 1 {
        (1.0 / e, mu1)
    } else {
        (-1.0 / (1.0 - e), mu0)
    };
    weight * (y - fitted)
}

/// Regret influence value for row `i`.
#[inline]
pub fn regret_influence(bundle: &NuisanceBundle, i: usize, a: u8, y: f64) -> f64 {
    let gap = f64::from(bundle.pi_y[i]) - f64::from(bundle.pi_s[i]);
    if gap == 0.0 {
        return 0.0;
    }
    let resid = ipw_residual(a, y, bundle.e[i], bundle.mu0[i], bundle.mu1[i]);
    gap * resid + bundle.tau_y[i] * gap
}

/// Gain influence value for row `i`.
#[inline]
pub fn gain_influence(bundle: &NuisanceBundle, i: usize, a: u8, y: f64) -> f64 {
    if bundle.pi_s[i] == 0 {
        return 0.0;
    }
    let resid = ipw_residual(a, y, bundle.e[i], bundle.mu0[i], bundle.mu1[i]);
    resid + bundle.tau_y[i]
}

/// Efficiency influence value for row `i`.
#[inline]
pub fn efficiency_influence(bundle: &NuisanceBundle, i: usize, a: u8, y: f64) -> f64 {
    let gap = f64::from(bundle.pi_s[i]) - bundle.lambda;
    let resid = ipw_residual(a, y, bundle.e[i], bundle.mu0[i], bundle.mu1[i]);
    gap * resid + bundle.tau_y[i] * gap
}

/// The doubly robust ATE pseudo-outcome `w·resid + τ̂_Y` for row `i`; its
/// mean ties the three metrics together:
/// `mean(efficiency) = mean(gain) − λ · mean(ate_term)`.
#[inline]
pub fn ate_term(bundle: &NuisanceBundle, i: usize, a: u8, y: f64) -> f64 {
    ipw_residual(a, y, bundle.e[i], bundle.mu0[i], bundle.mu1[i]) + bundle.tau_y[i]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_row_bundle(
        mu0: f64,
        mu1: f64,
        e: f64,
        tau_s: f64,
        pi_y: u8,
        pi_s: u8,
    ) -> NuisanceBundle {
        NuisanceBundle::with_policies(
            vec![mu0],
            vec![mu1],
            vec![e],
            vec![tau_s],
            vec![pi_y],
            vec![pi_s],
            0.5,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        )
        .unwrap()
    }

    #[test]
    fn ipw_residual_arithmetic() {
        // Treated row with a perfect fit contributes nothing.
        assert_eq!(ipw_residual(1, 0.7, 0.3, 0.1, 0.7), 0.0);
        // Control row: -(1/(1-0.5)) * (1 - 0) = -2.
        assert_eq!(ipw_residual(0, 1.0, 0.5, 0.0, 0.9), -2.0);
        // Treated row: (1/0.25) * (1 - 0) = 4.
        assert_eq!(ipw_residual(1, 1.0, 0.25, 0.9, 0.0), 4.0);
    }

    #[test]
    fn regret_vanishes_when_policies_agree() {
        let b = one_row_bundle(0.1, 0.9, 0.3, 0.5, 1, 1);
        assert_eq!(regret_influence(&b, 0, 1, 123.0), 0.0);
        let b = one_row_bundle(0.1, 0.9, 0.3, 0.5, 0, 0);
        assert_eq!(regret_influence(&b, 0, 0, -55.0), 0.0);
    }

    #[test]
    fn regret_combines_residual_and_cate_terms() {
        // pi_y = 1, pi_s = 0, tau_y = 0.3, residual term -0.1 -> 0.2.
        // a = 0, e = 0.5, mu0 chosen so -(y - mu0)/(1-e) = -0.1.
        let b = one_row_bundle(0.2, 0.5, 0.5, 0.0, 1, 0);
        let y = 0.25; // -(0.25 - 0.2)/0.5 = -0.1
        let phi = regret_influence(&b, 0, 0, y);
        assert!((phi - 0.2).abs() < 1e-15, "{phi}");
    }

    #[test]
    fn gain_is_zero_on_untreated_rows() {
        let b = one_row_bundle(0.4, 0.7, 0.5, 0.5, 1, 0);
        assert_eq!(gain_influence(&b, 0, 1, 10.0), 0.0);
        // Treated-by-the-policy row with zero residual: exactly tau_y.
        let b = one_row_bundle(0.4, 0.7, 0.5, 0.5, 1, 1);
        let g = gain_influence(&b, 0, 1, 0.7);
        assert!((g - 0.3).abs() < 1e-15, "{g}");
    }

    #[test]
    fn efficiency_vanishes_under_treat_all_at_full_budget() {
        let b = NuisanceBundle::with_policies(
            vec![0.0; 3],
            vec![0.5; 3],
            vec![0.5; 3],
            vec![1.0; 3],
            vec![1; 3],
            vec![1; 3],
            1.0,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        )
        .unwrap();
        for i in 0..3 {
            assert_eq!(efficiency_influence(&b, i, 1, 7.0), 0.0);
        }
    }

    #[test]
    fn bundle_rejects_misaligned_or_unclipped_inputs() {
        let err = NuisanceBundle::from_cates(
            vec![0.0, 0.1],
            vec![0.5],
            vec![0.5],
            vec![0.0],
            0.5,
            0.0,
            0.0,
            0.01,
        );
        assert!(err.is_err());
        let err = NuisanceBundle::from_cates(
            vec![0.0],
            vec![0.5],
            vec![0.0001],
            vec![0.0],
            0.5,
            0.0,
            0.0,
            0.01,
        );
        assert!(err.is_err(), "unclipped propensity must be rejected");
    }

    #[test]
    fn from_cates_derives_policies_by_the_budget_rule() {
        let b = NuisanceBundle::from_cates(
            vec![0.0, 0.0, 0.0],
            vec![0.4, 0.1, -0.2],
            vec![0.5, 0.5, 0.5],
            vec![0.3, -0.1, 0.5],
            0.5,
            0.2,
            0.2,
            0.01,
        )
        .unwrap();
        assert_eq!(b.pi_y, vec![1, 0, 0]);
        assert_eq!(b.pi_s, vec![1, 0, 1]);
    }
}

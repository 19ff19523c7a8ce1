//! Nuisance function fitting: outcome/surrogate regressions per treatment
//! arm and the propensity score, behind one pluggable [`Regressor`] handle.
//!
//! Binary endpoints are fitted with ridge-stabilized logistic regression by
//! default; a native gradient-boosted stump ensemble is the documented
//! alternative for nonparametric regression; `mean-only` fits the arm mean
//! (useful both as a deliberately coarse model in robustness experiments and
//! as a shortcut propensity under known randomization).
//!
//! Fitted models are immutable, shareable, and serialize to a JSON document
//! (kind tag + parameters) for audit and reuse.

mod logistic;
mod stumps;

pub use logistic::{fit_logistic, predict_proba, LogisticConfig, LogisticModel};
pub use stumps::{fit_stump_ensemble, Stump, StumpConfig, StumpEnsemble};

use serde::{Deserialize, Serialize};

use crate::data::{Endpoint, FeatureMatrix, ObservationTable};
use crate::error::{Error, Result};
use crate::math::mean;

/// Which regressor family to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuisanceKind {
    Logistic,
    StumpEnsemble,
    MeanOnly,
}

impl std::str::FromStr for NuisanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" => Ok(NuisanceKind::Logistic),
            "stumps" | "stump_ensemble" => Ok(NuisanceKind::StumpEnsemble),
            "mean" | "mean_only" => Ok(NuisanceKind::MeanOnly),
            other => Err(Error::invalid(
                "nuisance",
                format!("unknown kind {other:?} (expected logistic | stumps | mean)"),
            )),
        }
    }
}

/// Hyperparameters for the fit families.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub logistic: LogisticConfig,
    pub stumps: StumpConfig,
}

/// A fitted regression, total on R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regressor {
    Logistic(LogisticModel),
    StumpEnsemble(StumpEnsemble),
    MeanOnly { value: f64 },
}

impl Regressor {
    pub fn predict_one(&self, x: &[f64]) -> f64 {
        match self {
            Regressor::Logistic(m) => m.predict_one(x),
            Regressor::StumpEnsemble(m) => m.predict_one(x),
            Regressor::MeanOnly { value } => *value,
        }
    }

    /// Predict every row, checking the column count against the fit.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if let Some(expected) = self.dim() {
            if x.cols() != expected {
                return Err(Error::DimensionMismatch {
                    what: "prediction columns",
                    expected,
                    got: x.cols(),
                });
            }
        }
        Ok((0..x.rows()).map(|i| self.predict_one(x.row(i))).collect())
    }

    fn dim(&self) -> Option<usize> {
        match self {
            Regressor::Logistic(m) => Some(m.coefficients.len()),
            Regressor::StumpEnsemble(m) => m.dim(),
            Regressor::MeanOnly { .. } => None,
        }
    }

    /// JSON document with a kind tag, for audit and reuse.
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Fit `E[target | X, A = arm]` on the rows of the given treatment arm.
pub fn fit_arm_regression(
    table: &ObservationTable,
    target: Endpoint,
    arm: u8,
    kind: NuisanceKind,
    config: &ModelConfig,
) -> Result<Regressor> {
    let column = table.endpoint(target)?;
    let rows = table.arm_indices(arm);
    if rows.is_empty() {
        return Err(Error::EmptyArm { arm });
    }
    let y: Vec<f64> = rows.iter().map(|&i| column[i]).collect();
    match kind {
        NuisanceKind::MeanOnly => Ok(Regressor::MeanOnly { value: mean(&y) }),
        NuisanceKind::Logistic => {
            if y.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::invalid(
                    "target",
                    "logistic regressor requires a 0/1 target column",
                ));
            }
            let x = subset_features(table, &rows);
            Ok(Regressor::Logistic(fit_logistic(&x, &y, &config.logistic)?))
        }
        NuisanceKind::StumpEnsemble => {
            let x = subset_features(table, &rows);
            Ok(Regressor::StumpEnsemble(fit_stump_ensemble(
                &x,
                &y,
                &config.stumps,
            )?))
        }
    }
}

/// Fit the propensity score `P(A = 1 | X)` on all rows of `table`.
pub fn fit_propensity(
    table: &ObservationTable,
    kind: NuisanceKind,
    config: &ModelConfig,
) -> Result<Regressor> {
    let y: Vec<f64> = table.treatment().iter().map(|&a| a as f64).collect();
    match kind {
        NuisanceKind::MeanOnly => Ok(Regressor::MeanOnly { value: mean(&y) }),
        NuisanceKind::Logistic => Ok(Regressor::Logistic(fit_logistic(
            table.covariates(),
            &y,
            &config.logistic,
        )?)),
        NuisanceKind::StumpEnsemble => Ok(Regressor::StumpEnsemble(fit_stump_ensemble(
            table.covariates(),
            &y,
            &config.stumps,
        )?)),
    }
}

fn subset_features(table: &ObservationTable, rows: &[usize]) -> FeatureMatrix {
    let d = table.dim();
    let mut values = Vec::with_capacity(rows.len() * d);
    for &i in rows {
        values.extend_from_slice(table.covariate_row(i));
    }
    FeatureMatrix::new(values, rows.len(), d).expect("subset of a valid matrix")
}

/// Clamp one probability into the overlap band `[epsilon, 1 - epsilon]`.
#[inline]
pub fn clip_one(e: f64, epsilon: f64) -> f64 {
    e.clamp(epsilon, 1.0 - epsilon)
}

/// Clamp a propensity vector into `[epsilon, 1 - epsilon]`; entries already
/// inside the band are unchanged. `epsilon` must lie in (0, 0.5).
pub fn clip_propensity(e: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::invalid(
            "epsilon",
            format!("must lie in (0, 0.5), got {epsilon}"),
        ));
    }
    Ok(e.iter().map(|&v| clip_one(v, epsilon)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_table(ys: Vec<f64>) -> ObservationTable {
        let n = ys.len();
        let xs: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / n as f64]).collect();
        let a: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        ObservationTable::from_rows(&xs, a, Some(ys), None).unwrap()
    }

    #[test]
    fn mean_only_predicts_the_arm_constant() {
        // Arm-1 rows are the odd indices; their outcome is the constant 3.
        let ys: Vec<f64> = (0..10)
            .map(|i| if i % 2 == 1 { 3.0 } else { 7.0 })
            .collect();
        let table = toy_table(ys);
        let model = fit_arm_regression(
            &table,
            Endpoint::Outcome,
            1,
            NuisanceKind::MeanOnly,
            &ModelConfig::default(),
        )
        .unwrap();
        let preds = model.predict(table.covariates()).unwrap();
        assert!(preds.iter().all(|&p| p == 3.0));
    }

    #[test]
    fn logistic_arm_fit_stays_in_unit_interval() {
        let ys: Vec<f64> = (0..40).map(|i| f64::from(i % 3 == 0)).collect();
        let table = toy_table(ys);
        let model = fit_arm_regression(
            &table,
            Endpoint::Outcome,
            0,
            NuisanceKind::Logistic,
            &ModelConfig::default(),
        )
        .unwrap();
        for p in model.predict(table.covariates()).unwrap() {
            assert!(p > 0.0 && p < 1.0);
        }
    }

    #[test]
    fn logistic_arm_fit_rejects_non_binary_target() {
        // The 0.5 sits on an arm-1 row (odd index).
        let table = toy_table(vec![0.0, 0.5, 1.0, 0.0]);
        let err = fit_arm_regression(
            &table,
            Endpoint::Outcome,
            1,
            NuisanceKind::Logistic,
            &ModelConfig::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("0/1"), "{err}");
    }

    #[test]
    fn empty_arm_is_an_error() {
        let table = ObservationTable::from_rows(
            &[vec![0.0], vec![1.0]],
            vec![0, 0],
            Some(vec![1.0, 0.0]),
            None,
        )
        .unwrap();
        assert!(matches!(
            fit_arm_regression(
                &table,
                Endpoint::Outcome,
                1,
                NuisanceKind::MeanOnly,
                &ModelConfig::default()
            ),
            Err(Error::EmptyArm { arm: 1 })
        ));
    }

    #[test]
    fn clipping_clamps_and_is_idempotent() {
        let clipped = clip_propensity(&[0.0001, 0.5, 0.9999], 0.01).unwrap();
        assert_eq!(clipped, vec![0.01, 0.5, 0.99]);
        assert_eq!(clip_propensity(&clipped, 0.01).unwrap(), clipped);
        assert!(clip_propensity(&[0.5], 0.0).is_err());
        assert!(clip_propensity(&[0.5], 0.5).is_err());
    }

    #[test]
    fn regressor_json_round_trip() {
        let model = Regressor::MeanOnly { value: 0.25 };
        let json = model.to_json_string().unwrap();
        assert!(json.contains("\"kind\":\"mean_only\""), "{json}");
        assert_eq!(Regressor::from_json_str(&json).unwrap(), model);

        // A fitted ensemble round-trips with its stages.
        let ys: Vec<f64> = (0..30).map(|i| f64::from(i % 4 == 0)).collect();
        let table = toy_table(ys);
        let fitted = fit_arm_regression(
            &table,
            Endpoint::Outcome,
            0,
            NuisanceKind::StumpEnsemble,
            &ModelConfig::default(),
        )
        .unwrap();
        let json = fitted.to_json_string().unwrap();
        assert!(json.contains("\"kind\":\"stump_ensemble\""), "{json}");
        let back = Regressor::from_json_str(&json).unwrap();
        assert_eq!(back, fitted);
        assert_eq!(
            back.predict_one(table.covariate_row(3)),
            fitted.predict_one(table.covariate_row(3))
        );
    }
}

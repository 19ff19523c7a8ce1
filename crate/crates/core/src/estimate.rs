//! Point estimation with cross-fitting.
//!
//! Three data layouts are supported, all ending in the same step: average
//! the per-row influence values of [`crate::influence`] over rows that were
//! never used to fit the nuisances feeding them.
//!
//! - **Two datasets, single split** (`folds = 1` in [`crossfit_split`]): the
//!   outcome dataset is split once into a main and an auxiliary half; the
//!   outcome regressions are fitted on the auxiliary half, the surrogate
//!   regressions and propensity on the surrogate dataset, the budget
//!   thresholds on the pooled auxiliary ∪ surrogate sample, and influence
//!   values are averaged over the main half only.
//! - **Two datasets, K-fold** (`folds >= 2` in [`crossfit_split`]): the
//!   outcome dataset is partitioned into K folds; per fold the outcome
//!   regressions are refitted on the fold complement (surrogate fits reuse
//!   the whole surrogate dataset), predictions are made on the held-out
//!   fold, and the average runs over every outcome row.
//! - **One dataset, K-fold** ([`crossfit_single`]): both endpoint
//!   regressions and the propensity are fitted on each fold complement and
//!   predicted on the held-out fold. Fitting every nuisance on the same
//!   complement keeps the pipeline symmetric in the two endpoints, so a
//!   surrogate column identical to the outcome column yields a regret of
//!   exactly zero.
//!
//! The analytic standard error is the sample SD of the influence values
//! over the averaging rows divided by sqrt(n); percentile bootstrap
//! intervals are in [`crate::bootstrap`].

use serde::{Deserialize, Serialize};

use crate::data::{Endpoint, ObservationTable};
use crate::error::{Error, Result};
use crate::influence::{
    ate_term, efficiency_influence, gain_influence, regret_influence, NuisanceBundle,
};
use crate::math::{mean, normal_quantile, sample_sd};
use crate::nuisance::{
    clip_propensity, fit_arm_regression, fit_propensity, ModelConfig, NuisanceKind, Regressor,
};
use crate::policy::{empirical_quantile, validate_lambda};
use crate::split::{complement, kfold, split_half};

/// One of the three surrogate-evaluation metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Regret,
    Gain,
    Efficiency,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Regret, Metric::Gain, Metric::Efficiency];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Regret => "regret",
            Metric::Gain => "gain",
            Metric::Efficiency => "efficiency",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regret" => Ok(Metric::Regret),
            "gain" => Ok(Metric::Gain),
            "efficiency" => Ok(Metric::Efficiency),
            other => Err(Error::invalid(
                "metric",
                format!("unknown metric {other:?} (expected regret | gain | efficiency)"),
            )),
        }
    }
}

/// Point estimate with analytic inference for one (metric, λ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub metric: Metric,
    pub lambda: f64,
    pub point: f64,
    pub analytic_se: f64,
    pub level: f64,
    pub ci: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap_se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap_ci: Option<(f64, f64)>,
    pub n_main: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_effective: Option<usize>,
}

/// Estimates for all three metrics at one budget level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimates {
    pub lambda: f64,
    pub regret: MetricEstimate,
    pub gain: MetricEstimate,
    pub efficiency: MetricEstimate,
}

impl LambdaEstimates {
    pub fn get(&self, metric: Metric) -> &MetricEstimate {
        match metric {
            Metric::Regret => &self.regret,
            Metric::Gain => &self.gain,
            Metric::Efficiency => &self.efficiency,
        }
    }
}

/// Output of a cross-fitting run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossfitOutput {
    pub per_lambda: Vec<LambdaEstimates>,
    /// Doubly robust ATE pseudo-outcome average over the same rows
    /// (λ-independent); ties the metrics together via
    /// `efficiency = gain − λ · ate_dr`.
    pub ate_dr: f64,
    pub n_main: usize,
}

impl CrossfitOutput {
    pub fn into_estimates(self) -> Vec<MetricEstimate> {
        self.per_lambda
            .into_iter()
            .flat_map(|l| [l.regret, l.gain, l.efficiency])
            .collect()
    }
}

/// Cross-fitting configuration shared by the estimation drivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossfitConfig {
    pub nuisance: NuisanceKind,
    /// 1 selects the single-split path in [`crossfit_split`]; K >= 2 selects
    /// K-fold cross-fitting.
    pub folds: usize,
    /// Fraction of the outcome dataset reserved as the main sample by the
    /// single-split path.
    pub split_fraction: f64,
    /// Propensity clip band.
    pub clip_epsilon: f64,
    /// Confidence level for analytic intervals.
    pub level: f64,
    pub seed: u64,
    pub models: ModelConfig,
}

impl Default for CrossfitConfig {
    fn default() -> Self {
        CrossfitConfig {
            nuisance: NuisanceKind::Logistic,
            folds: 5,
            split_fraction: 0.5,
            clip_epsilon: 0.01,
            level: 0.95,
            seed: 0,
            models: ModelConfig::default(),
        }
    }
}

impl CrossfitConfig {
    fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::invalid("level", "must lie in (0, 1)"));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::invalid("split_fraction", "must lie in (0, 1)"));
        }
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 0.5) {
            return Err(Error::invalid("clip_epsilon", "must lie in (0, 0.5)"));
        }
        if self.folds == 0 {
            return Err(Error::invalid("folds", "must be >= 1"));
        }
        Ok(())
    }
}

/// Influence value of `metric` for row `i`.
fn influence_value(metric: Metric, bundle: &NuisanceBundle, i: usize, a: u8, y: f64) -> f64 {
    match metric {
        Metric::Regret => regret_influence(bundle, i, a, y),
        Metric::Gain => gain_influence(bundle, i, a, y),
        Metric::Efficiency => efficiency_influence(bundle, i, a, y),
    }
}

fn estimate_from_values(
    metric: Metric,
    lambda: f64,
    values: &[f64],
    level: f64,
) -> Result<MetricEstimate> {
    if values.is_empty() {
        return Err(Error::EmptyInput(
            "no rows to average influence values over",
        ));
    }
    let point = mean(values);
    let analytic_se = sample_sd(values) / (values.len() as f64).sqrt();
    let z = normal_quantile(0.5 * (1.0 + level));
    Ok(MetricEstimate {
        metric,
        lambda,
        point,
        analytic_se,
        level,
        ci: (point - z * analytic_se, point + z * analytic_se),
        bootstrap_se: None,
        bootstrap_ci: None,
        n_main: values.len(),
        b_effective: None,
    })
}

/// Average the influence values of `metric` over `main` under a fitted
/// bundle. The bundle must be row-aligned with `main` and fitted on data
/// disjoint from it (sample-splitting contract).
pub fn estimate_metric(
    main: &ObservationTable,
    bundle: &NuisanceBundle,
    metric: Metric,
    level: f64,
) -> Result<MetricEstimate> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level", "must lie in (0, 1)"));
    }
    if bundle.len() != main.n() {
        return Err(Error::DimensionMismatch {
            what: "bundle rows",
            expected: main.n(),
            got: bundle.len(),
        });
    }
    let y = main.endpoint(Endpoint::Outcome)?;
    let a = main.treatment();
    let values: Vec<f64> = (0..main.n())
        .map(|i| influence_value(metric, bundle, i, a[i], y[i]))
        .collect();
    estimate_from_values(metric, bundle.lambda, &values, level)
}

// ---------------------------------------------------------------------------
// Fitted nuisance stage shared by the cross-fitting paths.
// ---------------------------------------------------------------------------

struct FittedModels {
    mu0: Regressor,
    mu1: Regressor,
    mu_s0: Regressor,
    mu_s1: Regressor,
    e: Regressor,
}

fn fit_outcome_pair(
    table: &ObservationTable,
    kind: NuisanceKind,
    models: &ModelConfig,
) -> Result<(Regressor, Regressor)> {
    Ok((
        fit_arm_regression(table, Endpoint::Outcome, 0, kind, models)?,
        fit_arm_regression(table, Endpoint::Outcome, 1, kind, models)?,
    ))
}

fn fit_surrogate_side(
    table: &ObservationTable,
    kind: NuisanceKind,
    models: &ModelConfig,
) -> Result<(Regressor, Regressor, Regressor)> {
    Ok((
        fit_arm_regression(table, Endpoint::Surrogate, 0, kind, models)?,
        fit_arm_regression(table, Endpoint::Surrogate, 1, kind, models)?,
        fit_propensity(table, kind, models)?,
    ))
}

struct Predictions {
    mu0: Vec<f64>,
    mu1: Vec<f64>,
    tau_y: Vec<f64>,
    tau_s: Vec<f64>,
    e: Vec<f64>,
}

impl FittedModels {
    fn predict(&self, table: &ObservationTable, clip_epsilon: f64) -> Result<Predictions> {
        let x = table.covariates();
        let mu0 = self.mu0.predict(x)?;
        let mu1 = self.mu1.predict(x)?;
        let mu_s0 = self.mu_s0.predict(x)?;
        let mu_s1 = self.mu_s1.predict(x)?;
        let e = clip_propensity(&self.e.predict(x)?, clip_epsilon)?;
        let tau_y = mu1.iter().zip(&mu0).map(|(a, b)| a - b).collect();
        let tau_s = mu_s1.iter().zip(&mu_s0).map(|(a, b)| a - b).collect();
        Ok(Predictions {
            mu0,
            mu1,
            tau_y,
            tau_s,
            e,
        })
    }

    fn cates_only(&self, table: &ObservationTable) -> Result<(Vec<f64>, Vec<f64>)> {
        let x = table.covariates();
        let mu0 = self.mu0.predict(x)?;
        let mu1 = self.mu1.predict(x)?;
        let mu_s0 = self.mu_s0.predict(x)?;
        let mu_s1 = self.mu_s1.predict(x)?;
        let tau_y = mu1.iter().zip(&mu0).map(|(a, b)| a - b).collect();
        let tau_s = mu_s1.iter().zip(&mu_s0).map(|(a, b)| a - b).collect();
        Ok((tau_y, tau_s))
    }
}

/// Per-(λ, metric) influence-value accumulator over the averaging rows.
struct ValueSink {
    lambdas: Vec<f64>,
    /// values[l][m][row]
    values: Vec<[Vec<f64>; 3]>,
    ate: Vec<f64>,
}

impl ValueSink {
    fn new(lambdas: &[f64], n: usize) -> Self {
        ValueSink {
            lambdas: lambdas.to_vec(),
            values: lambdas
                .iter()
                .map(|_| [vec![0.0; n], vec![0.0; n], vec![0.0; n]])
                .collect(),
            ate: vec![0.0; n],
        }
    }

    /// Evaluate all metrics for `rows` of `table` under per-λ bundles built
    /// from `pred` and the supplied thresholds.
    fn fill(
        &mut self,
        table: &ObservationTable,
        rows: &[usize],
        pred: &Predictions,
        thresholds: &[(f64, f64)],
    ) -> Result<()> {
        let y = table.endpoint(Endpoint::Outcome)?;
        let a = table.treatment();
        for (l, &(y_thr, s_thr)) in thresholds.iter().enumerate() {
            let bundle = NuisanceBundle::with_policies(
                pred.mu0.clone(),
                pred.mu1.clone(),
                pred.e.clone(),
                pred.tau_s.clone(),
                pred.tau_y
                    .iter()
                    .map(|&t| crate::policy::assign(t, y_thr))
                    .collect(),
                pred.tau_s
                    .iter()
                    .map(|&t| crate::policy::assign(t, s_thr))
                    .collect(),
                self.lambdas[l],
                y_thr,
                s_thr,
            )?;
            for (local, &row) in rows.iter().enumerate() {
                let (ai, yi) = (a[row], y[row]);
                self.values[l][0][row] = regret_influence(&bundle, local, ai, yi);
                self.values[l][1][row] = gain_influence(&bundle, local, ai, yi);
                self.values[l][2][row] = efficiency_influence(&bundle, local, ai, yi);
                if l == 0 {
                    self.ate[row] = ate_term(&bundle, local, ai, yi);
                }
            }
        }
        Ok(())
    }

    fn into_output(self, level: f64) -> Result<CrossfitOutput> {
        let n_main = self.ate.len();
        let ate_dr = mean(&self.ate);
        let per_lambda = self
            .lambdas
            .iter()
            .zip(self.values)
            .map(|(&lambda, vals)| {
                Ok(LambdaEstimates {
                    lambda,
                    regret: estimate_from_values(Metric::Regret, lambda, &vals[0], level)?,
                    gain: estimate_from_values(Metric::Gain, lambda, &vals[1], level)?,
                    efficiency: estimate_from_values(Metric::Efficiency, lambda, &vals[2], level)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CrossfitOutput {
            per_lambda,
            ate_dr,
            n_main,
        })
    }
}

fn thresholds_for(
    tau_y_sample: &[f64],
    tau_s_sample: &[f64],
    lambdas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    lambdas
        .iter()
        .map(|&l| {
            Ok((
                empirical_quantile(tau_y_sample, l)?,
                empirical_quantile(tau_s_sample, l)?,
            ))
        })
        .collect()
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::EmptyInput("no budget levels requested"));
    }
    for &l in lambdas {
        validate_lambda(l)?;
    }
    Ok(())
}

/// Two-dataset estimation: `d1` carries the outcome, `d2` the surrogate.
///
/// `config.folds = 1` runs the single-split path; `folds >= 2` refits the
/// outcome regressions per fold of `d1` and averages over all of `d1`.
pub fn crossfit_split(
    d1: &ObservationTable,
    d2: &ObservationTable,
    lambdas: &[f64],
    config: &CrossfitConfig,
) -> Result<CrossfitOutput> {
    config.validate()?;
    check_lambdas(lambdas)?;
    let _ = d1.endpoint(Endpoint::Outcome)?;
    let _ = d2.endpoint(Endpoint::Surrogate)?;

    let (mu_s0, mu_s1, e_model) = fit_surrogate_side(d2, config.nuisance, &config.models)?;

    if config.folds == 1 {
        // Single split of d1 into a main and an auxiliary half.
        let plan = split_half(d1, config.split_fraction, config.seed)?;
        let main = d1.subset(&plan.main);
        let aux = d1.subset(&plan.aux);
        let (mu0, mu1) = fit_outcome_pair(&aux, config.nuisance, &config.models)?;
        let models = FittedModels {
            mu0,
            mu1,
            mu_s0,
            mu_s1,
            e: e_model,
        };

        // Budget thresholds from the pooled auxiliary ∪ surrogate sample.
        let (tau_y_aux, tau_s_aux) = models.cates_only(&aux)?;
        let (tau_y_d2, tau_s_d2) = models.cates_only(d2)?;
        let mut tau_y_pool = tau_y_aux;
        tau_y_pool.extend_from_slice(&tau_y_d2);
        let mut tau_s_pool = tau_s_aux;
        tau_s_pool.extend_from_slice(&tau_s_d2);
        let thresholds = thresholds_for(&tau_y_pool, &tau_s_pool, lambdas)?;

        let pred = models.predict(&main, config.clip_epsilon)?;
        let mut sink = ValueSink::new(lambdas, main.n());
        let all_rows: Vec<usize> = (0..main.n()).collect();
        sink.fill(&main, &all_rows, &pred, &thresholds)?;
        sink.into_output(config.level)
    } else {
        // K-fold over d1; the surrogate side is shared by every fold, so its
        // budget thresholds are too.
        let folds = kfold(d1.n(), config.folds, config.seed)?;
        let s_thresholds: Vec<f64> = {
            let x2 = d2.covariates();
            let s0 = mu_s0.predict(x2)?;
            let s1 = mu_s1.predict(x2)?;
            let tau_s_d2: Vec<f64> = s1.iter().zip(&s0).map(|(a, b)| a - b).collect();
            lambdas
                .iter()
                .map(|&l| empirical_quantile(&tau_s_d2, l))
                .collect::<Result<Vec<_>>>()?
        };

        let mut sink = ValueSink::new(lambdas, d1.n());
        for (k, fold) in folds.iter().enumerate() {
            let comp = complement(d1.n(), fold);
            let aux = d1.subset(&comp);
            let (mu0, mu1) =
                fit_outcome_pair(&aux, config.nuisance, &config.models).map_err(|e| match e {
                    Error::EmptyArm { arm } => Error::FoldTooSmall {
                        fold: k,
                        reason: format!("no rows with treatment arm {arm} in the fold complement"),
                    },
                    other => other,
                })?;
            let models = FittedModels {
                mu0,
                mu1,
                mu_s0: mu_s0.clone(),
                mu_s1: mu_s1.clone(),
                e: e_model.clone(),
            };
            let (tau_y_aux, _) = models.cates_only(&aux)?;
            let thresholds: Vec<(f64, f64)> = lambdas
                .iter()
                .zip(&s_thresholds)
                .map(|(&l, &s_thr)| Ok((empirical_quantile(&tau_y_aux, l)?, s_thr)))
                .collect::<Result<Vec<_>>>()?;

            let held_out = d1.subset(fold);
            let pred = models.predict(&held_out, config.clip_epsilon)?;
            sink.fill(d1, fold, &pred, &thresholds)?;
        }
        sink.into_output(config.level)
    }
}

/// Single-dataset estimation (both endpoints present) with K-fold
/// cross-fitting: all nuisances are fitted on each fold complement and
/// predicted on the held-out fold; the estimate averages over every row.
pub fn crossfit_single(
    d: &ObservationTable,
    lambdas: &[f64],
    config: &CrossfitConfig,
) -> Result<CrossfitOutput> {
    config.validate()?;
    check_lambdas(lambdas)?;
    let _ = d.endpoint(Endpoint::Outcome)?;
    let _ = d.endpoint(Endpoint::Surrogate)?;
    if config.folds < 2 {
        return Err(Error::invalid(
            "folds",
            "single-dataset cross-fitting needs K >= 2",
        ));
    }

    let folds = kfold(d.n(), config.folds, config.seed)?;
    let mut sink = ValueSink::new(lambdas, d.n());
    for (k, fold) in folds.iter().enumerate() {
        let comp = complement(d.n(), fold);
        let aux = d.subset(&comp);
        let wrap = |e: Error| match e {
            Error::EmptyArm { arm } => Error::FoldTooSmall {
                fold: k,
                reason: format!("no rows with treatment arm {arm} in the fold complement"),
            },
            other => other,
        };
        let (mu0, mu1) = fit_outcome_pair(&aux, config.nuisance, &config.models).map_err(wrap)?;
        let (mu_s0, mu_s1, e_model) =
            fit_surrogate_side(&aux, config.nuisance, &config.models).map_err(wrap)?;
        let models = FittedModels {
            mu0,
            mu1,
            mu_s0,
            mu_s1,
            e: e_model,
        };

        let (tau_y_aux, tau_s_aux) = models.cates_only(&aux)?;
        let thresholds = thresholds_for(&tau_y_aux, &tau_s_aux, lambdas)?;

        let held_out = d.subset(fold);
        let pred = models.predict(&held_out, config.clip_epsilon)?;
        sink.fill(d, fold, &pred, &thresholds)?;
    }
    sink.into_output(config.level)
}

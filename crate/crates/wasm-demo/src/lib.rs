//! Browser demo bindings.
//!
//! Three interactive operations, each returning a JSON document for the
//! static page in `www/` to plot:
//!
//! - [`paradox_report`] — counterexample explorer: CATE lines, analytic and
//!   sampled correlations, rule agreement, and (for the discrete world) the
//!   exact rule values.
//! - [`metric_curves`] — oracle regret / gain / efficiency as functions of
//!   the budget λ for any built-in world.
//! - [`estimate_demo`] — generate a benchmark dataset in the browser, run
//!   the cross-fitted estimator, and compare against oracle truth.
//!
//! Build with `wasm-pack build --target web` (or `cargo build --target
//! wasm32-unknown-unknown` plus `wasm-bindgen`); serve `www/`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use surreval::sim::{
    generate, oracle_truth, sampled_observed_correlation, sampled_potential_correlation,
    three_point_itr_values, true_policy_agreement, DgpSpec, OracleTruth, ThreePointValues,
};
use surreval::{crossfit_single, CrossfitConfig, MetricEstimate, NuisanceKind};

fn err_json(err: impl std::fmt::Display) -> String {
    serde_json::json!({ "error": err.to_string() }).to_string()
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_else(err_json)
}

fn parse_spec(kind: &str, alpha: f64, beta: f64) -> Result<DgpSpec, surreval::Error> {
    DgpSpec::parse(kind, Some(alpha), Some(beta))
}

#[derive(Serialize)]
struct CatePoint {
    x: f64,
    cate_outcome: f64,
    cate_surrogate: f64,
}

#[derive(Serialize)]
struct AgreementPoint {
    lambda: f64,
    agreement: f64,
}

#[derive(Serialize)]
struct ParadoxReport {
    kind: String,
    lambda: f64,
    analytic_observed_correlation: Option<f64>,
    analytic_potential_correlation: Option<f64>,
    sampled_observed_correlation: f64,
    sampled_potential_correlation: f64,
    cates: Vec<CatePoint>,
    agreement_at_lambda: f64,
    agreement_curve: Vec<AgreementPoint>,
    itr_values: Option<ThreePointValues>,
}

/// Counterexample explorer for `example1 | example2 | example3 | appendixS1`.
#[wasm_bindgen]
pub fn paradox_report(kind: &str, alpha: f64, beta: f64, lambda: f64, n: u32, seed: u64) -> String {
    let inner = || -> surreval::Result<ParadoxReport> {
        let spec = parse_spec(kind, alpha, beta)?;
        let n = (n as usize).max(100);
        let grid: Vec<f64> = match spec {
            DgpSpec::Example1 { .. } => vec![0.0, 1.0],
            DgpSpec::ThreePoint => vec![-1.0, 0.0, 1.0],
            _ => (0..=40).map(|i| i as f64 / 40.0).collect(),
        };
        let cates = grid
            .iter()
            .map(|&x| CatePoint {
                x,
                cate_outcome: spec.true_cate_outcome(&[x]),
                cate_surrogate: spec.true_cate_surrogate(&[x]),
            })
            .collect();
        let agreement_curve = (1..=20)
            .map(|i| {
                let l = i as f64 / 20.0;
                Ok(AgreementPoint {
                    lambda: l,
                    agreement: true_policy_agreement(&spec, l, n, seed)?,
                })
            })
            .collect::<surreval::Result<Vec<_>>>()?;
        Ok(ParadoxReport {
            kind: spec.name().to_string(),
            lambda,
            analytic_observed_correlation: spec.analytic_observed_correlation(),
            analytic_potential_correlation: spec.analytic_potential_correlation(),
            sampled_observed_correlation: sampled_observed_correlation(&spec, n, seed)?,
            sampled_potential_correlation: sampled_potential_correlation(&spec, n, seed)?,
            cates,
            agreement_at_lambda: true_policy_agreement(&spec, lambda, n, seed)?,
            agreement_curve,
            itr_values: match spec {
                DgpSpec::ThreePoint => Some(three_point_itr_values(lambda)),
                _ => None,
            },
        })
    };
    match inner() {
        Ok(report) => to_json(&report),
        Err(e) => err_json(e),
    }
}

#[derive(Serialize)]
struct CurvesReport {
    kind: String,
    draws: u64,
    points: Vec<OracleTruth>,
}

/// Oracle metric curves over a λ grid.
#[wasm_bindgen]
pub fn metric_curves(
    kind: &str,
    alpha: f64,
    beta: f64,
    draws: u32,
    grid: u32,
    seed: u64,
) -> String {
    let inner = || -> surreval::Result<CurvesReport> {
        let spec = parse_spec(kind, alpha, beta)?;
        let grid = grid.clamp(2, 100);
        let draws = (draws as u64).max(1000);
        let points = (1..=grid)
            .map(|i| oracle_truth(&spec, i as f64 / grid as f64, draws, seed))
            .collect::<surreval::Result<Vec<_>>>()?;
        Ok(CurvesReport {
            kind: spec.name().to_string(),
            draws,
            points,
        })
    };
    match inner() {
        Ok(report) => to_json(&report),
        Err(e) => err_json(e),
    }
}

#[derive(Serialize)]
struct EstimateReport {
    n: usize,
    folds: usize,
    nuisance: NuisanceKind,
    seed: u64,
    ate_dr: f64,
    estimates: Vec<MetricEstimate>,
    oracle: Vec<OracleTruth>,
}

/// Generate a benchmark dataset, cross-fit the estimators, and return the
/// estimates with analytic intervals plus oracle reference values.
#[wasm_bindgen]
pub fn estimate_demo(n: u32, folds: u32, lambdas_csv: &str, nuisance: &str, seed: u64) -> String {
    let inner = || -> surreval::Result<EstimateReport> {
        let n = (n as usize).clamp(100, 200_000);
        let folds = (folds as usize).max(2);
        let lambdas: Vec<f64> = lambdas_csv
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| surreval::Error::invalid("lambda", format!("bad value {s:?}")))
            })
            .collect::<surreval::Result<Vec<_>>>()?;
        let lambdas = if lambdas.is_empty() {
            vec![0.2, 1.0]
        } else {
            lambdas
        };
        let nuisance: NuisanceKind = nuisance.parse()?;

        let data = generate(&DgpSpec::Sim61, n, seed)?;
        let cfg = CrossfitConfig {
            folds,
            nuisance,
            seed,
            ..CrossfitConfig::default()
        };
        let output = crossfit_single(&data.table, &lambdas, &cfg)?;
        // Modest oracle draws keep the demo interactive in one thread.
        let oracle = lambdas
            .iter()
            .map(|&l| oracle_truth(&DgpSpec::Sim61, l, 400_000, seed ^ 0x5EED))
            .collect::<surreval::Result<Vec<_>>>()?;
        Ok(EstimateReport {
            n,
            folds,
            nuisance,
            seed,
            ate_dr: output.ate_dr,
            estimates: output.into_estimates(),
            oracle,
        })
    };
    match inner() {
        Ok(report) => to_json(&report),
        Err(e) => err_json(e),
    }
}

//! The four subcommand implementations.

use serde::Serialize;

use surreval::bootstrap::{attach_bootstrap, bootstrap_ci, PipelineSpec};
use surreval::data::{read_csv, Endpoint};
use surreval::estimate::MetricEstimate;
use surreval::sim::{
    oracle_truth, run_replications, sampled_observed_correlation, sampled_potential_correlation,
    three_point_itr_values, true_policy_agreement, CiKind, DgpSpec, OracleTruth, ReplicationConfig,
    ReplicationPath, ReplicationReport, ThreePointValues,
};
use surreval::{CrossfitConfig, Metric, NuisanceKind};

use crate::config::{config_hash, install_threads, resolve, resolve_seed, FileConfig};
use crate::output::{emit, meta, opt_cell, Envelope};
use crate::{CliError, EstimateArgs, OracleArgs, ParadoxArgs, SimulateArgs};

fn parse_nuisance(s: &str) -> Result<NuisanceKind, CliError> {
    s.parse().map_err(|e| CliError::schema(format!("{e}")))
}

fn parse_metrics(names: &[String]) -> Result<Vec<Metric>, CliError> {
    if names.is_empty() {
        return Ok(Metric::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| n.parse().map_err(|e| CliError::schema(format!("{e}"))))
        .collect()
}

fn parse_dgp(kind: &str, alpha: Option<f64>, beta: Option<f64>) -> Result<DgpSpec, CliError> {
    DgpSpec::parse(kind, alpha, beta).map_err(|e| CliError::schema(format!("{e}")))
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ResolvedEstimate {
    input: std::path::PathBuf,
    input_surrogate: Option<std::path::PathBuf>,
    lambda: Vec<f64>,
    metric: Vec<Metric>,
    nuisance: NuisanceKind,
    folds: usize,
    bootstrap: usize,
    level: f64,
    format: String,
}

#[derive(Serialize)]
struct EstimatePayload {
    config: ResolvedEstimate,
    n_main: usize,
    ate_dr: f64,
    estimates: Vec<MetricEstimate>,
}

pub fn estimate(args: EstimateArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    install_threads(args.common.threads.or(file.threads))?;

    let input = args
        .input
        .or(file.input)
        .ok_or_else(|| CliError::schema("--input is required"))?;
    let input_surrogate = args.input_surrogate.or(file.input_surrogate);
    let two_dataset = input_surrogate.is_some();
    let resolved = ResolvedEstimate {
        input: input.clone(),
        input_surrogate: input_surrogate.clone(),
        lambda: if args.lambda.is_empty() {
            file.lambda.clone().unwrap_or_else(|| vec![1.0])
        } else {
            args.lambda.clone()
        },
        metric: parse_metrics(&if args.metric.is_empty() {
            file.metric.clone().unwrap_or_default()
        } else {
            args.metric.clone()
        })?,
        nuisance: parse_nuisance(&resolve(
            args.nuisance,
            file.nuisance.clone(),
            "logistic".to_string(),
        ))?,
        // Two-dataset default is the single split; single-dataset default
        // is 5-fold cross-fitting.
        folds: resolve(args.folds, file.folds, if two_dataset { 1 } else { 5 }),
        bootstrap: resolve(args.bootstrap, file.bootstrap, 0),
        level: resolve(args.common.level, file.level, 0.95),
        format: resolve(
            args.common.format.clone(),
            file.format.clone(),
            "json".to_string(),
        ),
    };
    if !two_dataset && resolved.folds < 2 {
        return Err(CliError::schema(
            "single-file estimation cross-fits over folds; pass --folds K with K >= 2",
        ));
    }
    let seed = resolve_seed(args.common.seed, file.seed);
    let hash = config_hash(&resolved);

    let d1 = read_csv(&input).map_err(|e| CliError::schema(format!("{}: {e}", input.display())))?;
    let cfg = CrossfitConfig {
        nuisance: resolved.nuisance,
        folds: resolved.folds,
        level: resolved.level,
        seed,
        ..CrossfitConfig::default()
    };

    let mut output = match &input_surrogate {
        Some(path) => {
            let d2 =
                read_csv(path).map_err(|e| CliError::schema(format!("{}: {e}", path.display())))?;
            d1.endpoint(Endpoint::Outcome)
                .map_err(|e| CliError::schema(format!("{}: {e}", input.display())))?;
            d2.endpoint(Endpoint::Surrogate)
                .map_err(|e| CliError::schema(format!("{}: {e}", path.display())))?;
            surreval::crossfit_split(&d1, &d2, &resolved.lambda, &cfg)
                .map_err(|e| CliError::run("estimate (two-dataset)", e))?
        }
        None => {
            for endpoint in [Endpoint::Outcome, Endpoint::Surrogate] {
                d1.endpoint(endpoint)
                    .map_err(|e| CliError::schema(format!("{}: {e}", input.display())))?;
            }
            surreval::crossfit_single(&d1, &resolved.lambda, &cfg)
                .map_err(|e| CliError::run("estimate (single-dataset)", e))?
        }
    };

    if resolved.bootstrap > 0 {
        let spec = match &input_surrogate {
            Some(path) => {
                let d2 = read_csv(path).map_err(|e| CliError::run("bootstrap", e))?;
                bootstrap_ci(
                    &PipelineSpec::Split { d1: &d1, d2: &d2 },
                    &resolved.lambda,
                    &cfg,
                    resolved.bootstrap,
                    seed,
                )
                .map_err(|e| CliError::run("bootstrap", e))?
            }
            None => bootstrap_ci(
                &PipelineSpec::Single { d: &d1 },
                &resolved.lambda,
                &cfg,
                resolved.bootstrap,
                seed,
            )
            .map_err(|e| CliError::run("bootstrap", e))?,
        };
        attach_bootstrap(&mut output, &spec);
    }

    let kept: Vec<Metric> = resolved.metric.clone();
    let estimates: Vec<MetricEstimate> = output
        .clone()
        .into_estimates()
        .into_iter()
        .filter(|e| kept.contains(&e.metric))
        .collect();

    let format = resolved.format.clone();
    let envelope = Envelope {
        meta: meta("estimate", seed, hash),
        payload: EstimatePayload {
            config: resolved,
            n_main: output.n_main,
            ate_dr: output.ate_dr,
            estimates,
        },
    };
    emit(
        args.common.out.or(file.out).as_deref(),
        &format,
        &envelope,
        || {
            let mut csv = String::from(
            "metric,lambda,point,analytic_se,ci_lo,ci_hi,bootstrap_se,boot_ci_lo,boot_ci_hi,n_main,b_effective\n",
        );
            for e in &envelope.payload.estimates {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{}\n",
                    e.metric.name(),
                    e.lambda,
                    e.point,
                    e.analytic_se,
                    e.ci.0,
                    e.ci.1,
                    opt_cell(e.bootstrap_se),
                    opt_cell(e.bootstrap_ci.map(|c| c.0)),
                    opt_cell(e.bootstrap_ci.map(|c| c.1)),
                    e.n_main,
                    opt_cell(e.b_effective),
                ));
            }
            csv
        },
    )
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SimulatePayload {
    config: ReplicationConfig,
    report: ReplicationReport,
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    install_threads(args.common.threads.or(file.threads))?;

    let reps = resolve(args.reps, file.reps, 1000);
    if reps < 2 {
        return Err(CliError::schema("--reps must be >= 2"));
    }
    let spec = parse_dgp(
        &resolve(args.dgp, file.dgp.clone(), "sim61".to_string()),
        args.alpha.or(file.alpha),
        args.beta.or(file.beta),
    )?;
    let path = match resolve(args.path, file.path.clone(), "single".to_string()).as_str() {
        "single" => ReplicationPath::SingleDataset,
        "split" => ReplicationPath::SplitDataset,
        other => {
            return Err(CliError::schema(format!(
                "unknown path {other:?} (single | split)"
            )))
        }
    };
    let ci = match resolve(args.ci, file.ci.clone(), "analytic".to_string()).as_str() {
        "analytic" => CiKind::Analytic,
        "bootstrap" => CiKind::Bootstrap {
            b: resolve(args.bootstrap, file.bootstrap, 200),
        },
        other => {
            return Err(CliError::schema(format!(
                "unknown ci {other:?} (analytic | bootstrap)"
            )))
        }
    };
    let seed = resolve_seed(args.common.seed, file.seed);
    let cfg = ReplicationConfig {
        spec,
        n: resolve(args.n, file.n, 1000),
        reps,
        lambdas: if args.lambda.is_empty() {
            file.lambda
                .clone()
                .unwrap_or_else(|| vec![0.1, 0.2, 0.3, 0.4, 1.0])
        } else {
            args.lambda.clone()
        },
        path,
        estimator: CrossfitConfig {
            nuisance: parse_nuisance(&resolve(
                args.nuisance,
                file.nuisance.clone(),
                "logistic".into(),
            ))?,
            folds: resolve(args.folds, file.folds, 2),
            level: resolve(args.common.level, file.level, 0.95),
            seed: 0, // per-replication seeds derive from master_seed
            ..CrossfitConfig::default()
        },
        ci,
        oracle_draws: resolve(args.oracle_draws, file.oracle_draws, 10_000_000),
        master_seed: seed,
    };
    let hash = config_hash(&cfg);

    let report = run_replications(&cfg).map_err(|e| CliError::run("simulate", e))?;
    let format = resolve(args.common.format, file.format, "csv".to_string());
    let envelope = Envelope {
        meta: meta("simulate", seed, hash),
        payload: SimulatePayload {
            config: cfg,
            report,
        },
    };
    emit(
        args.common.out.or(file.out).as_deref(),
        &format,
        &envelope,
        || envelope.payload.report.to_csv_string(),
    )
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ResolvedOracle {
    dgp: String,
    alpha: Option<f64>,
    beta: Option<f64>,
    lambda: Vec<f64>,
    draws: u64,
}

#[derive(Serialize)]
struct OraclePayload {
    config: ResolvedOracle,
    values: Vec<OracleTruth>,
    #[serde(skip_serializing_if = "Option::is_none")]
    itr_values: Option<ThreePointValues>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

pub fn oracle(args: OracleArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    install_threads(args.common.threads.or(file.threads))?;

    let resolved = ResolvedOracle {
        dgp: resolve(args.dgp, file.dgp.clone(), "sim61".to_string()),
        alpha: args.alpha.or(file.alpha),
        beta: args.beta.or(file.beta),
        lambda: if args.lambda.is_empty() {
            file.lambda.clone().unwrap_or_else(|| vec![1.0])
        } else {
            args.lambda.clone()
        },
        draws: resolve(args.draws, file.draws, 10_000_000),
    };
    let spec = parse_dgp(&resolved.dgp, resolved.alpha, resolved.beta)?;
    let seed = resolve_seed(args.common.seed, file.seed);
    let hash = config_hash(&resolved);

    let mut warnings = Vec::new();
    let mut values = Vec::with_capacity(resolved.lambda.len());
    for &l in &resolved.lambda {
        let truth =
            oracle_truth(&spec, l, resolved.draws, seed).map_err(|e| CliError::run("oracle", e))?;
        let scale = truth
            .regret
            .abs()
            .max(truth.gain.abs())
            .max(truth.efficiency.abs());
        if truth.draws > 0 && truth.mc_se > 0.0 && truth.mc_se * 2.0 > scale {
            warnings.push(format!(
                "lambda={l}: mc_se {:.2e} dominates the oracle values; increase --draws",
                truth.mc_se
            ));
        }
        values.push(truth);
    }
    let itr_values = match spec {
        DgpSpec::ThreePoint => Some(three_point_itr_values(
            resolved.lambda.first().copied().unwrap_or(1.0),
        )),
        _ => None,
    };

    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let format = resolve(args.common.format, file.format, "json".to_string());
    let envelope = Envelope {
        meta: meta("oracle", seed, hash),
        payload: OraclePayload {
            config: resolved,
            values,
            itr_values,
            warnings,
        },
    };
    emit(
        args.common.out.or(file.out).as_deref(),
        &format,
        &envelope,
        || {
            let mut csv = String::from(
                "lambda,regret,gain,efficiency,ate,y_threshold,s_threshold,mc_se,draws\n",
            );
            for v in &envelope.payload.values {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    v.lambda,
                    v.regret,
                    v.gain,
                    v.efficiency,
                    v.ate,
                    v.y_threshold,
                    v.s_threshold,
                    v.mc_se,
                    v.draws
                ));
            }
            csv
        },
    )
}

// ---------------------------------------------------------------------------
// paradox
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CateAtPoint {
    x: f64,
    cate_outcome: f64,
    cate_surrogate: f64,
}

#[derive(Serialize)]
struct ParadoxPayload {
    kind: String,
    alpha: Option<f64>,
    beta: Option<f64>,
    lambda: f64,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic_observed_correlation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic_potential_correlation: Option<f64>,
    sampled_observed_correlation: f64,
    sampled_potential_correlation: f64,
    cates: Vec<CateAtPoint>,
    oracle: OracleTruth,
    /// Overlap of the treated sets of the two true budget rules.
    policy_agreement: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    itr_values: Option<ThreePointValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    surrogate_rule_worse_than_random: Option<bool>,
}

pub fn paradox(args: ParadoxArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    install_threads(args.common.threads.or(file.threads))?;

    let kind = resolve(args.kind, file.kind.clone(), "example1".to_string());
    let alpha = args.alpha.or(file.alpha);
    let beta = args.beta.or(file.beta);
    let spec = parse_dgp(&kind, alpha, beta)?;
    if matches!(spec, DgpSpec::Sim61) {
        return Err(CliError::schema(
            "paradox kinds are example1 | example2 | example3 | appendixS1",
        ));
    }
    let lambda = resolve(
        args.lambda,
        file.lambda.as_ref().and_then(|l| l.first().copied()),
        0.5,
    );
    let n = resolve(args.n, file.n, 1_000_000);
    let draws = resolve(args.draws, file.draws, 1_000_000);
    let seed = resolve_seed(args.common.seed, file.seed);

    #[derive(Serialize)]
    struct ResolvedParadox<'a> {
        kind: &'a str,
        alpha: Option<f64>,
        beta: Option<f64>,
        lambda: f64,
        n: usize,
        draws: u64,
    }
    let hash = config_hash(&ResolvedParadox {
        kind: &kind,
        alpha,
        beta,
        lambda,
        n,
        draws,
    });

    let grid: &[f64] = match spec {
        DgpSpec::Example1 { .. } => &[0.0, 1.0],
        DgpSpec::ThreePoint => &[-1.0, 0.0, 1.0],
        _ => &[0.0, 0.25, 0.5, 0.75, 1.0],
    };
    let cates = grid
        .iter()
        .map(|&x| CateAtPoint {
            x,
            cate_outcome: spec.true_cate_outcome(&[x]),
            cate_surrogate: spec.true_cate_surrogate(&[x]),
        })
        .collect();

    let run = |stage: &str, r: surreval::Result<f64>| -> Result<f64, CliError> {
        r.map_err(|e| CliError::run(stage, e))
    };
    let oracle =
        oracle_truth(&spec, lambda, draws, seed).map_err(|e| CliError::run("oracle", e))?;
    let itr_values = match spec {
        DgpSpec::ThreePoint => Some(three_point_itr_values(lambda)),
        _ => None,
    };
    let payload = ParadoxPayload {
        kind: kind.clone(),
        alpha,
        beta,
        lambda,
        n,
        analytic_observed_correlation: spec.analytic_observed_correlation(),
        analytic_potential_correlation: spec.analytic_potential_correlation(),
        sampled_observed_correlation: run(
            "sample correlation",
            sampled_observed_correlation(&spec, n, seed),
        )?,
        sampled_potential_correlation: run(
            "sample correlation",
            sampled_potential_correlation(&spec, n, seed),
        )?,
        cates,
        oracle,
        policy_agreement: run(
            "policy agreement",
            true_policy_agreement(&spec, lambda, n, seed),
        )?,
        surrogate_rule_worse_than_random: itr_values
            .map(|v| v.surrogate_itr_value < v.random_itr_value),
        itr_values,
    };

    // Human-readable summary alongside the artifact.
    println!(
        "{kind}: lambda={lambda} agreement={:.4} regret={:+.5} gain={:+.5} efficiency={:+.5}",
        payload.policy_agreement,
        payload.oracle.regret,
        payload.oracle.gain,
        payload.oracle.efficiency
    );
    if let Some(c) = payload.analytic_observed_correlation {
        println!(
            "observed corr: analytic {c:+.4}, sampled {:+.4}",
            payload.sampled_observed_correlation
        );
    }
    if let Some(c) = payload.analytic_potential_correlation {
        println!(
            "potential corr: analytic {c:+.4}, sampled {:+.4}",
            payload.sampled_potential_correlation
        );
    }
    if let Some(v) = &payload.itr_values {
        println!(
            "rule values: outcome {:.4}, transformed surrogate {:.4}, random {:.4}{}",
            v.outcome_itr_value,
            v.surrogate_itr_value,
            v.random_itr_value,
            if v.surrogate_itr_value < v.random_itr_value {
                "  (surrogate rule is worse than random)"
            } else {
                ""
            }
        );
    }

    let format = resolve(args.common.format, file.format, "json".to_string());
    let envelope = Envelope {
        meta: meta("paradox", seed, hash),
        payload,
    };
    emit(
        args.common.out.or(file.out).as_deref(),
        &format,
        &envelope,
        || {
            let p = &envelope.payload;
            let mut csv = String::from("key,value\n");
            let mut kv = |k: &str, v: String| csv.push_str(&format!("{k},{v}\n"));
            kv("kind", p.kind.clone());
            kv("lambda", p.lambda.to_string());
            kv("policy_agreement", p.policy_agreement.to_string());
            kv("regret", p.oracle.regret.to_string());
            kv("gain", p.oracle.gain.to_string());
            kv("efficiency", p.oracle.efficiency.to_string());
            if let Some(c) = p.analytic_observed_correlation {
                kv("analytic_observed_correlation", c.to_string());
            }
            kv(
                "sampled_observed_correlation",
                p.sampled_observed_correlation.to_string(),
            );
            if let Some(c) = p.analytic_potential_correlation {
                kv("analytic_potential_correlation", c.to_string());
            }
            kv(
                "sampled_potential_correlation",
                p.sampled_potential_correlation.to_string(),
            );
            if let Some(v) = &p.itr_values {
                kv("outcome_itr_value", v.outcome_itr_value.to_string());
                kv("surrogate_itr_value", v.surrogate_itr_value.to_string());
                kv("random_itr_value", v.random_itr_value.to_string());
            }
            csv
        },
    )
}

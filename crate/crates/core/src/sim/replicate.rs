//! Replication study driver: bias / SD / coverage of the estimators against
//! oracle truth, reported in the benchmark table layout.

use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_ci, PipelineSpec};
use crate::data::Endpoint;
use crate::error::{Error, Result};
use crate::estimate::{crossfit_single, crossfit_split, CrossfitConfig, CrossfitOutput, Metric};
use crate::math::{mean, sample_sd};
use crate::par::par_map_indexed;
use crate::rng::derive_seed;
use crate::sim::{generate, oracle_truth, DgpSpec, OracleTruth};

/// Which estimation pipeline each replication runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "path", rename_all = "snake_case")]
pub enum ReplicationPath {
    /// One generated dataset of size n carrying both endpoints.
    SingleDataset,
    /// Two generated datasets of size n each; the first keeps only the
    /// outcome, the second only the surrogate.
    SplitDataset,
}

/// Which confidence interval coverage is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "ci", rename_all = "snake_case")]
pub enum CiKind {
    Analytic,
    Bootstrap { b: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationConfig {
    pub spec: DgpSpec,
    pub n: usize,
    pub reps: usize,
    pub lambdas: Vec<f64>,
    pub path: ReplicationPath,
    pub estimator: CrossfitConfig,
    pub ci: CiKind,
    /// Monte Carlo draws for the oracle reference values.
    pub oracle_draws: u64,
    pub master_seed: u64,
}

/// One report row: Monte Carlo bias, SD, and CI coverage for one
/// (metric, λ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub metric: Metric,
    pub lambda: f64,
    pub n: usize,
    pub reps: usize,
    pub bias: f64,
    pub sd: f64,
    pub cp95: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub rows: Vec<ReplicationRow>,
    pub oracles: Vec<OracleTruth>,
    pub master_seed: u64,
    pub n: usize,
    pub reps: usize,
    pub failures: usize,
}

impl ReplicationReport {
    /// CSV with columns (metric, lambda, n, reps, bias, sd, cp95, failures).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("metric,lambda,n,reps,bias,sd,cp95,failures\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.metric.name(),
                r.lambda,
                r.n,
                r.reps,
                r.bias,
                r.sd,
                r.cp95,
                r.failures
            ));
        }
        out
    }

    pub fn row(&self, metric: Metric, lambda: f64) -> Option<&ReplicationRow> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && r.lambda == lambda)
    }
}

struct RepOutcome {
    /// (point, ci_lo, ci_hi) per (λ index, metric index).
    cells: Vec<[(f64, f64, f64); 3]>,
}

fn run_one_replication(cfg: &ReplicationConfig, rep_seed: u64) -> Result<RepOutcome> {
    let mut est_cfg = cfg.estimator.clone();
    est_cfg.seed = derive_seed(rep_seed, 2);

    enum Data {
        Single(crate::data::ObservationTable),
        Split(crate::data::ObservationTable, crate::data::ObservationTable),
    }

    let data = match cfg.path {
        ReplicationPath::SingleDataset => {
            Data::Single(generate(&cfg.spec, cfg.n, derive_seed(rep_seed, 0))?.table)
        }
        ReplicationPath::SplitDataset => {
            let d1 = generate(&cfg.spec, cfg.n, derive_seed(rep_seed, 0))?
                .table
                .drop_endpoint(Endpoint::Surrogate)?;
            let d2 = generate(&cfg.spec, cfg.n, derive_seed(rep_seed, 1))?
                .table
                .drop_endpoint(Endpoint::Outcome)?;
            Data::Split(d1, d2)
        }
    };

    let output: CrossfitOutput = match &data {
        Data::Single(d) => crossfit_single(d, &cfg.lambdas, &est_cfg)?,
        Data::Split(d1, d2) => crossfit_split(d1, d2, &cfg.lambdas, &est_cfg)?,
    };

    let mut cells: Vec<[(f64, f64, f64); 3]> = output
        .per_lambda
        .iter()
        .map(|l| {
            [Metric::Regret, Metric::Gain, Metric::Efficiency].map(|m| {
                let e = l.get(m);
                (e.point, e.ci.0, e.ci.1)
            })
        })
        .collect();

    if let CiKind::Bootstrap { b } = cfg.ci {
        let spec = match &data {
            Data::Single(d) => PipelineSpec::Single { d },
            Data::Split(d1, d2) => PipelineSpec::Split { d1, d2 },
        };
        let summaries = bootstrap_ci(
            &spec,
            &cfg.lambdas,
            &cfg.estimator,
            b,
            derive_seed(rep_seed, 3),
        )?;
        for s in &summaries {
            let l = cfg
                .lambdas
                .iter()
                .position(|&x| x == s.lambda)
                .expect("summary lambda comes from the request list");
            let m = Metric::ALL
                .iter()
                .position(|&x| x == s.metric)
                .expect("metric");
            cells[l][m].1 = s.ci.0;
            cells[l][m].2 = s.ci.1;
        }
    }

    Ok(RepOutcome { cells })
}

/// Run the replication study. Replications are independent seeded tasks;
/// the report is a pure function of the config (including `master_seed`)
/// and in particular does not depend on thread count.
pub fn run_replications(cfg: &ReplicationConfig) -> Result<ReplicationReport> {
    if cfg.reps < 2 {
        return Err(Error::invalid("reps", "need at least 2 replications"));
    }
    for &l in &cfg.lambdas {
        crate::policy::validate_lambda(l)?;
    }

    // Oracle reference values per λ (task index 0; replications are 1..).
    let oracle_seed = derive_seed(cfg.master_seed, 0);
    let oracles: Vec<OracleTruth> = cfg
        .lambdas
        .iter()
        .map(|&l| oracle_truth(&cfg.spec, l, cfg.oracle_draws, oracle_seed))
        .collect::<Result<Vec<_>>>()?;

    let outcomes: Vec<Result<RepOutcome>> = par_map_indexed(cfg.reps, |r| {
        run_one_replication(cfg, derive_seed(cfg.master_seed, 1 + r as u64))
    });

    let successes: Vec<&RepOutcome> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let failures = cfg.reps - successes.len();
    if successes.len() < 2 {
        return Err(Error::EmptyInput("fewer than 2 replications succeeded"));
    }

    let mut rows = Vec::new();
    for (l, oracle) in oracles.iter().enumerate() {
        for (m, metric) in Metric::ALL.into_iter().enumerate() {
            let truth = match metric {
                Metric::Regret => oracle.regret,
                Metric::Gain => oracle.gain,
                Metric::Efficiency => oracle.efficiency,
            };
            let points: Vec<f64> = successes.iter().map(|o| o.cells[l][m].0).collect();
            let covered = successes
                .iter()
                .filter(|o| {
                    let (_, lo, hi) = o.cells[l][m];
                    lo <= truth && truth <= hi
                })
                .count();
            rows.push(ReplicationRow {
                metric,
                lambda: cfg.lambdas[l],
                n: cfg.n,
                reps: cfg.reps,
                bias: mean(&points) - truth,
                sd: sample_sd(&points),
                cp95: covered as f64 / successes.len() as f64,
                failures,
            });
        }
    }

    Ok(ReplicationReport {
        rows,
        oracles,
        master_seed: cfg.master_seed,
        n: cfg.n,
        reps: cfg.reps,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke_config() -> ReplicationConfig {
        ReplicationConfig {
            spec: DgpSpec::Sim61,
            n: 120,
            reps: 3,
            lambdas: vec![0.5, 1.0],
            path: ReplicationPath::SingleDataset,
            estimator: CrossfitConfig {
                folds: 2,
                ..CrossfitConfig::default()
            },
            ci: CiKind::Analytic,
            oracle_draws: 20_000,
            master_seed: 314,
        }
    }

    #[test]
    fn smoke_report_has_finite_cells_and_no_failures() {
        let report = run_replications(&smoke_config()).unwrap();
        assert_eq!(report.rows.len(), 6);
        assert_eq!(report.failures, 0);
        for row in &report.rows {
            assert!(row.bias.is_finite() && row.sd.is_finite());
            assert!((0.0..=1.0).contains(&row.cp95));
        }
        let csv = report.to_csv_string();
        assert!(csv.starts_with("metric,lambda,n,reps,bias,sd,cp95,failures\n"));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn single_rep_is_rejected() {
        let mut cfg = smoke_config();
        cfg.reps = 1;
        assert!(run_replications(&cfg).is_err());
    }

    #[test]
    fn report_is_reproducible_from_the_master_seed() {
        let a = run_replications(&smoke_config()).unwrap();
        let b = run_replications(&smoke_config()).unwrap();
        assert_eq!(a, b);
    }
}

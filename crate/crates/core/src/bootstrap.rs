//! Nonparametric bootstrap over the full estimation pipeline.
//!
//! Each replicate resamples rows with replacement *within each dataset* and
//! reruns everything, nuisance fits included, so the interval reflects
//! nuisance variability as well as sampling noise. Intervals are percentile
//! intervals over the replicate point estimates.
//!
//! A replicate whose pipeline fails (for example a resample that loses a
//! treatment arm inside a fold) is retried once with a fresh resample and
//! then skipped; the number skipped is reported and the interval uses the
//! effective replicate count.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::ObservationTable;
use crate::error::{Error, Result};
use crate::estimate::{crossfit_single, crossfit_split, CrossfitConfig, CrossfitOutput, Metric};
use crate::math::{quantile_at, sample_sd};
use crate::par::par_map_indexed;
use crate::rng::{derive_seed, rng_from_seed};

/// Which pipeline the bootstrap reruns.
#[derive(Debug, Clone, Copy)]
pub enum PipelineSpec<'a> {
    /// Two datasets: `d1` carries the outcome, `d2` the surrogate.
    Split {
        d1: &'a ObservationTable,
        d2: &'a ObservationTable,
    },
    /// One dataset carrying both endpoints.
    Single { d: &'a ObservationTable },
}

/// Percentile interval for one (metric, λ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub metric: Metric,
    pub lambda: f64,
    pub se: f64,
    pub ci: (f64, f64),
    pub level: f64,
    pub b_requested: usize,
    pub b_effective: usize,
    pub b_skipped: usize,
}

fn resample(table: &ObservationTable, rng: &mut impl Rng) -> ObservationTable {
    let n = table.n();
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    table.subset(&idx)
}

fn run_once(
    spec: &PipelineSpec,
    lambdas: &[f64],
    config: &CrossfitConfig,
    replicate_seed: u64,
) -> Result<CrossfitOutput> {
    let mut rng = rng_from_seed(replicate_seed);
    let mut config = config.clone();
    config.seed = derive_seed(replicate_seed, u64::MAX);
    match spec {
        PipelineSpec::Split { d1, d2 } => {
            let r1 = resample(d1, &mut rng);
            let r2 = resample(d2, &mut rng);
            crossfit_split(&r1, &r2, lambdas, &config)
        }
        PipelineSpec::Single { d } => {
            let r = resample(d, &mut rng);
            crossfit_single(&r, lambdas, &config)
        }
    }
}

/// Run `b` full-pipeline bootstrap replicates and form percentile intervals
/// at `config.level`. Deterministic in `seed` and independent of thread
/// count (per-replicate derived seeds, ordered aggregation).
pub fn bootstrap_ci(
    spec: &PipelineSpec,
    lambdas: &[f64],
    config: &CrossfitConfig,
    b: usize,
    seed: u64,
) -> Result<Vec<BootstrapSummary>> {
    if b < 100 {
        return Err(Error::invalid("bootstrap", "need at least 100 resamples"));
    }
    // One replicate = up to two attempts (retry with the next resample from
    // the same derived stream), then skip.
    let runs: Vec<Option<CrossfitOutput>> = par_map_indexed(b, |i| {
        let base = derive_seed(seed, i as u64);
        run_once(spec, lambdas, config, base)
            .or_else(|_| run_once(spec, lambdas, config, derive_seed(base, 1)))
            .ok()
    });

    let successes: Vec<&CrossfitOutput> = runs.iter().flatten().collect();
    let b_effective = successes.len();
    let b_skipped = b - b_effective;
    if b_effective == 0 {
        return Err(Error::EmptyInput("every bootstrap replicate failed"));
    }

    let alpha = 1.0 - config.level;
    let mut out = Vec::with_capacity(lambdas.len() * Metric::ALL.len());
    for (l, &lambda) in lambdas.iter().enumerate() {
        for metric in Metric::ALL {
            let points: Vec<f64> = successes
                .iter()
                .map(|o| o.per_lambda[l].get(metric).point)
                .collect();
            let lo = quantile_at(&points, 0.5 * alpha);
            let hi = quantile_at(&points, 1.0 - 0.5 * alpha);
            out.push(BootstrapSummary {
                metric,
                lambda,
                se: sample_sd(&points),
                ci: (lo, hi),
                level: config.level,
                b_requested: b,
                b_effective,
                b_skipped,
            });
        }
    }
    Ok(out)
}

/// Copy bootstrap columns onto matching estimates in a [`CrossfitOutput`].
pub fn attach_bootstrap(output: &mut CrossfitOutput, summaries: &[BootstrapSummary]) {
    for s in summaries {
        for l in &mut output.per_lambda {
            if l.lambda == s.lambda {
                let est = match s.metric {
                    Metric::Regret => &mut l.regret,
                    Metric::Gain => &mut l.gain,
                    Metric::Efficiency => &mut l.efficiency,
                };
                est.bootstrap_se = Some(s.se);
                est.bootstrap_ci = Some(s.ci);
                est.b_effective = Some(s.b_effective);
            }
        }
    }
}

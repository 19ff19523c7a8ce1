//! Synthetic worlds with known ground truth.
//!
//! [`DgpSpec`] parameterizes every data-generating process used for
//! validation and demonstration:
//!
//! - `sim61` — the binary-endpoint benchmark world: bivariate normal
//!   covariates, logistic propensity, and Bernoulli potential outcomes and
//!   surrogates with logistic means. This is the world the replication
//!   study reproduces.
//! - `example1` — strong *observed* correlation between surrogate and
//!   outcome while their average treatment effects have opposite signs.
//! - `example2` — strong *potential-outcome* correlation with opposite
//!   constant treatment effects.
//! - `example3` — both CATEs uniformly positive (sign-consistent) yet with
//!   opposite rankings in x, so budget constraints reverse who gets
//!   treated.
//! - `appendixS1` (three-point world) — a discrete covariate with
//!   deterministic potential outcomes where the identity-transformed
//!   surrogate rule is worse than random assignment.
//!
//! [`oracle_truth`] brute-forces the defining expectations of the three
//! metrics (exactly, for the discrete world; by seeded Monte Carlo
//! otherwise) and is the reference every estimator is tested against.

mod replicate;

pub use replicate::{
    run_replications, CiKind, ReplicationConfig, ReplicationPath, ReplicationReport, ReplicationRow,
};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{ObservationTable, PotentialTable};
use crate::error::{Error, Result};
use crate::math::{correlation, expit, mean, quantile_at, sample_sd};
use crate::par::par_map_indexed;
use crate::policy::{assign, budget_policy, policy_agreement, validate_lambda, CateVector};
use crate::rng::{derive_seed, rng_from_seed};

/// A parameterized data-generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DgpSpec {
    /// Benchmark binary-endpoint world.
    Sim61,
    /// Observed-correlation counterexample, `S = A + αX + ε`.
    Example1 { alpha: f64 },
    /// Potential-correlation counterexample, constant effects ±α.
    Example2 { alpha: f64, beta: f64 },
    /// Sign-preserving counterexample with reversed rankings; α, β > 0.
    Example3 { alpha: f64, beta: f64 },
    /// Three-point discrete world with deterministic potential outcomes.
    ThreePoint,
}

/// The deterministic potential-outcome table of the three-point world,
/// keyed by x in {-1, 0, 1}: (s0, s1, y0, y1).
const THREE_POINT: [(f64, f64, f64, f64); 3] = [
    (2.0, 3.0, 4.0, 3.0), // x = -1
    (3.0, 2.0, 3.0, 4.0), // x = 0
    (2.0, 2.0, 0.0, 0.0), // x = 1
];

fn three_point_index(x: f64) -> usize {
    if x < -0.5 {
        0
    } else if x < 0.5 {
        1
    } else {
        2
    }
}

impl DgpSpec {
    pub fn parse(kind: &str, alpha: Option<f64>, beta: Option<f64>) -> Result<DgpSpec> {
        let need_alpha = || alpha.ok_or_else(|| Error::invalid("alpha", "required for this kind"));
        let need_beta = || beta.ok_or_else(|| Error::invalid("beta", "required for this kind"));
        let spec = match kind.to_ascii_lowercase().as_str() {
            "sim61" => DgpSpec::Sim61,
            "example1" => DgpSpec::Example1 { alpha: need_alpha()? },
            "example2" => DgpSpec::Example2 {
                alpha: need_alpha()?,
                beta: need_beta()?,
            },
            "example3" => DgpSpec::Example3 {
                alpha: need_alpha()?,
                beta: need_beta()?,
            },
            "appendixs1" | "three_point" | "threepoint" => DgpSpec::ThreePoint,
            other => {
                return Err(Error::invalid(
                    "dgp",
                    format!(
                        "unknown kind {other:?} (expected sim61 | example1 | example2 | example3 | appendixS1)"
                    ),
                ))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DgpSpec::Example3 { alpha, beta } if !(alpha > 0.0 && beta > 0.0) => Err(
                Error::invalid("alpha/beta", "example3 requires alpha > 0 and beta > 0"),
            ),
            DgpSpec::Example1 { alpha } if !alpha.is_finite() => {
                Err(Error::invalid("alpha", "must be finite"))
            }
            DgpSpec::Example2 { alpha, beta } if !(alpha.is_finite() && beta.is_finite()) => {
                Err(Error::invalid("alpha/beta", "must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DgpSpec::Sim61 => "sim61",
            DgpSpec::Example1 { .. } => "example1",
            DgpSpec::Example2 { .. } => "example2",
            DgpSpec::Example3 { .. } => "example3",
            DgpSpec::ThreePoint => "appendixS1",
        }
    }

    /// Covariate dimension of generated tables.
    pub fn dim(&self) -> usize {
        match self {
            DgpSpec::Sim61 => 2,
            _ => 1,
        }
    }

    /// True propensity score at x.
    pub fn true_propensity(&self, x: &[f64]) -> f64 {
        match self {
            DgpSpec::Sim61 => expit(0.1 * x[0] + 0.1 * x[1]),
            _ => 0.5,
        }
    }

    /// True conditional mean of the outcome given arm and x.
    pub fn true_outcome_mean(&self, arm: u8, x: &[f64]) -> f64 {
        match *self {
            DgpSpec::Sim61 => {
                if arm == 1 {
                    expit(0.3 * x[0] + 0.1 * x[1])
                } else {
                    expit(0.5 * x[0] + 0.3 * x[1])
                }
            }
            DgpSpec::Example1 { alpha } => -f64::from(arm) + alpha * x[0],
            DgpSpec::Example2 { alpha, beta } => beta * x[0] - f64::from(arm == 0) * alpha,
            DgpSpec::Example3 { alpha, beta } => f64::from(arm == 0) * (-alpha + beta * x[0]),
            DgpSpec::ThreePoint => {
                let (_, _, y0, y1) = THREE_POINT[three_point_index(x[0])];
                if arm == 1 {
                    y1
                } else {
                    y0
                }
            }
        }
    }

    /// True conditional mean of the surrogate given arm and x.
    pub fn true_surrogate_mean(&self, arm: u8, x: &[f64]) -> f64 {
        match *self {
            DgpSpec::Sim61 => {
                if arm == 1 {
                    expit(0.1 * x[0] + 0.1 * x[1])
                } else {
                    expit(0.5 * x[0] + 0.2 * x[1])
                }
            }
            DgpSpec::Example1 { alpha } => f64::from(arm) + alpha * x[0],
            DgpSpec::Example2 { alpha, beta } => beta * x[0] + f64::from(arm == 0) * alpha,
            DgpSpec::Example3 { alpha, beta } => f64::from(arm == 0) * (-alpha - beta * x[0]),
            DgpSpec::ThreePoint => {
                let (s0, s1, _, _) = THREE_POINT[three_point_index(x[0])];
                if arm == 1 {
                    s1
                } else {
                    s0
                }
            }
        }
    }

    /// True outcome CATE, written in closed form so that worlds with a
    /// constant effect produce bit-identical values on every row (the
    /// strict tie rule at a degenerate quantile depends on this).
    pub fn true_cate_outcome(&self, x: &[f64]) -> f64 {
        match *self {
            DgpSpec::Example1 { .. } => -1.0,
            DgpSpec::Example2 { alpha, .. } => alpha,
            DgpSpec::Example3 { alpha, beta } => alpha - beta * x[0],
            _ => self.true_outcome_mean(1, x) - self.true_outcome_mean(0, x),
        }
    }

    /// True surrogate CATE; see [`DgpSpec::true_cate_outcome`].
    pub fn true_cate_surrogate(&self, x: &[f64]) -> f64 {
        match *self {
            DgpSpec::Example1 { .. } => 1.0,
            DgpSpec::Example2 { alpha, .. } => -alpha,
            DgpSpec::Example3 { alpha, beta } => alpha + beta * x[0],
            _ => self.true_surrogate_mean(1, x) - self.true_surrogate_mean(0, x),
        }
    }

    /// Closed-form correlation between the *observed* S and Y, where one is
    /// known (example1): `0.25(α² − 1) / (1.25 + 0.25α²)`.
    pub fn analytic_observed_correlation(&self) -> Option<f64> {
        match *self {
            DgpSpec::Example1 { alpha } => {
                Some(0.25 * (alpha * alpha - 1.0) / (1.25 + 0.25 * alpha * alpha))
            }
            _ => None,
        }
    }

    /// Closed-form correlation between potential pairs (S(a), Y(a)), where
    /// one is known (example2): `β² / (β² + 12)`.
    pub fn analytic_potential_correlation(&self) -> Option<f64> {
        match *self {
            DgpSpec::Example2 { beta, .. } => Some(beta * beta / (beta * beta + 12.0)),
            _ => None,
        }
    }
}

/// A generated dataset together with its (simulation-only) potentials.
#[derive(Debug, Clone)]
pub struct GeneratedData {
    pub table: ObservationTable,
    pub potentials: PotentialTable,
}

/// Draw `n` rows from the process. Per-row draw order is fixed, so the
/// output is a pure function of `(spec, n, seed)`.
pub fn generate(spec: &DgpSpec, n: usize, seed: u64) -> Result<GeneratedData> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let d = spec.dim();
    let mut xs = Vec::with_capacity(n * d);
    let mut a = Vec::with_capacity(n);
    let mut y0 = Vec::with_capacity(n);
    let mut y1 = Vec::with_capacity(n);
    let mut s0 = Vec::with_capacity(n);
    let mut s1 = Vec::with_capacity(n);

    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let x_normal = Normal::new(0.0, 0.2).expect("covariate normal");

    for _ in 0..n {
        let x: Vec<f64> = match spec {
            DgpSpec::Sim61 => vec![x_normal.sample(&mut rng), x_normal.sample(&mut rng)],
            DgpSpec::Example1 { .. } => vec![f64::from(rng.random::<f64>() < 0.5)],
            DgpSpec::Example2 { .. } | DgpSpec::Example3 { .. } => vec![rng.random::<f64>()],
            DgpSpec::ThreePoint => {
                let u = rng.random::<f64>();
                vec![if u < 1.0 / 3.0 {
                    -1.0
                } else if u < 2.0 / 3.0 {
                    0.0
                } else {
                    1.0
                }]
            }
        };
        let treat = u8::from(rng.random::<f64>() < spec.true_propensity(&x));

        match spec {
            DgpSpec::Sim61 => {
                // Independent Bernoulli potentials with logistic means.
                y1.push(f64::from(
                    rng.random::<f64>() < spec.true_outcome_mean(1, &x),
                ));
                y0.push(f64::from(
                    rng.random::<f64>() < spec.true_outcome_mean(0, &x),
                ));
                s1.push(f64::from(
                    rng.random::<f64>() < spec.true_surrogate_mean(1, &x),
                ));
                s0.push(f64::from(
                    rng.random::<f64>() < spec.true_surrogate_mean(0, &x),
                ));
            }
            DgpSpec::ThreePoint => {
                let (ps0, ps1, py0, py1) = THREE_POINT[three_point_index(x[0])];
                y0.push(py0);
                y1.push(py1);
                s0.push(ps0);
                s1.push(ps1);
            }
            _ => {
                // Additive Gaussian noise shared across the two arms of the
                // same variable, as in the structural equations.
                let eps_s = std_normal.sample(&mut rng);
                let eps_y = std_normal.sample(&mut rng);
                s0.push(spec.true_surrogate_mean(0, &x) + eps_s);
                s1.push(spec.true_surrogate_mean(1, &x) + eps_s);
                y0.push(spec.true_outcome_mean(0, &x) + eps_y);
                y1.push(spec.true_outcome_mean(1, &x) + eps_y);
            }
        }
        xs.extend_from_slice(&x);
        a.push(treat);
    }

    let potentials = PotentialTable { y0, y1, s0, s1 };
    let (y, s) = potentials.realize(&a);
    let table = ObservationTable::new(
        crate::data::FeatureMatrix::new(xs, n, d)?,
        a,
        Some(y),
        Some(s),
    )?;
    Ok(GeneratedData { table, potentials })
}

/// Ground-truth metric values for one (spec, λ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleTruth {
    pub lambda: f64,
    pub regret: f64,
    pub gain: f64,
    pub efficiency: f64,
    /// Population average treatment effect on the outcome.
    pub ate: f64,
    pub y_threshold: f64,
    pub s_threshold: f64,
    /// Worst-case Monte Carlo standard error across the three metrics;
    /// exactly 0 for discrete worlds, which are enumerated.
    pub mc_se: f64,
    pub draws: u64,
}

/// Brute-force the defining expectations of the three metrics.
///
/// Continuous worlds: draw `draws` covariates, evaluate the closed-form
/// CATEs, take the budget thresholds from the empirical CATE distribution,
/// and average the defining integrands. The discrete world is enumerated
/// exactly.
pub fn oracle_truth(spec: &DgpSpec, lambda: f64, draws: u64, seed: u64) -> Result<OracleTruth> {
    spec.validate()?;
    validate_lambda(lambda)?;
    if let DgpSpec::ThreePoint = spec {
        return Ok(three_point_oracle(lambda));
    }
    if draws == 0 {
        return Err(Error::invalid("draws", "must be >= 1"));
    }

    // Draw CATE values in fixed-size chunks with per-chunk derived seeds:
    // the result is independent of thread scheduling.
    const CHUNK: u64 = 1 << 16;
    let chunks = draws.div_ceil(CHUNK);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = par_map_indexed(chunks as usize, |c| {
        let mut rng = rng_from_seed(derive_seed(seed, c as u64));
        let m = CHUNK.min(draws - (c as u64) * CHUNK) as usize;
        let mut ty = Vec::with_capacity(m);
        let mut ts = Vec::with_capacity(m);
        let x_normal = Normal::new(0.0, 0.2).expect("covariate normal");
        for _ in 0..m {
            let x: Vec<f64> = match spec {
                DgpSpec::Sim61 => vec![x_normal.sample(&mut rng), x_normal.sample(&mut rng)],
                DgpSpec::Example1 { .. } => vec![f64::from(rng.random::<f64>() < 0.5)],
                _ => vec![rng.random::<f64>()],
            };
            ty.push(spec.true_cate_outcome(&x));
            ts.push(spec.true_cate_surrogate(&x));
        }
        (ty, ts)
    });
    let mut tau_y = Vec::with_capacity(draws as usize);
    let mut tau_s = Vec::with_capacity(draws as usize);
    for (ty, ts) in parts {
        tau_y.extend(ty);
        tau_s.extend(ts);
    }

    let (y_threshold, s_threshold) = if lambda == 1.0 {
        (f64::NEG_INFINITY, f64::NEG_INFINITY)
    } else {
        (
            quantile_at(&tau_y, 1.0 - lambda),
            quantile_at(&tau_s, 1.0 - lambda),
        )
    };

    let n = tau_y.len();
    let mut regret_vals = Vec::with_capacity(n);
    let mut gain_vals = Vec::with_capacity(n);
    let mut eff_vals = Vec::with_capacity(n);
    for i in 0..n {
        let py = f64::from(assign(tau_y[i], y_threshold));
        let ps = f64::from(assign(tau_s[i], s_threshold));
        regret_vals.push(tau_y[i] * (py - ps));
        gain_vals.push(tau_y[i] * ps);
        eff_vals.push(tau_y[i] * (ps - lambda));
    }

    let sqrt_n = (n as f64).sqrt();
    let mc_se = [&regret_vals, &gain_vals, &eff_vals]
        .into_iter()
        .map(|v| sample_sd(v) / sqrt_n)
        .fold(0.0_f64, f64::max);

    Ok(OracleTruth {
        lambda,
        regret: mean(&regret_vals),
        gain: mean(&gain_vals),
        efficiency: mean(&eff_vals),
        ate: mean(&tau_y),
        y_threshold,
        s_threshold,
        mc_se,
        draws,
    })
}

/// Exact enumeration over the three atoms.
fn three_point_oracle(lambda: f64) -> OracleTruth {
    let spec = DgpSpec::ThreePoint;
    let atoms: Vec<(f64, f64, f64)> = [-1.0, 0.0, 1.0]
        .into_iter()
        .map(|x| {
            let xv = [x];
            (
                1.0 / 3.0,
                spec.true_cate_outcome(&xv),
                spec.true_cate_surrogate(&xv),
            )
        })
        .collect();

    let threshold = |taus: &dyn Fn(&(f64, f64, f64)) -> f64| -> f64 {
        if lambda == 1.0 {
            return f64::NEG_INFINITY;
        }
        // inf{t : P(tau <= t) >= 1 - lambda} over the weighted atoms.
        let mut pairs: Vec<(f64, f64)> = atoms.iter().map(|a| (taus(a), a.0)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cum = 0.0;
        for &(t, p) in &pairs {
            cum += p;
            if cum >= 1.0 - lambda - 1e-12 {
                return t;
            }
        }
        pairs.last().expect("atoms nonempty").0
    };
    let y_threshold = threshold(&|a| a.1);
    let s_threshold = threshold(&|a| a.2);

    let mut regret = 0.0;
    let mut gain = 0.0;
    let mut efficiency = 0.0;
    let mut ate = 0.0;
    for &(p, ty, ts) in &atoms {
        let py = f64::from(assign(ty, y_threshold));
        let ps = f64::from(assign(ts, s_threshold));
        regret += p * ty * (py - ps);
        gain += p * ty * ps;
        efficiency += p * ty * (ps - lambda);
        ate += p * ty;
    }
    OracleTruth {
        lambda,
        regret,
        gain,
        efficiency,
        ate,
        y_threshold,
        s_threshold,
        mc_se: 0.0,
        draws: 0,
    }
}

/// Exact ITR values in the three-point world: the outcome sign rule, the
/// identity-transformed-surrogate sign rule, and Bernoulli(λ) assignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreePointValues {
    pub outcome_itr_value: f64,
    pub surrogate_itr_value: f64,
    pub random_itr_value: f64,
}

pub fn three_point_itr_values(lambda: f64) -> ThreePointValues {
    let spec = DgpSpec::ThreePoint;
    let mut outcome_sum = 0.0;
    let mut surrogate_sum = 0.0;
    let mut sum_y1 = 0.0;
    let mut sum_y0 = 0.0;
    for x in [-1.0, 0.0, 1.0] {
        let xv = [x];
        let (y0, y1) = (
            spec.true_outcome_mean(0, &xv),
            spec.true_outcome_mean(1, &xv),
        );
        let value = |treat: bool| if treat { y1 } else { y0 };
        outcome_sum += value(spec.true_cate_outcome(&xv) > 0.0);
        surrogate_sum += value(spec.true_cate_surrogate(&xv) > 0.0);
        sum_y1 += y1;
        sum_y0 += y0;
    }
    // Sum first, divide once: the table is small integers, so the rule
    // values come out as exact machine fractions like 8/3.
    let mean_y1 = sum_y1 / 3.0;
    let mean_y0 = sum_y0 / 3.0;
    ThreePointValues {
        outcome_itr_value: outcome_sum / 3.0,
        surrogate_itr_value: surrogate_sum / 3.0,
        // mean_y0 + λ·(mean_y1 − mean_y0): exact whenever the two arm means
        // coincide, for any λ.
        random_itr_value: mean_y0 + lambda * (mean_y1 - mean_y0),
    }
}

/// Row-aligned bundle of *true* nuisance values for simulation-mode
/// experiments: exact propensity, regressions, CATEs, and the true budget
/// rules at the given (oracle) thresholds.
pub fn oracle_bundle(
    spec: &DgpSpec,
    table: &ObservationTable,
    lambda: f64,
    y_threshold: f64,
    s_threshold: f64,
) -> Result<crate::influence::NuisanceBundle> {
    let n = table.n();
    let mut mu0 = Vec::with_capacity(n);
    let mut mu1 = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    let mut tau_s = Vec::with_capacity(n);
    let mut pi_y = Vec::with_capacity(n);
    let mut pi_s = Vec::with_capacity(n);
    for i in 0..n {
        let x = table.covariate_row(i);
        mu0.push(spec.true_outcome_mean(0, x));
        mu1.push(spec.true_outcome_mean(1, x));
        e.push(spec.true_propensity(x));
        tau_s.push(spec.true_cate_surrogate(x));
        pi_y.push(assign(spec.true_cate_outcome(x), y_threshold));
        pi_s.push(assign(spec.true_cate_surrogate(x), s_threshold));
    }
    crate::influence::NuisanceBundle::with_policies(
        mu0,
        mu1,
        e,
        tau_s,
        pi_y,
        pi_s,
        lambda,
        y_threshold,
        s_threshold,
    )
}

/// Sample correlation between the observed S and Y columns.
pub fn sampled_observed_correlation(spec: &DgpSpec, n: usize, seed: u64) -> Result<f64> {
    let data = generate(spec, n, seed)?;
    Ok(correlation(
        data.table.surrogate().expect("generated tables carry s"),
        data.table.outcome().expect("generated tables carry y"),
    ))
}

/// Sample correlation between the potential pair (S(1), Y(1)).
pub fn sampled_potential_correlation(spec: &DgpSpec, n: usize, seed: u64) -> Result<f64> {
    let data = generate(spec, n, seed)?;
    Ok(correlation(&data.potentials.s1, &data.potentials.y1))
}

/// Agreement between the true outcome- and surrogate-based budget rules on
/// a sampled covariate set, with thresholds from the sampled true CATEs.
pub fn true_policy_agreement(spec: &DgpSpec, lambda: f64, n: usize, seed: u64) -> Result<f64> {
    validate_lambda(lambda)?;
    let data = generate(spec, n, seed)?;
    let tau_y: Vec<f64> = (0..n)
        .map(|i| spec.true_cate_outcome(data.table.covariate_row(i)))
        .collect();
    let tau_s: Vec<f64> = (0..n)
        .map(|i| spec.true_cate_surrogate(data.table.covariate_row(i)))
        .collect();
    let y_thr = crate::policy::empirical_quantile(&tau_y, lambda)?;
    let s_thr = crate::policy::empirical_quantile(&tau_s, lambda)?;
    let py = budget_policy(
        &CateVector {
            values: tau_y,
            endpoint: crate::data::Endpoint::Outcome,
        },
        lambda,
        y_thr,
    )?;
    let ps = budget_policy(
        &CateVector {
            values: tau_s,
            endpoint: crate::data::Endpoint::Surrogate,
        },
        lambda,
        s_thr,
    )?;
    policy_agreement(&py, &ps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_tables_satisfy_consistency_exactly() {
        let data = generate(&DgpSpec::Sim61, 500, 42).unwrap();
        let y = data.table.outcome().unwrap();
        let s = data.table.surrogate().unwrap();
        for i in 0..500 {
            let a = data.table.treatment()[i];
            let want_y = if a == 1 {
                data.potentials.y1[i]
            } else {
                data.potentials.y0[i]
            };
            let want_s = if a == 1 {
                data.potentials.s1[i]
            } else {
                data.potentials.s0[i]
            };
            assert_eq!(y[i], want_y);
            assert_eq!(s[i], want_s);
        }
    }

    #[test]
    fn benchmark_world_treats_about_half() {
        let data = generate(&DgpSpec::Sim61, 100_000, 7).unwrap();
        let frac = data
            .table
            .treatment()
            .iter()
            .map(|&a| a as usize)
            .sum::<usize>() as f64
            / 100_000.0;
        assert!((frac - 0.5).abs() < 0.005, "treated fraction {frac}");
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(
            &DgpSpec::Example3 {
                alpha: 2.0,
                beta: 1.0,
            },
            100,
            5,
        )
        .unwrap();
        let b = generate(
            &DgpSpec::Example3 {
                alpha: 2.0,
                beta: 1.0,
            },
            100,
            5,
        )
        .unwrap();
        assert_eq!(a.table, b.table);
    }

    #[test]
    fn example3_rejects_non_positive_parameters() {
        assert!(generate(
            &DgpSpec::Example3 {
                alpha: -1.0,
                beta: 1.0
            },
            10,
            0
        )
        .is_err());
        assert!(DgpSpec::parse("example3", Some(1.0), Some(0.0)).is_err());
    }

    #[test]
    fn three_point_itr_values_are_exact_fractions() {
        let v = three_point_itr_values(0.5);
        assert_eq!(v.outcome_itr_value, 8.0 / 3.0);
        assert_eq!(v.surrogate_itr_value, 2.0);
        assert_eq!(v.random_itr_value, 7.0 / 3.0);
        // The random rule's value does not depend on lambda here.
        assert_eq!(three_point_itr_values(0.123).random_itr_value, 7.0 / 3.0);
    }

    #[test]
    fn three_point_oracle_matches_value_differences() {
        let o = oracle_truth(&DgpSpec::ThreePoint, 1.0, 0, 0).unwrap();
        assert_eq!(o.mc_se, 0.0);
        // Regret equals the gap between the two unconstrained rule values.
        let v = three_point_itr_values(1.0);
        assert!((o.regret - (v.outcome_itr_value - v.surrogate_itr_value)).abs() < 1e-15);
        assert!((o.gain - (2.0 - 7.0 / 3.0)).abs() < 1e-15);
        assert_eq!(o.ate, 0.0);
    }

    #[test]
    fn example2_constant_cates_make_budget_rules_empty() {
        // Constant CATEs tie at their own quantile, so the strict rule
        // treats nobody and gain is exactly zero for lambda < 1.
        let spec = DgpSpec::Example2 {
            alpha: 1.5,
            beta: 6.0,
        };
        let o = oracle_truth(&spec, 0.5, 200_000, 3).unwrap();
        assert_eq!(o.regret, 0.0);
        assert_eq!(o.gain, 0.0);
        assert!((o.efficiency - (-0.5 * 1.5)).abs() < 1e-12);
        // At lambda = 1 the sign rules apply: treat everyone on the outcome
        // (tau_y = +alpha), nobody on the surrogate (tau_s = -alpha).
        let o = oracle_truth(&spec, 1.0, 200_000, 3).unwrap();
        assert!((o.regret - 1.5).abs() < 1e-12);
        assert_eq!(o.gain, 0.0);
        assert!((o.efficiency - (-1.5)).abs() < 1e-12);
    }

    #[test]
    fn example3_policies_are_disjoint_at_half_budget() {
        let spec = DgpSpec::Example3 {
            alpha: 2.0,
            beta: 1.0,
        };
        let agreement = true_policy_agreement(&spec, 0.5, 20_000, 11).unwrap();
        assert_eq!(agreement, 0.0);
        // Unconstrained, both effects are positive everywhere: full overlap.
        let agreement = true_policy_agreement(&spec, 1.0, 20_000, 11).unwrap();
        assert_eq!(agreement, 1.0);
    }

    #[test]
    fn oracle_regret_is_nonnegative_for_the_benchmark() {
        let o = oracle_truth(&DgpSpec::Sim61, 0.3, 400_000, 9).unwrap();
        assert!(
            o.regret >= -4.0 * o.mc_se,
            "regret {} mc_se {}",
            o.regret,
            o.mc_se
        );
    }

    #[test]
    fn oracle_mc_se_shrinks_with_draws() {
        let small = oracle_truth(&DgpSpec::Sim61, 0.2, 50_000, 1).unwrap();
        let large = oracle_truth(&DgpSpec::Sim61, 0.2, 200_000, 1).unwrap();
        let ratio = small.mc_se / large.mc_se;
        assert!(ratio > 1.6 && ratio < 2.6, "ratio {ratio}");
    }
}

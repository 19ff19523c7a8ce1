//! End-to-end checks of the estimation pipeline against independent
//! numeric oracles: quadrature for conditional means, closed-form DGP
//! coefficients, and the defining expectations of the metrics evaluated
//! with true nuisances.

use surreval::data::Endpoint;
use surreval::influence::{efficiency_influence, gain_influence, regret_influence};
use surreval::math::expit;
use surreval::nuisance::{
    fit_arm_regression, fit_logistic, LogisticConfig, ModelConfig, NuisanceKind,
};
use surreval::rng::derive_seed;
use surreval::sim::{
    generate, oracle_bundle, oracle_truth, run_replications, CiKind, DgpSpec, ReplicationConfig,
    ReplicationPath,
};
use surreval::{CrossfitConfig, Metric};

/// 2D Simpson quadrature of `f` against the N(0, 0.2^2 I) density over
/// [-6σ, 6σ]^2. Grid error is negligible next to the Monte Carlo noise it
/// is compared against.
fn gaussian_quadrature(f: impl Fn(f64, f64) -> f64) -> f64 {
    let sigma = 0.2;
    let half = 6.0 * sigma;
    let m = 240; // intervals per axis (even)
    let h = 2.0 * half / m as f64;
    let weight = |i: usize| -> f64 {
        if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let pdf = |x: f64| {
        (-0.5 * (x / sigma) * (x / sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    let mut total = 0.0;
    for i in 0..=m {
        let x1 = -half + i as f64 * h;
        let mut inner = 0.0;
        for j in 0..=m {
            let x2 = -half + j as f64 * h;
            inner += weight(j) * f(x1, x2) * pdf(x2);
        }
        total += weight(i) * inner * pdf(x1) * (h / 3.0);
    }
    total * (h / 3.0)
}

#[test]
fn treated_outcome_rate_matches_quadrature() {
    // P(Y=1 | A=1) = E[e(X) mu1(X)] / E[e(X)], computed by quadrature and
    // compared to the sampled rate.
    let truth = {
        let spec = DgpSpec::Sim61;
        let num = gaussian_quadrature(|x1, x2| {
            spec.true_propensity(&[x1, x2]) * spec.true_outcome_mean(1, &[x1, x2])
        });
        let den = gaussian_quadrature(|x1, x2| spec.true_propensity(&[x1, x2]));
        num / den
    };

    let n = 1_000_000;
    let data = generate(&DgpSpec::Sim61, n, 2024).unwrap();
    let y = data.table.outcome().unwrap();
    let mut treated = 0usize;
    let mut hits = 0.0;
    for (yi, &ai) in y.iter().zip(data.table.treatment()) {
        if ai == 1 {
            treated += 1;
            hits += yi;
        }
    }
    let rate = hits / treated as f64;
    let mc_se = (rate * (1.0 - rate) / treated as f64).sqrt();
    assert!(
        (rate - truth).abs() < 3.0 * mc_se,
        "sampled {rate} vs quadrature {truth} (3 mc_se = {})",
        3.0 * mc_se
    );
}

#[test]
fn logistic_fit_recovers_the_propensity_coefficients() {
    // Fitting A on X in the benchmark world is a well-specified logistic
    // model with coefficients (0.1, 0.1).
    let n = 100_000;
    let data = generate(&DgpSpec::Sim61, n, 7901).unwrap();
    let y: Vec<f64> = data.table.treatment().iter().map(|&a| a as f64).collect();
    let model = fit_logistic(data.table.covariates(), &y, &LogisticConfig::default()).unwrap();
    assert!(model.converged);
    for (j, &c) in model.coefficients.iter().enumerate() {
        assert!((c - 0.1).abs() < 0.05, "coefficient {j} = {c}");
    }
    assert!(
        model.intercept.abs() < 0.05,
        "intercept = {}",
        model.intercept
    );
}

#[test]
fn arm_regression_tracks_the_generating_truth() {
    let n = 100_000;
    let data = generate(&DgpSpec::Sim61, n, 5150).unwrap();
    let model = fit_arm_regression(
        &data.table,
        Endpoint::Outcome,
        1,
        NuisanceKind::Logistic,
        &ModelConfig::default(),
    )
    .unwrap();
    // Mean absolute error against expit(0.3 x1 + 0.1 x2) on a fresh grid.
    let mut err = 0.0;
    let mut count = 0;
    let mut g = -0.6;
    while g <= 0.6 {
        let mut h = -0.6;
        while h <= 0.6 {
            err += (model.predict_one(&[g, h]) - expit(0.3 * g + 0.1 * h)).abs();
            count += 1;
            h += 0.05;
        }
        g += 0.05;
    }
    let mae = err / count as f64;
    assert!(mae < 0.02, "mae = {mae}");
}

#[test]
fn influence_means_with_true_nuisances_hit_the_oracle() {
    // Mean of each influence function over 10^7 draws with true nuisances
    // equals the oracle metric within 4 combined standard errors.
    let draws_total: usize = 10_000_000;
    let chunk = 100_000usize;
    let lambda = 0.2;
    let oracle = oracle_truth(&DgpSpec::Sim61, lambda, 10_000_000, 88).unwrap();

    let master = 424_242u64;
    let mut sums = [0.0f64; 3];
    let mut sumsq = [0.0f64; 3];
    for c in 0..(draws_total / chunk) {
        let data = generate(&DgpSpec::Sim61, chunk, derive_seed(master, c as u64)).unwrap();
        let bundle = oracle_bundle(
            &DgpSpec::Sim61,
            &data.table,
            lambda,
            oracle.y_threshold,
            oracle.s_threshold,
        )
        .unwrap();
        let y = data.table.outcome().unwrap();
        let a = data.table.treatment();
        for i in 0..chunk {
            let vals = [
                regret_influence(&bundle, i, a[i], y[i]),
                gain_influence(&bundle, i, a[i], y[i]),
                efficiency_influence(&bundle, i, a[i], y[i]),
            ];
            for (k, v) in vals.iter().enumerate() {
                sums[k] += v;
                sumsq[k] += v * v;
            }
        }
    }

    let n = draws_total as f64;
    let targets = [oracle.regret, oracle.gain, oracle.efficiency];
    let names = ["regret", "gain", "efficiency"];
    for k in 0..3 {
        let mean = sums[k] / n;
        let var = (sumsq[k] - n * mean * mean) / (n - 1.0);
        let se = (var / n).sqrt().hypot(oracle.mc_se);
        assert!(
            (mean - targets[k]).abs() < 4.0 * se,
            "{}: influence mean {mean} vs oracle {} (4 se = {})",
            names[k],
            targets[k],
            4.0 * se
        );
    }
}

#[test]
fn two_oracle_passes_agree() {
    // Independent seeds must give the same truth up to Monte Carlo error.
    let a = oracle_truth(&DgpSpec::Sim61, 1.0, 2_000_000, 11).unwrap();
    let b = oracle_truth(&DgpSpec::Sim61, 1.0, 2_000_000, 3571).unwrap();
    let se = a.mc_se.hypot(b.mc_se);
    assert!((a.regret - b.regret).abs() < 4.0 * se);
    assert!((a.gain - b.gain).abs() < 4.0 * se);
    assert!((a.efficiency - b.efficiency).abs() < 4.0 * se);
}

#[test]
fn single_dataset_gain_bias_is_small_at_n2000() {
    // 300 replications instead of 1000 keep this fast; the ±0.01 band has
    // plenty of room for the extra Monte Carlo noise (SD/sqrt(300) ~ 1e-3).
    let cfg = ReplicationConfig {
        spec: DgpSpec::Sim61,
        n: 2000,
        reps: 300,
        lambdas: vec![0.3],
        path: ReplicationPath::SingleDataset,
        estimator: CrossfitConfig {
            folds: 2,
            ..CrossfitConfig::default()
        },
        ci: CiKind::Analytic,
        oracle_draws: 2_000_000,
        master_seed: 60_601,
    };
    let report = run_replications(&cfg).unwrap();
    let row = report.row(Metric::Gain, 0.3).unwrap();
    assert!(row.bias.abs() <= 0.01, "gain bias {} at n=2000", row.bias);
    assert_eq!(row.failures, 0);
}

#[test]
fn estimator_sd_shrinks_with_sample_size() {
    let run = |n: usize| {
        let cfg = ReplicationConfig {
            spec: DgpSpec::Sim61,
            n,
            reps: 200,
            lambdas: vec![0.4],
            path: ReplicationPath::SingleDataset,
            estimator: CrossfitConfig {
                folds: 2,
                ..CrossfitConfig::default()
            },
            ci: CiKind::Analytic,
            oracle_draws: 1_000_000,
            master_seed: 845,
        };
        run_replications(&cfg)
            .unwrap()
            .row(Metric::Regret, 0.4)
            .unwrap()
            .sd
    };
    let small = run(500);
    let large = run(3000);
    assert!(
        large < small,
        "regret sd must shrink from n=500 ({small}) to n=3000 ({large})"
    );
}

#[cfg(not(target_arch = "wasm32"))]
#[test]
fn replication_report_is_invariant_to_thread_count() {
    let cfg = ReplicationConfig {
        spec: DgpSpec::Sim61,
        n: 150,
        reps: 6,
        lambdas: vec![0.3, 1.0],
        path: ReplicationPath::SingleDataset,
        estimator: CrossfitConfig {
            folds: 2,
            ..CrossfitConfig::default()
        },
        ci: CiKind::Analytic,
        oracle_draws: 50_000,
        master_seed: 99,
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_replications(&cfg).unwrap());
    let multi = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| run_replications(&cfg).unwrap());
    assert_eq!(
        serde_json::to_string(&single).unwrap(),
        serde_json::to_string(&multi).unwrap()
    );
}

#[test]
fn split_and_single_paths_run_on_real_shaped_csv() {
    // A unified CSV split caller-side into outcome-only and surrogate-only
    // halves exercises the two-dataset path end to end.
    let data = generate(&DgpSpec::Sim61, 400, 31).unwrap();
    let csv = surreval::data::table_to_csv_string(&data.table);
    let full = surreval::data::table_from_csv_str(&csv).unwrap();
    assert_eq!(full, data.table);

    let d1 = full.drop_endpoint(Endpoint::Surrogate).unwrap();
    let d2 = full.drop_endpoint(Endpoint::Outcome).unwrap();
    let cfg = CrossfitConfig {
        folds: 1,
        seed: 5,
        ..CrossfitConfig::default()
    };
    let out = surreval::crossfit_split(&d1, &d2, &[0.2, 1.0], &cfg).unwrap();
    assert_eq!(out.n_main, 200);
    for l in &out.per_lambda {
        for m in Metric::ALL {
            assert!(l.get(m).point.is_finite());
        }
    }

    // Algorithm with K-fold outcome refits on the same two datasets.
    let cfg = CrossfitConfig {
        folds: 4,
        seed: 5,
        ..CrossfitConfig::default()
    };
    let out = surreval::crossfit_split(&d1, &d2, &[0.2], &cfg).unwrap();
    assert_eq!(out.n_main, 400);
}

//! Property tests for the structural invariants: partitions, clipping,
//! budget rules, and the algebraic identity linking the three metrics.

use proptest::prelude::*;

use surreval::data::Endpoint;
use surreval::influence::{ate_term, efficiency_influence, gain_influence, NuisanceBundle};
use surreval::nuisance::clip_propensity;
use surreval::policy::{budget_policy, empirical_quantile, CateVector};
use surreval::split::{kfold, split_half_n};

fn is_partition(parts: &[&[usize]], n: usize) -> bool {
    let mut all: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    all.sort_unstable();
    all == (0..n).collect::<Vec<_>>()
}

proptest! {
    #[test]
    fn split_half_partitions_and_repeats(n in 2usize..400, seed in any::<u64>(), frac in 0.05f64..0.95) {
        let plan = split_half_n(n, frac, seed).unwrap();
        prop_assert!(is_partition(&[&plan.main, &plan.aux], n));
        let expected = ((n as f64 * frac).floor() as usize).clamp(1, n - 1);
        prop_assert_eq!(plan.main.len(), expected);
        let again = split_half_n(n, frac, seed).unwrap();
        prop_assert_eq!(plan, again);
    }

    #[test]
    fn kfold_partitions_with_balanced_sizes(n in 2usize..300, k in 2usize..12, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = kfold(n, k, seed).unwrap();
        let refs: Vec<&[usize]> = folds.iter().map(|f| f.as_slice()).collect();
        prop_assert!(is_partition(&refs, n));
        let min = folds.iter().map(Vec::len).min().unwrap();
        let max = folds.iter().map(Vec::len).max().unwrap();
        prop_assert!(max - min <= 1, "sizes must differ by at most 1");
        prop_assert_eq!(folds.clone(), kfold(n, k, seed).unwrap());
    }

    #[test]
    fn clipping_is_idempotent_and_bounded(
        es in prop::collection::vec(0.0001f64..0.9999, 1..200),
        eps in 0.001f64..0.49,
    ) {
        let once = clip_propensity(&es, eps).unwrap();
        prop_assert!(once.iter().all(|&e| e >= eps && e <= 1.0 - eps));
        let twice = clip_propensity(&once, eps).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn budget_rules_are_feasible_monotone_and_anchored(
        taus in prop::collection::vec(-1.0f64..1.0, 1..300),
        lambda in 0.01f64..1.0,
        lambda_wider in 0.0f64..1.0,
    ) {
        let n = taus.len() as f64;
        let cate = CateVector { values: taus.clone(), endpoint: Endpoint::Outcome };

        let threshold = empirical_quantile(&taus, lambda).unwrap();
        let policy = budget_policy(&cate, lambda, threshold).unwrap();
        // Feasibility with quantile-discreteness slack.
        prop_assert!(policy.treated_fraction() <= lambda + 1.0 / n);
        // The threshold is an observed value (or the -inf sentinel), and the
        // CDF inequality holds at it but at no smaller observed value.
        if lambda < 1.0 {
            prop_assert!(taus.contains(&threshold));
            let cdf = |t: f64| taus.iter().filter(|&&v| v <= t).count() as f64 / n;
            prop_assert!(cdf(threshold) >= 1.0 - lambda - 1e-9);
            if let Some(next_below) = taus.iter().filter(|&&v| v < threshold).fold(None, |m: Option<f64>, &v| Some(m.map_or(v, |m| m.max(v)))) {
                prop_assert!(cdf(next_below) < 1.0 - lambda + 1e-9);
            }
        } else {
            prop_assert_eq!(threshold, f64::NEG_INFINITY);
        }

        // Enlarging the budget can only enlarge the treated set.
        let wider = lambda.max(lambda_wider.max(0.011));
        let t2 = empirical_quantile(&taus, wider).unwrap();
        let p2 = budget_policy(&cate, wider, t2).unwrap();
        for (a, b) in policy.assignments.iter().zip(&p2.assignments) {
            prop_assert!(b >= a, "treated set must grow with lambda");
        }

        // At full budget the rule is exactly the sign rule.
        let sign = budget_policy(&cate, 1.0, f64::NEG_INFINITY).unwrap();
        for (t, a) in taus.iter().zip(&sign.assignments) {
            prop_assert_eq!(*a, u8::from(*t > 0.0));
        }
    }

    #[test]
    fn efficiency_equals_gain_minus_lambda_ate_rowwise(
        rows in prop::collection::vec(
            (0.0f64..1.0, 0.0f64..1.0, 0.05f64..0.95, -1.0f64..1.0, any::<bool>(), any::<bool>(), any::<bool>(), 0.0f64..1.0),
            1..200,
        ),
        lambda in 0.01f64..=1.0,
    ) {
        let n = rows.len();
        let bundle = NuisanceBundle::with_policies(
            rows.iter().map(|r| r.0).collect(),
            rows.iter().map(|r| r.1).collect(),
            rows.iter().map(|r| r.2).collect(),
            rows.iter().map(|r| r.3).collect(),
            rows.iter().map(|r| u8::from(r.4)).collect(),
            rows.iter().map(|r| u8::from(r.5)).collect(),
            lambda,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        ).unwrap();
        let mut eff_sum = 0.0;
        let mut gain_sum = 0.0;
        let mut ate_sum = 0.0;
        for (i, r) in rows.iter().enumerate() {
            let a = u8::from(r.6);
            let y = r.7;
            eff_sum += efficiency_influence(&bundle, i, a, y);
            gain_sum += gain_influence(&bundle, i, a, y);
            ate_sum += ate_term(&bundle, i, a, y);
        }
        let lhs = eff_sum / n as f64;
        let rhs = gain_sum / n as f64 - lambda * ate_sum / n as f64;
        prop_assert!((lhs - rhs).abs() < 1e-12, "{} vs {}", lhs, rhs);
    }
}

//! Gradient-boosted regression stumps.
//!
//! Greedy least-squares boosting: each round fits a single axis-aligned
//! split to the current residuals and adds it with a learning rate. Because
//! every stage is the least-squares optimal stump for its residuals, the
//! training MSE is non-increasing round over round for any rate in (0, 1]
//! (asserted during the fit).

use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StumpConfig {
    pub rounds: usize,
    pub rate: f64,
    pub min_leaf: usize,
}

impl Default for StumpConfig {
    fn default() -> Self {
        StumpConfig {
            rounds: 100,
            rate: 0.1,
            min_leaf: 5,
        }
    }
}

/// One boosting stage: a single split on one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    /// Stage output when `x[feature] <= threshold`.
    pub left: f64,
    /// Stage output when `x[feature] > threshold`.
    pub right: f64,
}

impl Stump {
    #[inline]
    fn output(&self, x: &[f64]) -> f64 {
        if x[self.feature] <= self.threshold {
            self.left
        } else {
            self.right
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StumpEnsemble {
    pub base: f64,
    pub rate: f64,
    pub stages: Vec<Stump>,
}

impl StumpEnsemble {
    /// `base + rate * Σ stage outputs`.
    pub fn predict_one(&self, x: &[f64]) -> f64 {
        self.base + self.rate * self.stages.iter().map(|s| s.output(x)).sum::<f64>()
    }

    /// Prediction truncated to the first `rounds` stages (diagnostics).
    pub fn predict_prefix(&self, x: &[f64], rounds: usize) -> f64 {
        let k = rounds.min(self.stages.len());
        self.base + self.rate * self.stages[..k].iter().map(|s| s.output(x)).sum::<f64>()
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if let Some(d) = self.dim() {
            if x.cols() < d {
                return Err(Error::DimensionMismatch {
                    what: "prediction columns",
                    expected: d,
                    got: x.cols(),
                });
            }
        }
        Ok((0..x.rows()).map(|i| self.predict_one(x.row(i))).collect())
    }

    /// Smallest column count the ensemble can be applied to.
    pub(crate) fn dim(&self) -> Option<usize> {
        self.stages.iter().map(|s| s.feature + 1).max()
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    left: f64,
    right: f64,
    score: f64,
}

/// Fit a boosted stump ensemble to `y` by greedy least squares on residuals.
pub fn fit_stump_ensemble(
    x: &FeatureMatrix,
    y: &[f64],
    config: &StumpConfig,
) -> Result<StumpEnsemble> {
    let n = x.rows();
    let d = x.cols();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            what: "stump target length",
            expected: n,
            got: y.len(),
        });
    }
    if config.rounds == 0 {
        return Err(Error::invalid("rounds", "must be >= 1"));
    }
    if !(config.rate > 0.0 && config.rate <= 1.0) {
        return Err(Error::invalid(
            "rate",
            format!("must lie in (0, 1], got {}", config.rate),
        ));
    }
    if config.min_leaf == 0 {
        return Err(Error::invalid("min_leaf", "must be >= 1"));
    }

    let base = y.iter().sum::<f64>() / n as f64;
    let mut residuals: Vec<f64> = y.iter().map(|v| v - base).collect();
    let mut stages = Vec::with_capacity(config.rounds);

    // Feature orderings are fixed across rounds; sort once.
    let orders: Vec<Vec<usize>> = (0..d)
        .map(|j| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| x.row(a)[j].total_cmp(&x.row(b)[j]));
            idx
        })
        .collect();

    let mut prev_mse = residuals.iter().map(|r| r * r).sum::<f64>() / n as f64;
    for _round in 0..config.rounds {
        let total: f64 = residuals.iter().sum();
        let mut best: Option<BestSplit> = None;
        for (feature, order) in orders.iter().enumerate() {
            let mut left_sum = 0.0;
            for (pos, &i) in order.iter().enumerate() {
                left_sum += residuals[i];
                let n_left = pos + 1;
                let n_right = n - n_left;
                if n_left < config.min_leaf || n_right < config.min_leaf {
                    continue;
                }
                // Only between strictly distinct consecutive values.
                let here = x.row(i)[feature];
                let next = x.row(order[pos + 1])[feature];
                if here == next {
                    continue;
                }
                let right_sum = total - left_sum;
                let score =
                    left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(BestSplit {
                        feature,
                        threshold: 0.5 * (here + next),
                        left: left_sum / n_left as f64,
                        right: right_sum / n_right as f64,
                        score,
                    });
                }
            }
        }

        let stage = match best {
            Some(b) => Stump {
                feature: b.feature,
                threshold: b.threshold,
                left: b.left,
                right: b.right,
            },
            // No admissible split (constant features or n < 2*min_leaf):
            // fall back to a constant stage.
            None => Stump {
                feature: 0,
                threshold: f64::INFINITY,
                left: total / n as f64,
                right: total / n as f64,
            },
        };

        for (i, r) in residuals.iter_mut().enumerate() {
            *r -= config.rate * stage.output(x.row(i));
        }
        stages.push(stage);

        let mse = residuals.iter().map(|r| r * r).sum::<f64>() / n as f64;
        assert!(
            mse <= prev_mse + 1e-9 * (1.0 + prev_mse),
            "training MSE increased: {prev_mse} -> {mse}"
        );
        prev_mse = mse;
    }

    Ok(StumpEnsemble {
        base,
        rate: config.rate,
        stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sample_sd;
    use rand::Rng;

    #[test]
    fn step_function_is_learned_to_near_zero_mse() {
        // A stump is the correct model class for a step in x1.
        let mut rng = crate::rng::rng_from_seed(11);
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| if r[0] > 0.4 { 2.0 } else { -1.0 })
            .collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let model = fit_stump_ensemble(
            &x,
            &y,
            &StumpConfig {
                rounds: 50,
                ..StumpConfig::default()
            },
        )
        .unwrap();
        let preds = model.predict(&x).unwrap();
        let mse: f64 = preds
            .iter()
            .zip(&y)
            .map(|(p, t)| (p - t) * (p - t))
            .sum::<f64>()
            / y.len() as f64;
        let var = sample_sd(&y).powi(2);
        assert!(mse < 0.01 * var, "mse = {mse}, var = {var}");
    }

    #[test]
    fn zero_rounds_is_rejected() {
        let x = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let cfg = StumpConfig {
            rounds: 0,
            ..StumpConfig::default()
        };
        assert!(fit_stump_ensemble(&x, &[0.0, 1.0], &cfg).is_err());
    }

    #[test]
    fn constant_target_predicts_the_constant() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let y = vec![3.25; 20];
        let model = fit_stump_ensemble(&x, &y, &StumpConfig::default()).unwrap();
        for i in 0..20 {
            assert!((model.predict_one(x.row(i)) - 3.25).abs() < 1e-9);
        }
    }

    #[test]
    fn training_mse_is_monotone_across_prefixes() {
        let mut rng = crate::rng::rng_from_seed(3);
        let rows: Vec<Vec<f64>> = (0..120).map(|_| vec![rng.random::<f64>()]).collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| (6.0 * r[0]).sin() + 0.2 * rng.random::<f64>())
            .collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let model = fit_stump_ensemble(
            &x,
            &y,
            &StumpConfig {
                rounds: 30,
                ..StumpConfig::default()
            },
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=30 {
            let mse: f64 = (0..120)
                .map(|i| {
                    let p = model.predict_prefix(x.row(i), k);
                    (p - y[i]) * (p - y[i])
                })
                .sum::<f64>()
                / 120.0;
            assert!(mse <= prev + 1e-9, "round {k}: {prev} -> {mse}");
            prev = mse;
        }
    }
}

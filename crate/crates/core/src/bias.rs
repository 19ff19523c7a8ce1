//! Exact conditional-bias check for the regret influence function.
//!
//! When the nuisances are perturbed away from the truth, the conditional
//! expectation of the regret influence value changes by an amount with a
//! known closed form: a first-order policy term plus a *product* of the
//! propensity and regression errors,
//!
//! `E[φ(η̂) − φ(η) | X = x] = τ_Y(x)·[(π̂_Y − π_Y) − (π̂_S − π_S)]`
//! `  + (π̂_Y − π̂_S)·[ (ê−e)/ê ·(μ̂₁−μ₁) + (ê−e)/(1−ê) ·(μ̂₀−μ₀) ]`.
//!
//! The product structure is what makes the estimator doubly robust: the
//! second term vanishes when *either* the propensity or the outcome
//! regressions are correct. On a discrete covariate with binary outcomes
//! the left side can be computed exactly by enumerating (A, Y), so the two
//! routes must agree to floating-point accuracy — this module computes
//! both.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One support point of a discrete-covariate world with binary Y: the true
/// laws `P(A=1|x)`, `P(Y=1|A=a,x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePoint {
    pub prob: f64,
    pub e: f64,
    pub mu0: f64,
    pub mu1: f64,
}

/// A finite-support covariate distribution with known conditional laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLaw {
    pub points: Vec<DiscretePoint>,
}

impl DiscreteLaw {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::EmptyInput("discrete law needs support points"));
        }
        let total: f64 = self.points.iter().map(|p| p.prob).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "prob",
                format!("support must sum to 1, got {total}"),
            ));
        }
        for (i, p) in self.points.iter().enumerate() {
            for (name, v) in [("e", p.e), ("mu0", p.mu0), ("mu1", p.mu1)] {
                if !(v > 0.0 && v < 1.0) && name == "e" {
                    return Err(Error::invalid("e", format!("point {i}: must lie in (0,1)")));
                }
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid(
                        "law",
                        format!("point {i}: {name} must lie in [0,1]"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Nuisance values at one support point. `tau` is always `mu1 - mu0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointNuisance {
    pub mu0: f64,
    pub mu1: f64,
    pub e: f64,
    pub pi_y: u8,
    pub pi_s: u8,
}

impl PointNuisance {
    fn tau(&self) -> f64 {
        self.mu1 - self.mu0
    }
}

/// The two routes to the conditional bias at one support point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasPair {
    /// Exact expectation of the influence-value difference over (A, Y).
    pub exact: f64,
    /// The closed-form decomposition (policy term + error product).
    pub closed_form: f64,
}

/// Regret influence value at a single evaluation, from point nuisances.
fn influence(nu: &PointNuisance, a: u8, y: f64) -> f64 {
    let gap = f64::from(nu.pi_y) - f64::from(nu.pi_s);
    let (weight, fitted) = if a == 1 {
        (1.0 / nu.e, nu.mu1)
    } else {
        (-1.0 / (1.0 - nu.e), nu.mu0)
    };
    gap * weight * (y - fitted) + nu.tau() * gap
}

/// Compute `E[φ(η̂) − φ(η) | X = x]` two ways for every support point.
///
/// The *true* side uses the law's `(e, μ_a)` with the supplied true policy
/// columns; the perturbed side is arbitrary. The exact route enumerates the
/// four (A, Y) outcomes under the true law; the closed-form route evaluates
/// the bias decomposition. Both are returned per point.
pub fn conditional_bias(
    law: &DiscreteLaw,
    perturbed: &[PointNuisance],
    true_pi_y: &[u8],
    true_pi_s: &[u8],
) -> Result<Vec<BiasPair>> {
    law.validate()?;
    let n = law.points.len();
    if perturbed.len() != n || true_pi_y.len() != n || true_pi_s.len() != n {
        return Err(Error::DimensionMismatch {
            what: "nuisance values per support point",
            expected: n,
            got: perturbed.len().min(true_pi_y.len()).min(true_pi_s.len()),
        });
    }
    for (i, p) in perturbed.iter().enumerate() {
        if !(p.e > 0.0 && p.e < 1.0) {
            return Err(Error::invalid(
                "e",
                format!("perturbed propensity at point {i} must lie in (0,1)"),
            ));
        }
    }

    Ok(law
        .points
        .iter()
        .enumerate()
        .map(|(i, pt)| {
            let truth = PointNuisance {
                mu0: pt.mu0,
                mu1: pt.mu1,
                e: pt.e,
                pi_y: true_pi_y[i],
                pi_s: true_pi_s[i],
            };
            let hat = perturbed[i];

            // Route (i): exact expectation over A ~ Bern(e), Y | A=a ~ Bern(mu_a).
            let mut exact = 0.0;
            for a in [0u8, 1u8] {
                let pa = if a == 1 { pt.e } else { 1.0 - pt.e };
                let mu = if a == 1 { pt.mu1 } else { pt.mu0 };
                for y in [0.0, 1.0] {
                    let py = if y == 1.0 { mu } else { 1.0 - mu };
                    exact += pa * py * (influence(&hat, a, y) - influence(&truth, a, y));
                }
            }

            // Route (ii): the closed-form decomposition.
            let tau = pt.mu1 - pt.mu0;
            let policy_term = tau
                * ((f64::from(hat.pi_y) - f64::from(truth.pi_y))
                    - (f64::from(hat.pi_s) - f64::from(truth.pi_s)));
            let gap_hat = f64::from(hat.pi_y) - f64::from(hat.pi_s);
            let product_term = gap_hat
                * ((hat.e - pt.e) / hat.e * (hat.mu1 - pt.mu1)
                    + (hat.e - pt.e) / (1.0 - hat.e) * (hat.mu0 - pt.mu0));

            BiasPair {
                exact,
                closed_form: policy_term + product_term,
            }
        })
        .collect())
}

/// Population-weighted totals of both routes.
pub fn total_bias(law: &DiscreteLaw, pairs: &[BiasPair]) -> BiasPair {
    let mut exact = 0.0;
    let mut closed_form = 0.0;
    for (pt, pair) in law.points.iter().zip(pairs) {
        exact += pt.prob * pair.exact;
        closed_form += pt.prob * pair.closed_form;
    }
    BiasPair { exact, closed_form }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> DiscreteLaw {
        DiscreteLaw {
            points: vec![
                DiscretePoint {
                    prob: 0.25,
                    e: 0.4,
                    mu0: 0.3,
                    mu1: 0.6,
                },
                DiscretePoint {
                    prob: 0.5,
                    e: 0.55,
                    mu0: 0.7,
                    mu1: 0.2,
                },
                DiscretePoint {
                    prob: 0.25,
                    e: 0.62,
                    mu0: 0.45,
                    mu1: 0.5,
                },
            ],
        }
    }

    fn truth_nuisance(law: &DiscreteLaw) -> (Vec<PointNuisance>, Vec<u8>, Vec<u8>) {
        let pi_y: Vec<u8> = law.points.iter().map(|p| u8::from(p.mu1 > p.mu0)).collect();
        let pi_s: Vec<u8> = vec![1, 0, 0];
        let nus = law
            .points
            .iter()
            .zip(pi_y.iter().zip(&pi_s))
            .map(|(p, (&py, &ps))| PointNuisance {
                mu0: p.mu0,
                mu1: p.mu1,
                e: p.e,
                pi_y: py,
                pi_s: ps,
            })
            .collect();
        (nus, pi_y, pi_s)
    }

    #[test]
    fn unperturbed_nuisances_have_zero_bias() {
        let law = law();
        let (nus, pi_y, pi_s) = truth_nuisance(&law);
        for pair in conditional_bias(&law, &nus, &pi_y, &pi_s).unwrap() {
            assert!(pair.exact.abs() < 1e-15);
            assert!(pair.closed_form.abs() < 1e-15);
        }
    }

    #[test]
    fn flipping_one_policy_bit_gives_the_cate_times_the_flip() {
        let law = law();
        let (mut nus, pi_y, pi_s) = truth_nuisance(&law);
        // Flip the outcome policy at point 1 only.
        nus[1].pi_y = 1 - nus[1].pi_y;
        let pairs = conditional_bias(&law, &nus, &pi_y, &pi_s).unwrap();
        let tau1 = law.points[1].mu1 - law.points[1].mu0;
        let flip = f64::from(nus[1].pi_y) - f64::from(pi_y[1]);
        assert!((pairs[1].closed_form - tau1 * flip).abs() < 1e-15);
        assert!((pairs[1].exact - pairs[1].closed_form).abs() < 1e-12);
        assert!(pairs[0].exact.abs() < 1e-15 && pairs[2].exact.abs() < 1e-15);
    }

    #[test]
    fn joint_propensity_and_regression_perturbation_matches_exactly() {
        let law = law();
        let (mut nus, pi_y, pi_s) = truth_nuisance(&law);
        nus[0].e = 0.25;
        nus[0].mu1 = 0.9;
        nus[2].e = 0.8;
        nus[2].mu0 = 0.1;
        let pairs = conditional_bias(&law, &nus, &pi_y, &pi_s).unwrap();
        for pair in pairs {
            assert!(
                (pair.exact - pair.closed_form).abs() < 1e-10,
                "{} vs {}",
                pair.exact,
                pair.closed_form
            );
        }
    }

    #[test]
    fn law_must_be_a_distribution() {
        let bad = DiscreteLaw {
            points: vec![DiscretePoint {
                prob: 0.7,
                e: 0.5,
                mu0: 0.5,
                mu1: 0.5,
            }],
        };
        assert!(bad.validate().is_err());
    }
}

//! Doubly robust evaluation of surrogate endpoints for individualized
//! treatment rules (ITRs).
//!
//! A surrogate endpoint `S` is a quickly observable stand-in for a delayed
//! or costly primary outcome `Y`. This crate measures how much is lost (or
//! gained) by basing treatment decisions on the surrogate instead of the
//! outcome, with or without a budget constraint `λ` on the treatable
//! fraction of the population:
//!
//! - **regret** `R(λ) = E[τ_Y(X) (π_{Y,λ}(X) − π_{S,λ}(X))]` — outcome loss
//!   of the surrogate-optimal rule relative to the outcome-optimal rule,
//! - **gain** `G(λ) = E[τ_Y(X) π_{S,λ}(X)]` — outcome improvement of the
//!   surrogate-based rule over treating nobody,
//! - **efficiency** `V(λ) = E[τ_Y(X) (π_{S,λ}(X) − λ)]` — improvement over
//!   assigning treatment at random with probability `λ`.
//!
//! Here `τ_Y`, `τ_S` are the conditional average treatment effects on the
//! outcome and surrogate, and `π_{·,λ}(x) = 1{τ(x) > 0}·1{τ(x) > q_{1−λ}}`
//! thresholds the CATE at its upper `(1−λ)` quantile.
//!
//! All three metrics are estimated by averaging doubly robust influence
//! values over a main sample, with nuisance functions (outcome regressions,
//! propensity score, plug-in policies) fitted on held-out data. The
//! [`crossfit`](estimate::crossfit_single) drivers implement the single- and
//! two-dataset cross-fitting variants; [`bootstrap`] rebuilds the whole
//! pipeline per resample for percentile intervals; [`sim`] generates the
//! synthetic worlds (including the surrogate-paradox counterexamples) and
//! brute-forces oracle ground truth for them.
//!
//! Everything is deterministic given a master seed: all sampling flows
//! through the portable ChaCha8 counter RNG (see [`rng`]), and parallel
//! replication uses per-task derived seeds with ordered aggregation, so
//! results are independent of thread count.

pub mod bias;
pub mod bootstrap;
pub mod data;
pub mod error;
pub mod estimate;
pub mod influence;
pub mod math;
pub mod nuisance;
pub mod policy;
pub mod rng;
pub mod sim;
pub mod split;

mod par;

pub use data::{Endpoint, FeatureMatrix, ObservationTable, PotentialTable};
pub use error::{Error, Result};
pub use estimate::{
    crossfit_single, crossfit_split, estimate_metric, CrossfitConfig, Metric, MetricEstimate,
};
pub use influence::NuisanceBundle;
pub use nuisance::{NuisanceKind, Regressor};
pub use policy::BudgetPolicy;
pub use sim::{DgpSpec, OracleTruth};
pub use split::SplitPlan;

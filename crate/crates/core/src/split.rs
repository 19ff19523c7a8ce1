//! Seeded partitioning plans: main/auxiliary halves and K-fold groups.
//!
//! Identical `(seed, n, K)` always produce identical partitions, bit-for-bit
//! and across platforms: the shuffle is Fisher-Yates driven by the portable
//! ChaCha8 stream (see [`crate::rng`]).

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::ObservationTable;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Deterministic seeded partition of row indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    /// Main sample indices (estimates are averaged here).
    pub main: Vec<usize>,
    /// Auxiliary sample indices (nuisances are fitted here).
    pub aux: Vec<usize>,
    /// Optional K-fold partition of all rows.
    pub folds: Option<Vec<Vec<usize>>>,
}

/// Randomly split the rows of `table` into disjoint (main, aux) sets with
/// `|main| = floor(n * fraction)`.
pub fn split_half(table: &ObservationTable, fraction: f64, seed: u64) -> Result<SplitPlan> {
    split_half_n(table.n(), fraction, seed)
}

/// Index-level version of [`split_half`].
pub fn split_half_n(n: usize, fraction: f64, seed: u64) -> Result<SplitPlan> {
    if n < 2 {
        return Err(Error::invalid("n", "need at least 2 rows to split"));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid("fraction", "must lie in (0, 1)"));
    }
    let m = ((n as f64) * fraction).floor() as usize;
    let m = m.clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut main: Vec<usize> = order[..m].to_vec();
    let mut aux: Vec<usize> = order[m..].to_vec();
    main.sort_unstable();
    aux.sort_unstable();
    Ok(SplitPlan {
        seed,
        main,
        aux,
        folds: None,
    })
}

/// Partition `{0..n}` into `K` disjoint folds whose sizes differ by at most
/// one; remainder rows go one-per-fold to the earliest folds.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::invalid(
            "K",
            format!("need 2 <= K <= n, got K={k}, n={n}"),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for j in 0..k {
        let size = base + usize::from(j < extra);
        let mut fold: Vec<usize> = order[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(folds)
}

/// All indices of `{0..n}` not in `fold`.
pub fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut member = vec![false; n];
    for &i in fold {
        member[i] = true;
    }
    (0..n).filter(|&i| !member[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_partitions(parts: &[&[usize]], n: usize) {
        let mut all: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn half_split_partitions_and_balances() {
        let plan = split_half_n(10, 0.5, 7).unwrap();
        assert_eq!(plan.main.len(), 5);
        assert_eq!(plan.aux.len(), 5);
        assert_partitions(&[&plan.main, &plan.aux], 10);
    }

    #[test]
    fn half_split_is_deterministic() {
        assert_eq!(
            split_half_n(10, 0.5, 7).unwrap(),
            split_half_n(10, 0.5, 7).unwrap()
        );
        assert_ne!(
            split_half_n(100, 0.5, 7).unwrap().main,
            split_half_n(100, 0.5, 8).unwrap().main
        );
    }

    #[test]
    fn single_row_cannot_be_split() {
        assert!(split_half_n(1, 0.5, 0).is_err());
    }

    #[test]
    fn kfold_even_and_remainder_sizes() {
        let folds = kfold(10, 5, 3).unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
        let refs: Vec<&[usize]> = folds.iter().map(|f| f.as_slice()).collect();
        assert_partitions(&refs, 10);

        let folds = kfold(11, 5, 3).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(|f| f.len()).collect();
        assert_eq!(sizes.remove(0), 3);
        assert!(sizes.iter().all(|&s| s == 2));
    }

    #[test]
    fn kfold_rejects_bad_k() {
        assert!(kfold(3, 5, 0).is_err());
        assert!(kfold(10, 1, 0).is_err());
    }

    #[test]
    fn complement_covers_the_rest() {
        let folds = kfold(7, 3, 1).unwrap();
        for f in &folds {
            let c = complement(7, f);
            assert_partitions(&[f, &c], 7);
        }
    }
}

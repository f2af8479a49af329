use std::collections::BTreeMap;

use crate::error::{domain, Result};
use crate::num::Real;

/// Shannon entropy in bits per symbol of a count vector (zero counts are
/// ignored). Terms are summed in ascending count order, so the result does
/// not depend on the order of `counts`.
pub fn entropy_of_counts<T: Real>(counts: impl IntoIterator<Item = usize>) -> T {
    let mut counts: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    counts.sort_unstable();
    let total: usize = counts.iter().sum();
    if total == 0 {
        return T::zero();
    }
    let n = T::from_usize_lossy(total);
    -counts
        .iter()
        .map(|&c| {
            let p = T::from_usize_lossy(c) / n;
            p * p.log2()
        })
        .sum::<T>()
}

/// `H = -Σ (n_σ/N) log2(n_σ/N)` over the symbols of `seq`.
pub fn shannon_entropy<T: Real, S: Ord>(seq: &[S]) -> Result<T> {
    if seq.is_empty() {
        return domain("entropy of an empty sequence is undefined");
    }
    let mut counts: BTreeMap<&S, usize> = BTreeMap::new();
    for s in seq {
        *counts.entry(s).or_default() += 1;
    }
    Ok(entropy_of_counts(counts.into_values()))
}

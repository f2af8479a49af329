//! Per-symbol statistics and the three replacement rules.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::error::{domain, Result};
use crate::num::Real;
use crate::symbol::Token;

use super::entropy::entropy_of_counts;

/// Counts that determine the entropy of a sequence before and after
/// replacement: per symbol the total count `n` and the number of
/// predictable, not yet replaced items `m`, plus the hit count.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SymbolStats {
    counts: BTreeMap<Token, usize>,
    predictable: BTreeMap<Token, usize>,
    hits: usize,
}

impl SymbolStats {
    /// Statistics of `seq` given its predictable positions.
    pub fn from_sequence(seq: &[Token], predictable: &[usize]) -> Self {
        let mut stats = SymbolStats::default();
        for &t in seq {
            if t == Token::Hit {
                stats.hits += 1;
            } else {
                *stats.counts.entry(t).or_default() += 1;
            }
        }
        for &p in predictable {
            *stats.predictable.entry(seq[p]).or_default() += 1;
        }
        stats
    }

    /// Builds statistics from raw `(symbol, n, m)` triples.
    pub fn from_counts(entries: &[(Token, usize, usize)], hits: usize) -> Result<Self> {
        let mut stats = SymbolStats {
            hits,
            ..Default::default()
        };
        for &(sym, n, m) in entries {
            if sym == Token::Hit {
                return domain("the hit symbol cannot carry its own statistics");
            }
            if m > n {
                return domain(format!("{m} predictable items exceed {n} items of {sym}"));
            }
            if n > 0 {
                stats.counts.insert(sym, n);
            }
            if m > 0 {
                stats.predictable.insert(sym, m);
            }
        }
        Ok(stats)
    }

    pub fn count(&self, sym: Token) -> usize {
        self.counts.get(&sym).copied().unwrap_or(0)
    }

    /// Non-hit symbols and their counts, ascending.
    pub fn count_entries(&self) -> impl Iterator<Item = (Token, usize)> + '_ {
        self.counts.iter().map(|(&s, &n)| (s, n))
    }

    pub fn predictable(&self, sym: Token) -> usize {
        self.predictable.get(&sym).copied().unwrap_or(0)
    }

    pub fn hits(&self) -> usize {
        self.hits
    }

    pub fn len(&self) -> usize {
        self.hits + self.counts.values().sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Symbols that still have predictable items, ascending.
    pub fn predictable_symbols(&self) -> Vec<Token> {
        self.predictable.keys().copied().collect()
    }

    pub fn predictable_total(&self) -> usize {
        self.predictable.values().sum()
    }

    pub fn entropy<T: Real>(&self) -> T {
        entropy_of_counts(self.counts.values().copied().chain([self.hits]))
    }

    fn check_moves(&self, moves: &BTreeMap<Token, usize>) -> Result<()> {
        for (&sym, &k) in moves {
            if k > self.predictable(sym) {
                return domain(format!(
                    "cannot move {k} items of {sym}: only {} are predictable",
                    self.predictable(sym)
                ));
            }
        }
        Ok(())
    }

    /// Moves `k` predictable items of each listed symbol to the hit symbol.
    pub fn apply(&mut self, moves: &BTreeMap<Token, usize>) -> Result<()> {
        self.check_moves(moves)?;
        for (&sym, &k) in moves {
            if k == 0 {
                continue;
            }
            let n = self.counts.get_mut(&sym).expect("predictable symbols are counted");
            *n -= k;
            if *n == 0 {
                self.counts.remove(&sym);
            }
            let m = self.predictable.get_mut(&sym).unwrap();
            *m -= k;
            if *m == 0 {
                self.predictable.remove(&sym);
            }
            self.hits += k;
        }
        Ok(())
    }

    /// Moves for replacing every predictable item of `symbols`.
    pub fn full_moves(&self, symbols: &[Token]) -> BTreeMap<Token, usize> {
        symbols.iter().map(|&s| (s, self.predictable(s))).collect()
    }
}

/// Entropy change (bits per symbol) of moving `moves[σ]` predictable items of
/// each σ to the hit symbol, from the counts alone.
///
/// With `S = Σ c log2 c` over all symbols, `H = log2 N - S / N` and the
/// length `N` is unchanged, so the delta is `-(S' - S) / N` where only the
/// touched terms of `S` differ.
pub fn entropy_delta<T: Real>(stats: &SymbolStats, moves: &BTreeMap<Token, usize>) -> Result<T> {
    stats.check_moves(moves)?;
    let len = stats.len();
    if len == 0 {
        return Ok(T::zero());
    }
    let f = |c: usize| T::from_usize_lossy(c).xlog2x();
    let mut moved = 0;
    let mut d_s = T::zero();
    for (&sym, &k) in moves {
        if k == 0 {
            continue;
        }
        let n = stats.count(sym);
        d_s += f(n - k) - f(n);
        moved += k;
    }
    d_s += f(stats.hits + moved) - f(stats.hits);
    Ok(-d_s / T::from_usize_lossy(len))
}

/// Accumulation rule: symbols whose items are all predictable.
pub fn rule_accumulation(stats: &SymbolStats) -> Vec<Token> {
    stats
        .predictable
        .iter()
        .filter(|&(&s, &m)| m > 0 && m == stats.count(s))
        .map(|(&s, _)| s)
        .collect()
}

/// Whether replacing all `m` predictable items of a symbol with `n` items
/// against `hits` hit items widens the gap between the two counts, which is
/// exactly when the entropy drops.
pub fn concentrates(n: usize, m: usize, hits: usize) -> bool {
    let (n, m, h) = (n as i64, m as i64, hits as i64);
    m >= 1 && ((n - m) - (h + m)).abs() > (n - h).abs()
}

/// Concentration rule: the first symbol, by descending predictable count
/// then id, whose full replacement lowers the entropy on its own.
pub fn rule_concentration(stats: &SymbolStats) -> Option<Token> {
    stats
        .predictable
        .iter()
        .sorted_by_key(|&(&s, &m)| (std::cmp::Reverse(m), s))
        .find(|&(&s, &m)| concentrates(stats.count(s), m, stats.hits))
        .map(|(&s, _)| s)
}

/// Smallest entropy drop the multiple-symbol rule treats as real.
pub const MIN_GAIN: f64 = 1e-12;

/// Multiple-symbol rule: the first combination, by increasing size from 2
/// up to `max_size` and lexicographic within a size, whose joint full
/// replacement lowers the entropy.
pub fn rule_multiple<T: Real>(stats: &SymbolStats, max_size: usize) -> Option<Vec<Token>> {
    let symbols = stats.predictable_symbols();
    let gain = T::from_f64_lossy(MIN_GAIN);
    for size in 2..=max_size.min(symbols.len()) {
        for combo in symbols.iter().copied().combinations(size) {
            let delta: T = entropy_delta(stats, &stats.full_moves(&combo)).ok()?;
            if delta < -gain {
                return Some(combo);
            }
        }
    }
    None
}

//! Entropy reduction: replacing predictable items with the hit symbol.

mod entropy;
mod predict;
mod rules;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::symbol::Token;

pub use entropy::{entropy_of_counts, shannon_entropy};
pub use predict::{predictable_items, restore, Predictor};
pub use rules::{
    concentrates, entropy_delta, rule_accumulation, rule_concentration, rule_multiple, SymbolStats, MIN_GAIN,
};

/// Default cardinality cap of the multiple-symbol search.
pub const DEFAULT_MAX_COMBINATION: usize = 5;

/// Largest number of count vectors `hir_bruteforce` will enumerate.
pub const BRUTEFORCE_LIMIT: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Accumulation,
    Concentration,
    Multiple,
}

/// One rule application and the entropy after it.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplaceStep<T> {
    pub rule: Rule,
    pub symbols: Vec<Token>,
    pub entropy: T,
}

/// A sequence after replacement.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IntermediateSequence {
    pub items: Vec<Token>,
    pub replaced_positions: Vec<usize>,
}

impl IntermediateSequence {
    /// Replaces the predictable items of `symbols` in `seq`.
    fn build(seq: &[Token], predictable: &[usize], symbols: &BTreeSet<Token>) -> Self {
        let mut items = seq.to_vec();
        let mut replaced_positions = Vec::new();
        for &p in predictable {
            if symbols.contains(&seq[p]) {
                items[p] = Token::Hit;
                replaced_positions.push(p);
            }
        }
        IntermediateSequence {
            items,
            replaced_positions,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Restores the original sequence with the predictor used to build it.
    pub fn restore<P: Predictor>(&self, predictor: &P) -> Vec<Token> {
        restore(&self.items, predictor)
    }
}

/// Replacement result together with the rule trace.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplaceOutcome<T> {
    pub sequence: IntermediateSequence,
    pub initial_entropy: T,
    pub steps: Vec<ReplaceStep<T>>,
}

impl<T: Real> ReplaceOutcome<T> {
    pub fn final_entropy(&self) -> T {
        self.steps.last().map_or(self.initial_entropy, |s| s.entropy)
    }
}

/// Runs the rules on count statistics alone. Returns the final statistics
/// and the applied steps.
///
/// Panics if a concentration or multiple-symbol step fails to lower the
/// entropy, or an accumulation step raises it.
pub fn replace_counts<T: Real>(stats: &SymbolStats, max_combination: usize) -> (SymbolStats, Vec<ReplaceStep<T>>) {
    let mut stats = stats.clone();
    let mut steps = Vec::new();
    let mut apply = |stats: &mut SymbolStats, rule: Rule, symbols: Vec<Token>| {
        let moves = stats.full_moves(&symbols);
        let delta: T = entropy_delta(stats, &moves).expect("full moves are within bounds");
        match rule {
            Rule::Accumulation => assert!(delta <= T::zero(), "accumulation raised the entropy by {delta}"),
            _ => assert!(delta < T::zero(), "{rule:?} on {symbols:?} did not lower the entropy ({delta})"),
        }
        stats.apply(&moves).expect("full moves are within bounds");
        steps.push(ReplaceStep {
            rule,
            symbols,
            entropy: stats.entropy(),
        });
    };

    let acc = rule_accumulation(&stats);
    if !acc.is_empty() {
        apply(&mut stats, Rule::Accumulation, acc);
    }
    loop {
        if let Some(sym) = rule_concentration(&stats) {
            apply(&mut stats, Rule::Concentration, vec![sym]);
        } else if let Some(set) = rule_multiple::<T>(&stats, max_combination) {
            apply(&mut stats, Rule::Multiple, set);
        } else {
            break;
        }
    }
    (stats, steps)
}

/// Replace with the full rule trace.
pub fn replace_traced<T: Real, P: Predictor>(
    seq: &[Token],
    predictor: &P,
    max_combination: usize,
) -> ReplaceOutcome<T> {
    let predictable = predictable_items(seq, predictor);
    let stats = SymbolStats::from_sequence(seq, &predictable);
    let (_, steps) = replace_counts::<T>(&stats, max_combination);
    let chosen: BTreeSet<Token> = steps.iter().flat_map(|s| s.symbols.iter().copied()).collect();
    ReplaceOutcome {
        sequence: IntermediateSequence::build(seq, &predictable, &chosen),
        initial_entropy: stats.entropy(),
        steps,
    }
}

/// Replace over several pieces that share one symbol distribution (and so
/// one code table) while each keeps its own prediction context.
pub fn replace_pieces<T: Real, P: Predictor>(
    pieces: &[Vec<Token>],
    predictor: &P,
    max_combination: usize,
) -> (Vec<IntermediateSequence>, ReplaceOutcome<T>) {
    let predictable: Vec<Vec<usize>> = pieces.iter().map(|p| predictable_items(p, predictor)).collect();
    let mut joined = Vec::new();
    let mut joined_pred = Vec::new();
    for (piece, pred) in pieces.iter().zip(&predictable) {
        joined_pred.extend(pred.iter().map(|&p| p + joined.len()));
        joined.extend_from_slice(piece);
    }
    let stats = SymbolStats::from_sequence(&joined, &joined_pred);
    let (_, steps) = replace_counts::<T>(&stats, max_combination);
    let chosen: BTreeSet<Token> = steps.iter().flat_map(|s| s.symbols.iter().copied()).collect();
    let out = pieces
        .iter()
        .zip(&predictable)
        .map(|(piece, pred)| IntermediateSequence::build(piece, pred, &chosen))
        .collect();
    let outcome = ReplaceOutcome {
        sequence: IntermediateSequence::build(&joined, &joined_pred, &chosen),
        initial_entropy: stats.entropy(),
        steps,
    };
    (out, outcome)
}

/// Number of predictable and of eligible positions of `seq`.
pub fn hit_counts<P: Predictor>(seq: &[Token], predictor: &P) -> (usize, usize) {
    let (mut hits, mut eligible) = (0, 0);
    predict::scan(seq, predictor, |pos, predicted, _| {
        eligible += 1;
        if seq[pos] == Token::Loc(predicted) {
            hits += 1;
        }
    });
    (hits, eligible)
}

/// Replaces predictable items so that the entropy of the result is minimal.
pub fn replace<P: Predictor>(seq: &[Token], predictor: &P) -> IntermediateSequence {
    replace_traced::<f64, P>(seq, predictor, DEFAULT_MAX_COMBINATION).sequence
}

/// Replaces every predictable item regardless of the entropy.
pub fn replace_all<P: Predictor>(seq: &[Token], predictor: &P) -> IntermediateSequence {
    let predictable = predictable_items(seq, predictor);
    let all: BTreeSet<Token> = predictable.iter().map(|&p| seq[p]).collect();
    IntermediateSequence::build(seq, &predictable, &all)
}

/// Minimum entropy over every choice of how many predictable items of each
/// symbol to replace.
pub fn hir_bruteforce_counts<T: Real>(stats: &SymbolStats) -> Result<T> {
    let symbols = stats.predictable_symbols();
    let bounds: Vec<usize> = symbols.iter().map(|&s| stats.predictable(s)).collect();
    let size = bounds
        .iter()
        .try_fold(1u64, |acc, &m| acc.checked_mul(m as u64 + 1).filter(|&v| v <= BRUTEFORCE_LIMIT));
    if size.is_none() {
        return Err(Error::TooLarge(format!(
            "{} predictable items over {} symbols",
            stats.predictable_total(),
            symbols.len()
        )));
    }
    let fixed: Vec<usize> = stats
        .count_entries()
        .filter(|(s, _)| stats.predictable(*s) == 0)
        .map(|(_, n)| n)
        .collect();
    let base: Vec<usize> = symbols.iter().map(|&s| stats.count(s)).collect();
    let mut ks = vec![0usize; symbols.len()];
    let mut best: Option<T> = None;
    loop {
        let moved: usize = ks.iter().sum();
        let counts = fixed
            .iter()
            .copied()
            .chain(base.iter().zip(&ks).map(|(n, k)| n - k))
            .chain([stats.hits() + moved]);
        let h: T = entropy_of_counts(counts);
        if best.map_or(true, |b| h < b) {
            best = Some(h);
        }
        let mut i = 0;
        loop {
            if i == ks.len() {
                return Ok(best.unwrap());
            }
            if ks[i] < bounds[i] {
                ks[i] += 1;
                break;
            }
            ks[i] = 0;
            i += 1;
        }
    }
}

/// Exhaustive solution of the replacement problem on a small sequence.
pub fn hir_bruteforce<T: Real, P: Predictor>(seq: &[Token], predictor: &P) -> Result<T> {
    let predictable = predictable_items(seq, predictor);
    hir_bruteforce_counts(&SymbolStats::from_sequence(seq, &predictable))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Symbol;
    use Token::Loc;

    /// Order-1 table predictor for tests.
    struct Table(Vec<Symbol>, Symbol);

    impl Predictor for Table {
        fn most_likely(&self, context: &[Symbol]) -> Symbol {
            context.last().map_or(self.1, |&s| self.0[s as usize])
        }
        fn max_context(&self) -> usize {
            1
        }
    }

    fn locs(s: &[u32]) -> Vec<Token> {
        s.iter().map(|&x| Loc(x)).collect()
    }

    #[test]
    fn constant_sequence_is_predictable_everywhere() {
        let seq = locs(&[0, 0, 0, 0]);
        let p = Table(vec![0], 0);
        assert_eq!(predictable_items(&seq, &p), vec![0, 1, 2, 3]);
        let out = replace(&seq, &p);
        assert_eq!(out.restore(&p), seq);
    }

    #[test]
    fn nothing_predictable_leaves_input() {
        let seq = locs(&[0, 1, 0, 1]);
        let p = Table(vec![0, 1], 2);
        assert!(predictable_items(&seq, &p).is_empty());
        let out = replace_traced::<f64, _>(&seq, &p, 5);
        assert_eq!(out.sequence.items, seq);
        assert!(out.steps.is_empty());
        assert_eq!(out.final_entropy(), 1.0);
    }

    #[test]
    fn hit_contributes_restored_context() {
        let p = Table(vec![1, 2, 0], 0);
        let seq = vec![Loc(0), Token::Hit, Token::Hit, Loc(0)];
        assert_eq!(restore(&seq, &p), locs(&[0, 1, 2, 0]));
    }

    #[test]
    fn delimited_runs_are_opaque() {
        let p = Table(vec![0, 0], 0);
        let seq = vec![Loc(0), Token::Delim, Loc(0), Loc(0), Token::Delim, Loc(0)];
        assert_eq!(predictable_items(&seq, &p), vec![0, 5]);
    }

    #[test]
    fn roundtrip_and_optimality_on_a_cycle() {
        let p = Table(vec![1, 2, 3, 0], 0);
        let seq = locs(&[0, 1, 2, 3, 0, 1, 3, 3, 2, 2, 3, 0, 1, 0]);
        let out = replace_traced::<f64, _>(&seq, &p, 5);
        assert_eq!(out.sequence.restore(&p), seq);
        let best = hir_bruteforce::<f64, _>(&seq, &p).unwrap();
        assert!((out.final_entropy() - best).abs() < 1e-12);
        let final_h: f64 = shannon_entropy(&out.sequence.items).unwrap();
        assert!((final_h - best).abs() < 1e-12);
        for w in out.steps.windows(2) {
            assert!(w[1].entropy < w[0].entropy);
        }
    }

    #[test]
    fn pieces_keep_separate_contexts() {
        let p = Table(vec![1, 2, 0], 0);
        let pieces = vec![locs(&[0, 1, 2]), locs(&[1, 2, 0])];
        let (out, trace) = replace_pieces::<f64, _>(&pieces, &p, 5);
        assert_eq!(out[0].items, vec![Token::Hit; 3]);
        assert_eq!(out[1].items, vec![Loc(1), Token::Hit, Token::Hit]);
        assert_eq!(trace.sequence.replaced_positions, vec![0, 1, 2, 4, 5]);
        for (o, piece) in out.iter().zip(&pieces) {
            assert_eq!(&o.restore(&p), piece);
        }
        assert_eq!(hit_counts(&pieces[1], &p), (2, 3));
    }

    #[test]
    fn bruteforce_limits() {
        let s = SymbolStats::from_counts(&[(Loc(0), 5, 5)], 0).unwrap();
        assert_eq!(hir_bruteforce_counts::<f64>(&s).unwrap(), 0.0);
        let big: Vec<_> = (0..30).map(|i| (Loc(i), 3, 3)).collect();
        let s = SymbolStats::from_counts(&big, 0).unwrap();
        assert!(matches!(hir_bruteforce_counts::<f64>(&s), Err(Error::TooLarge(_))));
    }
}

use crate::mining::PatternTree;
use crate::num::Real;
use crate::symbol::{Symbol, Token};

/// The model shared by the compressing and the restoring side.
pub trait Predictor {
    /// Most likely next symbol after `context` (oldest first).
    fn most_likely(&self, context: &[Symbol]) -> Symbol;

    /// Longest context the predictor looks at.
    fn max_context(&self) -> usize;
}

impl<T: Real> Predictor for PatternTree<T> {
    fn most_likely(&self, context: &[Symbol]) -> Symbol {
        PatternTree::most_likely(self, context)
    }

    fn max_context(&self) -> usize {
        self.params().max_depth
    }
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn most_likely(&self, context: &[Symbol]) -> Symbol {
        (**self).most_likely(context)
    }

    fn max_context(&self) -> usize {
        (**self).max_context()
    }
}

/// Walks the positions of `seq` that the predictor may replace: location
/// and hit tokens outside verbatim runs. For each it reports the position,
/// the prediction, and the restored symbol (the prediction for hits).
/// Restored symbols feed the context of later positions; `Delim` tokens
/// and verbatim-run interiors are skipped.
pub(crate) fn scan<P: Predictor>(
    seq: &[Token],
    predictor: &P,
    mut visit: impl FnMut(usize, Symbol, Symbol),
) {
    let depth = predictor.max_context();
    let mut context: Vec<Symbol> = Vec::with_capacity(depth + 1);
    let mut in_run = false;
    for (pos, &tok) in seq.iter().enumerate() {
        let restored_from = match tok {
            Token::Delim => {
                in_run = !in_run;
                continue;
            }
            _ if in_run => continue,
            Token::Loc(s) => Some(s),
            Token::Hit => None,
        };
        let predicted = predictor.most_likely(&context);
        let restored = restored_from.unwrap_or(predicted);
        visit(pos, predicted, restored);
        if depth > 0 {
            if context.len() == depth {
                context.remove(0);
            }
            context.push(restored);
        }
    }
}

/// Positions whose item equals the predictor's guess given the restored
/// history.
pub fn predictable_items<P: Predictor>(seq: &[Token], predictor: &P) -> Vec<usize> {
    let mut out = Vec::new();
    scan(seq, predictor, |pos, predicted, _| {
        if seq[pos] == Token::Loc(predicted) {
            out.push(pos);
        }
    });
    out
}

/// Replaces every `Hit` with the prediction for its position.
pub fn restore<P: Predictor>(seq: &[Token], predictor: &P) -> Vec<Token> {
    let mut out = seq.to_vec();
    scan(seq, predictor, |pos, _, restored| out[pos] = Token::Loc(restored));
    out
}

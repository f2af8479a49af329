//! Baselines: uncompressed batches and per-interval online updates.

use super::packet::PacketConfig;
use crate::error::{domain, Result};
use crate::replace::{predictable_items, Predictor};
use crate::symbol::Token;
use crate::world::LocationSequence;

/// Size of the items of `seqs` sent as plain fixed-width fields.
pub fn raw_volume(seqs: &[LocationSequence], config: &PacketConfig) -> usize {
    seqs.iter().map(LocationSequence::len).sum::<usize>() * config.item_bytes()
}

/// Bytes of one online update: header, timestamp, location and id.
pub fn online_update_bytes(config: &PacketConfig) -> usize {
    config.header_bytes as usize + config.item_bytes()
}

/// Bytes sent when every item travels as its own update. With a predictor,
/// items the predictor guesses from the object's own history are not sent.
pub fn online_volume<P: Predictor>(seqs: &[LocationSequence], predictor: Option<&P>, config: &PacketConfig) -> usize {
    let per_update = online_update_bytes(config);
    seqs.iter()
        .map(|s| {
            let suppressed = predictor.map_or(0, |p| {
                let tokens: Vec<Token> = s.items.iter().map(|i| Token::Loc(i.symbol)).collect();
                predictable_items(&tokens, p).len()
            });
            (s.len() - suppressed) * per_update
        })
        .sum()
}

/// `raw / compressed`.
pub fn compression_ratio(raw_bytes: f64, compressed_bytes: f64) -> Result<f64> {
    if compressed_bytes <= 0.0 {
        return domain("compressed size must be positive");
    }
    Ok(raw_bytes / compressed_bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Symbol;

    struct Always(Symbol);

    impl Predictor for Always {
        fn most_likely(&self, _: &[Symbol]) -> Symbol {
            self.0
        }
        fn max_context(&self) -> usize {
            0
        }
    }

    #[test]
    fn one_object_four_intervals() {
        let cfg = PacketConfig::default();
        let s = vec![LocationSequence::from_symbols(0, 0, &[1, 2, 2, 3])];
        assert_eq!(online_volume::<Always>(&s, None, &cfg), 28);
        assert_eq!(online_volume(&s, Some(&Always(2)), &cfg), 14);
        assert_eq!(online_volume(&s, Some(&Always(9)), &cfg), 28);
        assert_eq!(raw_volume(&s, &cfg), 12);
    }

    #[test]
    fn ratios() {
        assert_eq!(compression_ratio(5.0, 5.0).unwrap(), 1.0);
        assert_eq!(compression_ratio(100.0, 25.0).unwrap(), 4.0);
        assert!(compression_ratio(1.0, 0.0).is_err());
    }
}

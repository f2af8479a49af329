//! Location symbols and the reserved control tokens used by the codec.

use std::fmt;

/// Identifier of a grid node, `y * width + x`.
pub type Symbol = u32;

pub type ObjectId = u32;

pub type GroupId = u32;

/// One item of a merged or intermediate sequence.
///
/// `Delim` brackets verbatim runs of D-columns, `Hit` stands for an item the
/// shared predictor restores. Neither belongs to the location alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    Loc(Symbol),
    Delim,
    Hit,
}

impl Token {
    /// Dense id over `alphabet ∪ {DELIM, HIT}`: locations keep their id,
    /// `Delim` is `alphabet`, `Hit` is `alphabet + 1`.
    pub fn id(self, alphabet: u32) -> u32 {
        match self {
            Token::Loc(s) => s,
            Token::Delim => alphabet,
            Token::Hit => alphabet + 1,
        }
    }

    pub fn from_id(id: u32, alphabet: u32) -> Option<Token> {
        match id {
            s if s < alphabet => Some(Token::Loc(s)),
            s if s == alphabet => Some(Token::Delim),
            s if s == alphabet + 1 => Some(Token::Hit),
            _ => None,
        }
    }

    pub fn loc(self) -> Option<Symbol> {
        match self {
            Token::Loc(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Loc(s) => write!(f, "{s}"),
            Token::Delim => f.write_str("/"),
            Token::Hit => f.write_str("*"),
        }
    }
}

/// Number of bits needed for a fixed-width id over `alphabet` locations plus
/// the two reserved tokens.
pub fn token_bits(alphabet: u32) -> u32 {
    let max_id = alphabet + 1;
    (u32::BITS - max_id.leading_zeros()).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_ids_sit_above_the_alphabet() {
        assert_eq!(Token::Delim.id(256), 256);
        assert_eq!(Token::Hit.id(256), 257);
        assert_eq!(Token::from_id(257, 256), Some(Token::Hit));
        assert_eq!(Token::from_id(258, 256), None);
        assert_eq!(token_bits(256), 9);
        assert_eq!(token_bits(2), 2);
    }
}

//! Vertical compression of one group's aligned sequences.
//!
//! Columns whose members all report the same node (S-columns) collapse to
//! that node. Other columns (D-columns) collapse to a representative node
//! when one lies within the error bound of every member; the rest are kept
//! verbatim, column-major in member order, inside `Delim … Delim` runs.

use crate::error::{format, Error, Result};
use crate::symbol::{token_bits, Symbol, Token};
use crate::world::SensorGrid;

/// The symbols of all group members at one tracking interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub index: u32,
    pub symbols: Vec<Symbol>,
}

impl Column {
    pub fn new(index: u32, symbols: Vec<Symbol>) -> Self {
        Column { index, symbols }
    }

    pub fn is_uniform(&self) -> bool {
        self.symbols.windows(2).all(|w| w[0] == w[1])
    }
}

/// Transposes member rows into columns; all rows must have equal length.
pub fn columns_from_rows(rows: &[Vec<Symbol>], first_index: u32) -> Result<Vec<Column>> {
    let len = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != len) {
        return Err(Error::Domain("rows of a group must have equal length".into()));
    }
    Ok((0..len)
        .map(|i| Column::new(first_index + i as u32, rows.iter().map(|r| r[i]).collect()))
        .collect())
}

pub fn rows_from_columns(columns: &[Column], group_size: usize) -> Vec<Vec<Symbol>> {
    (0..group_size)
        .map(|m| columns.iter().map(|c| c.symbols[m]).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergedSequence {
    pub group_size: usize,
    pub tokens: Vec<Token>,
}

impl MergedSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Fixed-width symbol stream over `alphabet ∪ {Delim, Hit}`,
    /// most significant bit first, zero padded to a byte.
    pub fn to_symbol_stream(&self, alphabet: u32, width: u32) -> Result<Vec<u8>> {
        if width < token_bits(alphabet) || width > 32 {
            return Err(Error::Encoding(format!(
                "{width}-bit ids cannot hold {} symbols",
                alphabet + 2
            )));
        }
        let mut w = crate::codec::BitWriter::new();
        for t in &self.tokens {
            w.write(t.id(alphabet) as u64, width);
        }
        Ok(w.into_bytes())
    }

    pub fn from_symbol_stream(
        bytes: &[u8],
        count: usize,
        group_size: usize,
        alphabet: u32,
        width: u32,
    ) -> Result<Self> {
        let mut r = crate::codec::BitReader::new(bytes);
        let tokens = (0..count)
            .map(|_| {
                let id = r.read(width)? as u32;
                Token::from_id(id, alphabet)
                    .ok_or_else(|| Error::Format(format!("symbol id {id} is out of range")))
            })
            .collect::<Result<_>>()?;
        Ok(MergedSequence { group_size, tokens })
    }
}

/// Node minimising the mean hop deviation to the column's members, subject
/// to a maximum deviation of `epsilon`; ties go to the smallest node id.
/// Every grid node is a candidate.
pub fn select_representative(column: &Column, epsilon: u32, grid: &SensorGrid) -> Result<Option<Symbol>> {
    if column.symbols.is_empty() {
        return Ok(None);
    }
    if column.is_uniform() {
        return Ok(Some(column.symbols[0]));
    }
    if epsilon == 0 {
        return Ok(None);
    }
    let members = column
        .symbols
        .iter()
        .map(|&s| grid.location(s))
        .collect::<Result<Vec<_>>>()?;
    // only nodes inside the members' bounding box widened by epsilon can qualify
    let min_x = members.iter().map(|l| l.x).min().unwrap();
    let max_x = members.iter().map(|l| l.x).max().unwrap();
    let min_y = members.iter().map(|l| l.y).min().unwrap();
    let max_y = members.iter().map(|l| l.y).max().unwrap();
    let mut best: Option<(u32, Symbol)> = None;
    for y in min_y.saturating_sub(epsilon)..=(max_y + epsilon).min(grid.height() - 1) {
        for x in min_x.saturating_sub(epsilon)..=(max_x + epsilon).min(grid.width() - 1) {
            let mut total = 0;
            let mut worst = 0;
            for m in &members {
                let d = m.x.abs_diff(x) + m.y.abs_diff(y);
                total += d;
                worst = worst.max(d);
            }
            if worst > epsilon {
                continue;
            }
            let sym = y * grid.width() + x;
            if best.map_or(true, |(t, s)| (total, sym) < (t, s)) {
                best = Some((total, sym));
            }
        }
    }
    Ok(best.map(|(_, s)| s))
}

/// Merges the columns of one G-segment.
pub fn merge_group(columns: &[Column], epsilon: u32, grid: &SensorGrid) -> Result<MergedSequence> {
    let group_size = columns.first().map_or(0, |c| c.symbols.len());
    if columns.iter().any(|c| c.symbols.len() != group_size) {
        return Err(Error::Domain("columns of one group must have equal length".into()));
    }
    if group_size == 0 && !columns.is_empty() {
        return Err(Error::Domain("a group needs at least one member".into()));
    }
    let mut tokens = Vec::with_capacity(columns.len());
    let mut in_run = false;
    for col in columns {
        match select_representative(col, epsilon, grid)? {
            Some(sym) => {
                if in_run {
                    tokens.push(Token::Delim);
                    in_run = false;
                }
                tokens.push(Token::Loc(sym));
            }
            None => {
                if !in_run {
                    tokens.push(Token::Delim);
                    in_run = true;
                }
                tokens.extend(col.symbols.iter().map(|&s| Token::Loc(s)));
            }
        }
    }
    if in_run {
        tokens.push(Token::Delim);
    }
    Ok(MergedSequence { group_size, tokens })
}

/// Expands a merged sequence back into columns numbered from `first_index`.
pub fn unmerge(merged: &MergedSequence, first_index: u32) -> Result<Vec<Column>> {
    let n = merged.group_size;
    if n == 0 {
        return if merged.tokens.is_empty() {
            Ok(Vec::new())
        } else {
            format("group size 0 with a non-empty merged sequence")
        };
    }
    let mut columns = Vec::new();
    let mut run: Option<Vec<Symbol>> = None;
    let mut next_index = first_index;
    let mut push = |symbols: Vec<Symbol>, columns: &mut Vec<Column>| {
        columns.push(Column::new(next_index, symbols));
        next_index += 1;
    };
    for &t in &merged.tokens {
        match (t, run.as_mut()) {
            (Token::Delim, None) => run = Some(Vec::new()),
            (Token::Delim, Some(_)) => {
                let body = run.take().unwrap();
                if body.is_empty() || body.len() % n != 0 {
                    return format(format!(
                        "verbatim run of {} symbols is not a multiple of {n}",
                        body.len()
                    ));
                }
                for chunk in body.chunks(n) {
                    push(chunk.to_vec(), &mut columns);
                }
            }
            (Token::Loc(s), Some(body)) => body.push(s),
            (Token::Loc(s), None) => push(vec![s; n], &mut columns),
            (Token::Hit, _) => return format("unrestored hit symbol in a merged sequence"),
        }
    }
    if run.is_some() {
        return format("unterminated verbatim run");
    }
    Ok(columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Location;

    fn cols(rows: &[&[Symbol]]) -> Vec<Column> {
        let rows: Vec<Vec<Symbol>> = rows.iter().map(|r| r.to_vec()).collect();
        columns_from_rows(&rows, 0).unwrap()
    }

    #[test]
    fn identical_sequences_collapse() {
        let g = SensorGrid::default();
        let c = cols(&[&[0, 1, 2], &[0, 1, 2], &[0, 1, 2]]);
        let m = merge_group(&c, 0, &g).unwrap();
        assert_eq!(m.tokens, vec![Token::Loc(0), Token::Loc(1), Token::Loc(2)]);
        assert_eq!(unmerge(&m, 0).unwrap(), c);
    }

    #[test]
    fn exact_mode_keeps_d_columns_verbatim() {
        let g = SensorGrid::default();
        let c = vec![Column::new(0, vec![0, 0, 0]), Column::new(1, vec![0, 1, 0])];
        let m = merge_group(&c, 0, &g).unwrap();
        use Token::*;
        assert_eq!(m.tokens, vec![Loc(0), Delim, Loc(0), Loc(1), Loc(0), Delim]);
        assert_eq!(unmerge(&m, 0).unwrap(), c);
    }

    #[test]
    fn representative_is_the_brute_force_optimum() {
        let g = SensorGrid::default();
        let members: Vec<Symbol> = [(4, 4), (5, 4), (4, 5)]
            .iter()
            .map(|&(x, y)| g.symbol(Location::new(x, y)).unwrap())
            .collect();
        let col = Column::new(0, members.clone());
        let rep = select_representative(&col, 1, &g).unwrap().unwrap();
        // exhaustive scan over every node
        let mut best = None;
        for s in 0..g.node_count() {
            let d: Vec<u32> = members.iter().map(|&m| g.symbol_distance(s, m).unwrap()).collect();
            if d.iter().all(|&x| x <= 1) {
                let total: u32 = d.iter().sum();
                if best.map_or(true, |(t, _)| total < t) {
                    best = Some((total, s));
                }
            }
        }
        assert_eq!(Some(rep), best.map(|(_, s)| s));
        assert_eq!(rep, g.symbol(Location::new(4, 4)).unwrap());
    }

    #[test]
    fn two_members_two_hops_apart_meet_in_the_middle() {
        let g = SensorGrid::default();
        let a = g.symbol(Location::new(3, 7)).unwrap();
        let b = g.symbol(Location::new(5, 7)).unwrap();
        let rep = select_representative(&Column::new(0, vec![a, b]), 1, &g).unwrap();
        assert_eq!(rep, Some(g.symbol(Location::new(4, 7)).unwrap()));
        assert_eq!(select_representative(&Column::new(0, vec![a, b]), 0, &g).unwrap(), None);
        assert_eq!(select_representative(&Column::new(0, vec![a, a]), 0, &g).unwrap(), Some(a));
    }

    #[test]
    fn unmerge_repeats_single_symbols() {
        let m = MergedSequence {
            group_size: 4,
            tokens: vec![Token::Loc(9)],
        };
        assert_eq!(unmerge(&m, 3).unwrap(), vec![Column::new(3, vec![9; 4])]);
    }

    #[test]
    fn malformed_merged_sequences() {
        use Token::*;
        let bad_run = MergedSequence {
            group_size: 3,
            tokens: vec![Delim, Loc(1), Loc(2), Delim],
        };
        assert!(unmerge(&bad_run, 0).is_err());
        let open = MergedSequence {
            group_size: 1,
            tokens: vec![Delim, Loc(1)],
        };
        assert!(unmerge(&open, 0).is_err());
    }

    #[test]
    fn symbol_stream_roundtrip() {
        use Token::*;
        let m = MergedSequence {
            group_size: 2,
            tokens: vec![Loc(255), Delim, Loc(0), Loc(3), Delim, Hit],
        };
        let bytes = m.to_symbol_stream(256, 9).unwrap();
        assert_eq!(bytes.len(), (6 * 9 + 7) / 8);
        assert_eq!(MergedSequence::from_symbol_stream(&bytes, 6, 2, 256, 9).unwrap(), m);
        assert!(m.to_symbol_stream(256, 8).is_err());
    }
}

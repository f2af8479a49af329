//! Canonical Huffman coding over `u32` symbol ids.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use super::bits::{BitReader, BitWriter};
use crate::error::{domain, format, Result};

/// Canonical code: codewords are assigned in `(length, symbol)` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HuffmanTable {
    lengths: BTreeMap<u32, u8>,
    codes: BTreeMap<u32, u64>,
    /// `(length, first code, index of first symbol)` per used length.
    decode_rows: Vec<(u8, u64, usize)>,
    ordered: Vec<u32>,
}

/// An encoded bit stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitStream {
    pub bytes: Vec<u8>,
    pub bit_len: usize,
}

/// Code lengths of a Huffman tree built from `freqs`. Equal weights are
/// merged in order of the smallest symbol id below them. A single symbol
/// gets a one-bit code.
pub fn code_lengths(freqs: &BTreeMap<u32, usize>) -> BTreeMap<u32, u8> {
    if freqs.len() == 1 {
        return freqs.keys().map(|&s| (s, 1)).collect();
    }
    // node: (weight, smallest symbol, node index)
    let mut heap = BinaryHeap::new();
    let mut parent: Vec<usize> = Vec::new();
    let mut leaves = Vec::new();
    for (&sym, &w) in freqs {
        leaves.push(sym);
        parent.push(usize::MAX);
        heap.push(Reverse((w, sym, parent.len() - 1)));
    }
    while heap.len() > 1 {
        let Reverse((w1, k1, a)) = heap.pop().unwrap();
        let Reverse((w2, k2, b)) = heap.pop().unwrap();
        parent.push(usize::MAX);
        let node = parent.len() - 1;
        parent[a] = node;
        parent[b] = node;
        heap.push(Reverse((w1 + w2, k1.min(k2), node)));
    }
    leaves
        .iter()
        .enumerate()
        .map(|(i, &sym)| {
            let mut depth = 0u8;
            let mut n = i;
            while parent[n] != usize::MAX {
                n = parent[n];
                depth += 1;
            }
            (sym, depth)
        })
        .collect()
}

impl HuffmanTable {
    pub fn from_lengths(lengths: BTreeMap<u32, u8>) -> Result<Self> {
        if lengths.values().any(|&l| l == 0 || l > 63) {
            return domain("code lengths must lie in 1..=63");
        }
        let mut ordered: Vec<(u8, u32)> = lengths.iter().map(|(&s, &l)| (l, s)).collect();
        ordered.sort_unstable();
        let mut codes = BTreeMap::new();
        let mut decode_rows = Vec::new();
        let mut code = 0u64;
        let mut prev_len = ordered.first().map_or(0, |&(l, _)| l);
        for (idx, &(len, sym)) in ordered.iter().enumerate() {
            code <<= len - prev_len;
            if len != prev_len || idx == 0 {
                decode_rows.push((len, code, idx));
            }
            prev_len = len;
            if code >> len != 0 {
                return domain("code lengths violate the Kraft inequality");
            }
            codes.insert(sym, code);
            code += 1;
        }
        Ok(HuffmanTable {
            lengths,
            codes,
            decode_rows,
            ordered: ordered.into_iter().map(|(_, s)| s).collect(),
        })
    }

    pub fn from_frequencies(freqs: &BTreeMap<u32, usize>) -> Result<Self> {
        if freqs.is_empty() {
            return domain("cannot build a code for an empty alphabet");
        }
        Self::from_lengths(code_lengths(freqs))
    }

    pub fn for_sequence(seq: &[u32]) -> Result<Self> {
        let mut freqs = BTreeMap::new();
        for &s in seq {
            *freqs.entry(s).or_insert(0usize) += 1;
        }
        Self::from_frequencies(&freqs)
    }

    pub fn lengths(&self) -> &BTreeMap<u32, u8> {
        &self.lengths
    }

    pub fn code(&self, symbol: u32) -> Option<(u64, u8)> {
        Some((*self.codes.get(&symbol)?, self.lengths[&symbol]))
    }

    /// `Σ 2^-len`.
    pub fn kraft_sum(&self) -> f64 {
        self.lengths.values().map(|&l| 2f64.powi(-(l as i32))).sum()
    }

    /// Bits needed for `seq` under this table.
    pub fn encoded_bits(&self, seq: &[u32]) -> Result<usize> {
        seq.iter()
            .map(|s| {
                self.lengths
                    .get(s)
                    .map(|&l| l as usize)
                    .ok_or_else(|| crate::Error::Encoding(format!("symbol {s} has no codeword")))
            })
            .sum()
    }

    pub fn encode_into(&self, seq: &[u32], out: &mut BitWriter) -> Result<()> {
        for &s in seq {
            let (code, len) = self
                .code(s)
                .ok_or_else(|| crate::Error::Encoding(format!("symbol {s} has no codeword")))?;
            out.write(code, len as u32);
        }
        Ok(())
    }

    pub fn decode_symbol(&self, r: &mut BitReader<'_>) -> Result<u32> {
        let mut code = 0u64;
        let mut len = 0u8;
        for (row, &(row_len, first, start)) in self.decode_rows.iter().enumerate() {
            while len < row_len {
                code = (code << 1) | r.read_bit()? as u64;
                len += 1;
            }
            let end = self.decode_rows.get(row + 1).map_or(self.ordered.len(), |r| r.2);
            if code >= first && code - first < (end - start) as u64 {
                return Ok(self.ordered[start + (code - first) as usize]);
            }
        }
        format("bit pattern is not a codeword")
    }

    pub fn decode_n(&self, r: &mut BitReader<'_>, n: usize) -> Result<Vec<u32>> {
        (0..n).map(|_| self.decode_symbol(r)).collect()
    }

    /// Serialised table: entry count (16 bits) then `(symbol: 16 bits,
    /// length: 8 bits)` per entry.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 + 3 * self.lengths.len());
        out.extend_from_slice(&(self.lengths.len() as u16).to_be_bytes());
        for (&s, &l) in &self.lengths {
            out.extend_from_slice(&(s as u16).to_be_bytes());
            out.push(l);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 2 {
            return format("truncated code table");
        }
        let n = u16::from_be_bytes([bytes[0], bytes[1]]) as usize;
        if bytes.len() != 2 + 3 * n {
            return format("code table length does not match its entry count");
        }
        let lengths = bytes[2..]
            .chunks(3)
            .map(|c| (u16::from_be_bytes([c[0], c[1]]) as u32, c[2]))
            .collect();
        Self::from_lengths(lengths)
    }
}

/// Builds the canonical code for `seq` and encodes it.
pub fn huffman_encode(seq: &[u32]) -> Result<(HuffmanTable, BitStream)> {
    if seq.is_empty() {
        return domain("cannot encode an empty sequence");
    }
    let table = HuffmanTable::for_sequence(seq)?;
    let mut w = BitWriter::new();
    table.encode_into(seq, &mut w)?;
    let bit_len = w.bit_len();
    Ok((
        table,
        BitStream {
            bytes: w.into_bytes(),
            bit_len,
        },
    ))
}

/// Decodes a whole stream; trailing bits that do not complete a codeword
/// are an error.
pub fn huffman_decode(table: &HuffmanTable, stream: &BitStream) -> Result<Vec<u32>> {
    let mut r = BitReader::with_bit_len(&stream.bytes, stream.bit_len);
    let mut out = Vec::new();
    while r.remaining() > 0 {
        match table.decode_symbol(&mut r) {
            Ok(s) => out.push(s),
            Err(_) => return format("dangling bits at the end of the stream"),
        }
    }
    Ok(out)
}

//! Bit-exact update packets.
//!
//! Layout, most significant bit first: a 4-byte header holding the
//! predictor digest, an 8-bit segment count, then per segment a kind flag
//! (1 for group segments), an `a`-bit timestamp relative to the batch
//! start, an `l`-bit token count, a `c`-bit object or group id and the
//! Huffman-coded tokens. The packet is zero padded to a byte.

use std::collections::BTreeMap;

use super::bits::{BitReader, BitWriter};
use super::huffman::HuffmanTable;
use crate::error::{format, Error, Result};
use crate::symbol::Token;
use crate::world::SegmentKind;

/// Width of the segment count field.
pub const SEGMENT_COUNT_BITS: u32 = 8;

/// Field widths of the packet layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PacketConfig {
    pub header_bytes: u32,
    /// `a`
    pub timestamp_bits: u32,
    /// `b`, used by the uncompressed and online accounting
    pub location_bits: u32,
    /// `c`
    pub id_bits: u32,
    /// `l`
    pub length_bits: u32,
}

impl Default for PacketConfig {
    fn default() -> Self {
        PacketConfig {
            header_bytes: 4,
            timestamp_bits: 8,
            location_bits: 8,
            id_bits: 8,
            length_bits: 8,
        }
    }
}

impl PacketConfig {
    pub fn validate(&self) -> Result<()> {
        if self.header_bytes != 4 {
            return Err(Error::Domain("the header carries a 4-byte digest".into()));
        }
        for (name, w) in [
            ("timestamp", self.timestamp_bits),
            ("location", self.location_bits),
            ("id", self.id_bits),
            ("length", self.length_bits),
        ] {
            if !(1..=32).contains(&w) {
                return Err(Error::Domain(format!("{name} width {w} is outside 1..=32")));
            }
        }
        Ok(())
    }

    /// Largest token count a segment may carry.
    pub fn max_tokens(&self) -> usize {
        ((1u64 << self.length_bits) - 1) as usize
    }

    /// Bytes of one item sent on its own: timestamp, location and id, each
    /// rounded up to whole bytes.
    pub fn item_bytes(&self) -> usize {
        [self.timestamp_bits, self.location_bits, self.id_bits]
            .iter()
            .map(|b| b.div_ceil(8) as usize)
            .sum()
    }
}

/// One segment as carried by a packet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentRecord {
    pub kind: SegmentKind,
    /// Relative to the batch start.
    pub begin: u32,
    /// Object id for single segments, group id for group segments.
    pub id: u32,
    pub tokens: Vec<Token>,
}

/// Decoded contents of an update packet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdatePacket {
    pub digest: u32,
    pub segments: Vec<SegmentRecord>,
}

/// Packet bytes together with the code table that travels out of band.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedPacket {
    pub bytes: Vec<u8>,
    pub table: HuffmanTable,
    /// Bits spent on Huffman-coded tokens.
    pub stream_bits: usize,
}

impl PackedPacket {
    pub fn size(&self) -> usize {
        self.bytes.len()
    }

    /// Packet size plus the serialised code table.
    pub fn size_with_table(&self) -> usize {
        self.bytes.len() + self.table.to_bytes().len()
    }
}

fn check_field(name: &str, value: u64, width: u32) -> Result<()> {
    if width < 64 && value >> width != 0 {
        return Err(Error::Encoding(format!("{name} {value} does not fit in {width} bits")));
    }
    Ok(())
}

/// Canonical code over the token ids of every segment.
pub fn packet_table(segments: &[SegmentRecord], alphabet: u32) -> Result<HuffmanTable> {
    let mut freqs = BTreeMap::new();
    for t in segments.iter().flat_map(|s| &s.tokens) {
        *freqs.entry(t.id(alphabet)).or_insert(0usize) += 1;
    }
    if freqs.is_empty() {
        HuffmanTable::from_lengths(BTreeMap::new())
    } else {
        HuffmanTable::from_frequencies(&freqs)
    }
}

/// Packs the segments of one batch and cluster head into one packet with a
/// freshly built code table.
pub fn pack_batch(packet: &UpdatePacket, config: &PacketConfig, alphabet: u32) -> Result<PackedPacket> {
    config.validate()?;
    let table = packet_table(&packet.segments, alphabet)?;
    check_field("segment count", packet.segments.len() as u64, SEGMENT_COUNT_BITS)?;
    let mut w = BitWriter::new();
    w.write_bytes(&packet.digest.to_be_bytes());
    w.write(packet.segments.len() as u64, SEGMENT_COUNT_BITS);
    let mut stream_bits = 0;
    for seg in &packet.segments {
        check_field("timestamp", seg.begin as u64, config.timestamp_bits)?;
        check_field("segment length", seg.tokens.len() as u64, config.length_bits)?;
        check_field("id", seg.id as u64, config.id_bits)?;
        w.push_bit(seg.kind == SegmentKind::Group);
        w.write(seg.begin as u64, config.timestamp_bits);
        w.write(seg.tokens.len() as u64, config.length_bits);
        w.write(seg.id as u64, config.id_bits);
        let ids: Vec<u32> = seg.tokens.iter().map(|t| t.id(alphabet)).collect();
        let before = w.bit_len();
        table.encode_into(&ids, &mut w)?;
        stream_bits += w.bit_len() - before;
    }
    Ok(PackedPacket {
        bytes: w.into_bytes(),
        table,
        stream_bits,
    })
}

/// Reads a packet back. Padding after the last segment must be zero and
/// shorter than a byte.
pub fn unpack_packet(
    bytes: &[u8],
    table: &HuffmanTable,
    config: &PacketConfig,
    alphabet: u32,
) -> Result<UpdatePacket> {
    config.validate()?;
    let mut r = BitReader::new(bytes);
    let digest = r.read(32)? as u32;
    let count = r.read(SEGMENT_COUNT_BITS)? as usize;
    let mut segments = Vec::with_capacity(count);
    for _ in 0..count {
        let kind = if r.read_bit()? {
            SegmentKind::Group
        } else {
            SegmentKind::Single
        };
        let begin = r.read(config.timestamp_bits)? as u32;
        let len = r.read(config.length_bits)? as usize;
        let id = r.read(config.id_bits)? as u32;
        let tokens = table
            .decode_n(&mut r, len)?
            .into_iter()
            .map(|i| Token::from_id(i, alphabet).ok_or_else(|| Error::Format(format!("token id {i} out of range"))))
            .collect::<Result<_>>()?;
        segments.push(SegmentRecord { kind, begin, id, tokens });
    }
    if r.remaining() >= 8 || r.read(r.remaining() as u32)? != 0 {
        return format("unexpected bits after the last segment");
    }
    Ok(UpdatePacket { digest, segments })
}

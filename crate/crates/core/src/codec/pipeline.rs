//! Batch compression of a period's location sequences and its inverse.

use std::collections::{BTreeMap, BTreeSet};

use super::packet::{pack_batch, packet_table, unpack_packet, PackedPacket, PacketConfig, SegmentRecord, UpdatePacket};
use crate::error::{domain, Error, Result};
use crate::merge::{columns_from_rows, merge_group, rows_from_columns, unmerge, Column, MergedSequence};
use crate::mining::{learn_group_model, GroupingResult, PatternTree, PstParams};
use crate::num::Real;
use crate::replace::{hit_counts, replace_pieces, restore, DEFAULT_MAX_COMBINATION};
use crate::symbol::{GroupId, ObjectId, Symbol, Token};
use crate::world::{desegment, segment_and_align, LocationSequence, Segment, SegmentKind, SensorGrid};

/// A group known to both ends of the link, with its shared predictor.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupModel<T> {
    pub id: GroupId,
    /// Ascending.
    pub members: Vec<ObjectId>,
    pub predictor: PatternTree<T>,
}

impl<T: Real> GroupModel<T> {
    pub fn new(id: GroupId, mut members: Vec<ObjectId>, predictor: PatternTree<T>) -> Self {
        members.sort_unstable();
        members.dedup();
        GroupModel { id, members, predictor }
    }
}

/// One model per group of `groups` (singletons included), each learned on
/// the members' sequences in `seqs`.
pub fn build_group_models<T: Real>(
    groups: &GroupingResult,
    seqs: &[LocationSequence],
    alphabet: u32,
    params: PstParams<T>,
) -> Result<Vec<GroupModel<T>>> {
    groups
        .groups()
        .into_iter()
        .enumerate()
        .map(|(gid, members)| {
            let member_seqs: Vec<&LocationSequence> =
                seqs.iter().filter(|s| members.contains(&s.object_id)).collect();
            let predictor = learn_group_model(&member_seqs, alphabet, params)?;
            Ok(GroupModel::new(gid as GroupId, members, predictor))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodecConfig {
    pub packet: PacketConfig,
    /// Error bound of the merge, in hops.
    pub epsilon: u32,
    /// Cardinality cap of the multiple-symbol rule.
    pub max_combination: usize,
    /// Run the replace phase; without it only Huffman coding is applied.
    pub replace: bool,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            packet: PacketConfig::default(),
            epsilon: 0,
            max_combination: DEFAULT_MAX_COMBINATION,
            replace: true,
        }
    }
}

/// One packed packet with its accounting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedPacket {
    pub group: GroupId,
    pub cluster: u32,
    pub packed: PackedPacket,
    /// Stream bits the same tokens need with Huffman coding alone.
    pub plain_stream_bits: usize,
    pub tokens: usize,
    pub hits: usize,
    pub eligible: usize,
}

/// All packets of one batch period.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CompressedBatch {
    pub start: u32,
    pub packets: Vec<CompressedPacket>,
}

impl CompressedBatch {
    pub fn bytes(&self) -> usize {
        self.packets.iter().map(|p| p.packed.size()).sum()
    }

    pub fn bytes_with_tables(&self) -> usize {
        self.packets.iter().map(|p| p.packed.size_with_table()).sum()
    }

    pub fn stream_bits(&self) -> usize {
        self.packets.iter().map(|p| p.packed.stream_bits).sum()
    }

    pub fn plain_stream_bits(&self) -> usize {
        self.packets.iter().map(|p| p.plain_stream_bits).sum()
    }

    pub fn tokens(&self) -> usize {
        self.packets.iter().map(|p| p.tokens).sum()
    }

    pub fn hits(&self) -> usize {
        self.packets.iter().map(|p| p.hits).sum()
    }

    pub fn eligible(&self) -> usize {
        self.packets.iter().map(|p| p.eligible).sum()
    }

    /// Share of eligible items the predictors guessed, 0 when none were
    /// eligible.
    pub fn hit_rate(&self) -> f64 {
        match self.eligible() {
            0 => 0.0,
            e => self.hits() as f64 / e as f64,
        }
    }
}

/// Group segment tokens, split by columns until each piece fits.
fn merged_pieces(
    columns: &[Column],
    epsilon: u32,
    grid: &SensorGrid,
    max_tokens: usize,
    out: &mut Vec<(u32, Vec<Token>)>,
) -> Result<()> {
    let merged = merge_group(columns, epsilon, grid)?;
    if merged.len() <= max_tokens {
        out.push((columns[0].index, merged.tokens));
        return Ok(());
    }
    if columns.len() == 1 {
        return Err(Error::Encoding(format!(
            "one column needs {} tokens, more than the {max_tokens} a segment can carry",
            merged.len()
        )));
    }
    let (left, right) = columns.split_at(columns.len() / 2);
    merged_pieces(left, epsilon, grid, max_tokens, out)?;
    merged_pieces(right, epsilon, grid, max_tokens, out)
}

fn records_of(
    seg: &Segment,
    group: GroupId,
    start: u32,
    grid: &SensorGrid,
    config: &CodecConfig,
) -> Result<Vec<SegmentRecord>> {
    let max_tokens = config.packet.max_tokens();
    let mut pieces = Vec::new();
    let id = match seg.kind {
        SegmentKind::Group => {
            let columns = columns_from_rows(&seg.rows, seg.begin)?;
            merged_pieces(&columns, config.epsilon, grid, max_tokens, &mut pieces)?;
            group
        }
        SegmentKind::Single => {
            for (k, chunk) in seg.rows[0].chunks(max_tokens).enumerate() {
                let begin = seg.begin + (k * max_tokens) as u32;
                pieces.push((begin, chunk.iter().map(|&s| Token::Loc(s)).collect()));
            }
            seg.members[0]
        }
    };
    Ok(pieces
        .into_iter()
        .map(|(begin, tokens)| SegmentRecord {
            kind: seg.kind,
            begin: begin - start,
            id,
            tokens,
        })
        .collect())
}

fn compress_group<T: Real>(
    model: &GroupModel<T>,
    seqs: &[LocationSequence],
    grid: &SensorGrid,
    start: u32,
    config: &CodecConfig,
) -> Result<Vec<CompressedPacket>> {
    let alphabet = grid.node_count();
    let mut by_cluster: BTreeMap<u32, Vec<SegmentRecord>> = BTreeMap::new();
    for seg in segment_and_align(seqs, grid)? {
        by_cluster
            .entry(seg.cluster)
            .or_default()
            .extend(records_of(&seg, model.id, start, grid, config)?);
    }
    let digest = model.predictor.digest();
    let max_segments = (1usize << super::packet::SEGMENT_COUNT_BITS) - 1;
    let mut out = Vec::new();
    for (cluster, records) in by_cluster {
        for chunk in records.chunks(max_segments) {
            let plain_table = packet_table(chunk, alphabet)?;
            let plain_stream_bits = chunk
                .iter()
                .map(|r| plain_table.encoded_bits(&r.tokens.iter().map(|t| t.id(alphabet)).collect::<Vec<_>>()))
                .sum::<Result<usize>>()?;
            let (mut hits, mut eligible) = (0, 0);
            for r in chunk {
                let (h, e) = hit_counts(&r.tokens, &model.predictor);
                hits += h;
                eligible += e;
            }
            let mut segments = chunk.to_vec();
            if config.replace {
                let pieces: Vec<Vec<Token>> = chunk.iter().map(|r| r.tokens.clone()).collect();
                let (replaced, _) = replace_pieces::<f64, _>(&pieces, &model.predictor, config.max_combination);
                for (seg, rep) in segments.iter_mut().zip(replaced) {
                    seg.tokens = rep.items;
                }
            }
            let tokens = segments.iter().map(|s| s.tokens.len()).sum();
            let packed = pack_batch(&UpdatePacket { digest, segments }, &config.packet, alphabet)?;
            out.push(CompressedPacket {
                group: model.id,
                cluster,
                packed,
                plain_stream_bits,
                tokens,
                hits,
                eligible,
            });
        }
    }
    Ok(out)
}

/// Compresses the sequences of one batch period starting at `start`.
///
/// Every object must belong to exactly one model and every model member
/// must have a (possibly empty) sequence. One packet is produced per group
/// and cluster that holds any of the group's items.
pub fn compress_batch<T: Real>(
    seqs: &[LocationSequence],
    models: &[GroupModel<T>],
    grid: &SensorGrid,
    start: u32,
    config: &CodecConfig,
) -> Result<CompressedBatch> {
    config.packet.validate()?;
    let mut owner: BTreeMap<ObjectId, GroupId> = BTreeMap::new();
    let mut group_ids = BTreeSet::new();
    for m in models {
        if !group_ids.insert(m.id) {
            return Err(Error::InconsistentObjects(format!("group {} is defined twice", m.id)));
        }
        for &obj in &m.members {
            if owner.insert(obj, m.id).is_some() {
                return Err(Error::InconsistentObjects(format!("object {obj} belongs to two groups")));
            }
        }
    }
    let mut per_group: BTreeMap<GroupId, Vec<LocationSequence>> = BTreeMap::new();
    for s in seqs {
        if s.items.first().is_some_and(|i| i.t < start) {
            return domain(format!("object {} has items before the batch start {start}", s.object_id));
        }
        let gid = owner
            .get(&s.object_id)
            .ok_or_else(|| Error::InconsistentObjects(format!("object {} has no group", s.object_id)))?;
        per_group.entry(*gid).or_default().push(s.clone());
    }
    let mut packets = Vec::new();
    for m in models {
        let member_seqs = per_group.remove(&m.id).unwrap_or_default();
        if member_seqs.len() != m.members.len() {
            return Err(Error::InconsistentObjects(format!(
                "group {} has {} members but {} sequences",
                m.id,
                m.members.len(),
                member_seqs.len()
            )));
        }
        packets.extend(compress_group(m, &member_seqs, grid, start, config)?);
    }
    Ok(CompressedBatch { start, packets })
}

fn model_for<'a, T>(models: &'a [GroupModel<T>], rec: &SegmentRecord) -> Result<&'a GroupModel<T>> {
    let found = match rec.kind {
        SegmentKind::Group => models.iter().find(|m| m.id == rec.id),
        SegmentKind::Single => models.iter().find(|m| m.members.binary_search(&rec.id).is_ok()),
    };
    found.ok_or_else(|| Error::Format(format!("segment id {} matches no known group or object", rec.id)))
}

fn packet_segments<T: Real>(
    bytes: &[u8],
    table: &crate::codec::HuffmanTable,
    models: &[GroupModel<T>],
    grid: &SensorGrid,
    start: u32,
    config: &PacketConfig,
) -> Result<Vec<Segment>> {
    let packet = unpack_packet(bytes, table, config, grid.node_count())?;
    let Some(first) = packet.segments.first() else {
        return Ok(Vec::new());
    };
    let model = model_for(models, first)?;
    let local = model.predictor.digest();
    if local != packet.digest {
        return Err(Error::DigestMismatch {
            packet: packet.digest,
            local,
        });
    }
    let mut out = Vec::with_capacity(packet.segments.len());
    for rec in &packet.segments {
        if !std::ptr::eq(model_for(models, rec)?, model) {
            return Err(Error::Format("a packet mixes segments of different groups".into()));
        }
        let tokens = restore(&rec.tokens, &model.predictor);
        let begin = start + rec.begin;
        let (members, rows): (Vec<ObjectId>, Vec<Vec<Symbol>>) = match rec.kind {
            SegmentKind::Group => {
                let merged = MergedSequence {
                    group_size: model.members.len(),
                    tokens,
                };
                let columns = unmerge(&merged, begin)?;
                (model.members.clone(), rows_from_columns(&columns, model.members.len()))
            }
            SegmentKind::Single => {
                let row = tokens
                    .iter()
                    .map(|t| t.loc().ok_or_else(|| Error::Format("control token in a single segment".into())))
                    .collect::<Result<Vec<_>>>()?;
                (vec![rec.id], vec![row])
            }
        };
        let cluster = match rows.first().and_then(|r| r.first()) {
            Some(&s) => grid.cluster_of_symbol(s)?,
            None => 0,
        };
        out.push(Segment {
            kind: rec.kind,
            cluster,
            begin,
            members,
            rows,
        });
    }
    Ok(out)
}

/// Decodes one packet into the per-object sequences it carries.
pub fn unpack_batch<T: Real>(
    bytes: &[u8],
    table: &crate::codec::HuffmanTable,
    models: &[GroupModel<T>],
    grid: &SensorGrid,
    start: u32,
    config: &PacketConfig,
) -> Result<Vec<LocationSequence>> {
    Ok(desegment(&packet_segments(bytes, table, models, grid, start, config)?))
}

/// Decodes every packet of a batch and joins the sequences per object.
pub fn decompress_batch<T: Real>(
    batch: &CompressedBatch,
    models: &[GroupModel<T>],
    grid: &SensorGrid,
    config: &PacketConfig,
) -> Result<Vec<LocationSequence>> {
    let mut segments = Vec::new();
    for p in &batch.packets {
        segments.extend(packet_segments(&p.packed.bytes, &p.packed.table, models, grid, batch.start, config)?);
    }
    Ok(desegment(&segments))
}

//! Segmentation of per-object sequences at cluster boundaries and alignment
//! of co-resident group members into G-segments.

use std::collections::{BTreeMap, BTreeSet};

use super::grid::SensorGrid;
use super::mobility::{Item, LocationSequence};
use crate::error::{domain, Result};
use crate::symbol::{ObjectId, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SegmentKind {
    /// Aligned slices of every group member.
    Group,
    /// A single object's slice.
    Single,
}

/// A time-contiguous slice of one or more sequences inside one cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub cluster: u32,
    pub begin: u32,
    /// Member object ids in ascending order; one entry for S-segments.
    pub members: Vec<ObjectId>,
    /// One row per member, all of equal length.
    pub rows: Vec<Vec<Symbol>>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// End timestamp, exclusive.
    pub fn end(&self) -> u32 {
        self.begin + self.len() as u32
    }

    /// Items of member `idx` with their timestamps.
    pub fn items(&self, idx: usize) -> impl Iterator<Item = Item> + '_ {
        self.rows[idx]
            .iter()
            .enumerate()
            .map(move |(i, &s)| Item::new(self.begin + i as u32, s))
    }
}

/// Splits `seqs` into segments.
///
/// Intervals at which every input object is observed inside one common
/// cluster form G-segments (maximal runs per cluster). All remaining items
/// become S-segments, split wherever the object changes cluster or its
/// timestamps stop being consecutive. With fewer than two objects there are
/// no G-segments.
pub fn segment_and_align(seqs: &[LocationSequence], grid: &SensorGrid) -> Result<Vec<Segment>> {
    if seqs.is_empty() {
        return Ok(Vec::new());
    }
    let mut ids = BTreeSet::new();
    for s in seqs {
        s.validate()?;
        if !ids.insert(s.object_id) {
            return domain(format!("object {} appears twice", s.object_id));
        }
    }
    let mut order: Vec<&LocationSequence> = seqs.iter().collect();
    order.sort_by_key(|s| s.object_id);
    let members: Vec<ObjectId> = order.iter().map(|s| s.object_id).collect();

    let clusters: Vec<Vec<u32>> = order
        .iter()
        .map(|s| {
            s.items
                .iter()
                .map(|i| grid.cluster_of_symbol(i.symbol))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    // timestamp -> (cluster, per-member index into items) where all members co-reside
    let mut together: BTreeMap<u32, u32> = BTreeMap::new();
    let mut in_group: Vec<Vec<bool>> = order.iter().map(|s| vec![false; s.len()]).collect();
    if order.len() >= 2 {
        let positions: Vec<BTreeMap<u32, usize>> = order
            .iter()
            .map(|s| s.items.iter().enumerate().map(|(i, it)| (it.t, i)).collect())
            .collect();
        for (&t, &i0) in &positions[0] {
            let c0 = clusters[0][i0];
            let all = positions[1..].iter().enumerate().all(|(k, pos)| {
                pos.get(&t).is_some_and(|&i| clusters[k + 1][i] == c0)
            });
            if all {
                together.insert(t, c0);
                for (k, pos) in positions.iter().enumerate() {
                    in_group[k][pos[&t]] = true;
                }
            }
        }
    }

    let mut out = Vec::new();

    // G-segments: maximal runs of consecutive co-resident timestamps
    let mut run: Option<(u32, u32, u32)> = None; // (cluster, begin, end exclusive)
    let flush = |run: (u32, u32, u32), out: &mut Vec<Segment>| {
        let (cluster, begin, end) = run;
        let rows = order
            .iter()
            .map(|s| {
                s.items
                    .iter()
                    .filter(|i| i.t >= begin && i.t < end)
                    .map(|i| i.symbol)
                    .collect()
            })
            .collect();
        out.push(Segment {
            kind: SegmentKind::Group,
            cluster,
            begin,
            members: members.clone(),
            rows,
        });
    };
    for (&t, &c) in &together {
        run = match run {
            Some((rc, b, e)) if rc == c && e == t => Some((rc, b, t + 1)),
            Some(r) => {
                flush(r, &mut out);
                Some((c, t, t + 1))
            }
            None => Some((c, t, t + 1)),
        };
    }
    if let Some(r) = run {
        flush(r, &mut out);
    }

    // S-segments from the leftovers
    for (k, s) in order.iter().enumerate() {
        let mut current: Option<Segment> = None;
        for (i, item) in s.items.iter().enumerate() {
            if in_group[k][i] {
                if let Some(seg) = current.take() {
                    out.push(seg);
                }
                continue;
            }
            let cluster = clusters[k][i];
            match current.as_mut() {
                Some(seg) if seg.cluster == cluster && seg.end() == item.t => {
                    seg.rows[0].push(item.symbol)
                }
                _ => {
                    if let Some(seg) = current.take() {
                        out.push(seg);
                    }
                    current = Some(Segment {
                        kind: SegmentKind::Single,
                        cluster,
                        begin: item.t,
                        members: vec![s.object_id],
                        rows: vec![vec![item.symbol]],
                    });
                }
            }
        }
        if let Some(seg) = current {
            out.push(seg);
        }
    }

    out.sort_by(|a, b| {
        (a.begin, a.kind, &a.members, a.cluster).cmp(&(b.begin, b.kind, &b.members, b.cluster))
    });
    Ok(out)
}

/// Inverse of segmentation: per-object sequences sorted by timestamp.
pub fn desegment(segments: &[Segment]) -> Vec<LocationSequence> {
    let mut per_object: BTreeMap<ObjectId, Vec<Item>> = BTreeMap::new();
    for seg in segments {
        for (idx, &obj) in seg.members.iter().enumerate() {
            per_object.entry(obj).or_default().extend(seg.items(idx));
        }
    }
    per_object
        .into_iter()
        .map(|(object_id, mut items)| {
            items.sort();
            LocationSequence { object_id, items }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::grid::Location;

    fn sym(grid: &SensorGrid, x: u32, y: u32) -> Symbol {
        grid.symbol(Location::new(x, y)).unwrap()
    }

    #[test]
    fn empty_input_gives_no_segments() {
        assert!(segment_and_align(&[], &SensorGrid::default()).unwrap().is_empty());
    }

    #[test]
    fn single_object_in_one_cluster_is_one_s_segment() {
        let g = SensorGrid::default();
        let s = LocationSequence::from_symbols(3, 0, &[sym(&g, 0, 0), sym(&g, 1, 0), sym(&g, 1, 1)]);
        let segs = segment_and_align(&[s.clone()], &g).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].kind, SegmentKind::Single);
        assert_eq!(segs[0].rows[0], s.symbols());
    }

    #[test]
    fn cluster_crossing_splits_at_tile_boundary() {
        let g = SensorGrid::default();
        // x = 2,3 in cluster 0 then x = 4,5 in cluster 1
        let path: Vec<Symbol> = [2, 2, 3, 3, 4, 4, 5].iter().map(|&x| sym(&g, x, 1)).collect();
        let s = LocationSequence::from_symbols(0, 10, &path);
        let segs = segment_and_align(&[s], &g).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!((segs[0].begin, segs[0].len(), segs[0].cluster), (10, 4, 0));
        assert_eq!((segs[1].begin, segs[1].len(), segs[1].cluster), (14, 3, 1));
    }

    #[test]
    fn staggered_entry_gives_one_g_segment_and_solo_fragments() {
        // three objects share cluster 0 during t = 2..8 and are observed on
        // their own before and after
        let g = SensorGrid::default();
        let inside = sym(&g, 1, 1);
        let outside = sym(&g, 9, 9);
        let a: Vec<Symbol> = (0..8).map(|t| if t < 2 { outside } else { inside }).collect();
        let b: Vec<Symbol> = (2..10).map(|t| if t < 8 { inside } else { outside }).collect();
        let c: Vec<Symbol> = (1..9).map(|t| if (2..8).contains(&t) { inside } else { outside }).collect();
        let seqs = vec![
            LocationSequence::from_symbols(0, 0, &a),
            LocationSequence::from_symbols(1, 2, &b),
            LocationSequence::from_symbols(2, 1, &c),
        ];
        let segs = segment_and_align(&seqs, &g).unwrap();
        let groups: Vec<_> = segs.iter().filter(|s| s.kind == SegmentKind::Group).collect();
        assert_eq!(groups.len(), 1);
        assert_eq!((groups[0].begin, groups[0].len()), (2, 6));
        assert_eq!(groups[0].members, vec![0, 1, 2]);
        let singles: Vec<_> = segs
            .iter()
            .filter(|s| s.kind == SegmentKind::Single)
            .map(|s| (s.members[0], s.begin, s.len()))
            .collect();
        assert_eq!(singles, vec![(0, 0, 2), (2, 1, 1), (1, 8, 2), (2, 8, 1)]);
        assert_eq!(desegment(&segs), seqs);
    }
}

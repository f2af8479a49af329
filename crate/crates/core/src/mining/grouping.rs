use std::collections::BTreeMap;

use crate::symbol::{GroupId, ObjectId};

/// A partition of objects into groups, as reported by one local region or
/// by the ensemble.
///
/// Group ids are canonical: groups are numbered from 0 in order of their
/// smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupingResult {
    pub source: Option<u32>,
    partition: BTreeMap<ObjectId, GroupId>,
}

impl GroupingResult {
    pub fn from_groups<I, G>(groups: I, source: Option<u32>) -> Self
    where
        I: IntoIterator<Item = G>,
        G: IntoIterator<Item = ObjectId>,
    {
        let mut groups: Vec<Vec<ObjectId>> = groups
            .into_iter()
            .map(|g| {
                let mut g: Vec<ObjectId> = g.into_iter().collect();
                g.sort_unstable();
                g.dedup();
                g
            })
            .filter(|g| !g.is_empty())
            .collect();
        groups.sort();
        let mut partition = BTreeMap::new();
        for (gid, g) in groups.iter().enumerate() {
            for &obj in g {
                partition.insert(obj, gid as GroupId);
            }
        }
        // an object listed in two groups keeps the later one; re-canonicalise
        Self::from_partition(partition, source)
    }

    /// Canonicalises arbitrary labels.
    pub fn from_partition(labels: BTreeMap<ObjectId, GroupId>, source: Option<u32>) -> Self {
        let mut remap = BTreeMap::new();
        let mut partition = BTreeMap::new();
        for (&obj, label) in &labels {
            let next = remap.len() as GroupId;
            let gid = *remap.entry(label).or_insert(next);
            partition.insert(obj, gid);
        }
        GroupingResult { source, partition }
    }

    pub fn partition(&self) -> &BTreeMap<ObjectId, GroupId> {
        &self.partition
    }

    pub fn group_of(&self, obj: ObjectId) -> Option<GroupId> {
        self.partition.get(&obj).copied()
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.partition.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.partition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partition.is_empty()
    }

    /// Groups in canonical order, members ascending.
    pub fn groups(&self) -> Vec<Vec<ObjectId>> {
        let mut out: Vec<Vec<ObjectId>> = Vec::new();
        for (&obj, &gid) in &self.partition {
            let gid = gid as usize;
            if out.len() <= gid {
                out.resize(gid + 1, Vec::new());
            }
            out[gid].push(obj);
        }
        out
    }

    pub fn same_group(&self, a: ObjectId, b: ObjectId) -> bool {
        matches!((self.group_of(a), self.group_of(b)), (Some(x), Some(y)) if x == y)
    }
}

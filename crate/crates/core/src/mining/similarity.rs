use std::collections::{BTreeMap, BTreeSet};

use super::pst::PatternTree;
use crate::error::{domain, Result};
use crate::num::Real;
use crate::symbol::{ObjectId, Symbol};

/// Distance floor keeping the similarity score finite.
pub const MIN_DISTANCE: f64 = 1e-6;

/// Weighted L1 distance between two trees.
///
/// Every context stored in either tree contributes the L1 distance between
/// the two trees' next-symbol distributions for it (a tree that does not
/// store the context answers with its longest stored suffix), weighted by
/// the mean of the context's significance in both trees (zero where a tree
/// does not store it). The result is the weighted average and lies in
/// `[0, 2]`.
pub fn tree_distance<T: Real>(a: &PatternTree<T>, b: &PatternTree<T>) -> Result<T> {
    if a.alphabet() != b.alphabet() {
        return domain(format!(
            "trees use different alphabets ({} vs {})",
            a.alphabet(),
            b.alphabet()
        ));
    }
    let contexts: BTreeSet<&[Symbol]> = a.contexts().chain(b.contexts()).map(|(c, _)| c).collect();
    let half = T::from_f64_lossy(0.5);
    let (mut num, mut den) = (T::zero(), T::zero());
    for ctx in contexts {
        let sa = a.get(ctx).map_or(T::zero(), |n| n.significance);
        let sb = b.get(ctx).map_or(T::zero(), |n| n.significance);
        let w = (sa + sb) * half;
        let da = &a.lookup(ctx).distribution;
        let db = &b.lookup(ctx).distribution;
        let l1: T = da.iter().zip(db).map(|(&p, &q)| (p - q).abs()).sum();
        num += w * l1;
        den += w;
    }
    Ok(if den > T::zero() { num / den } else { T::zero() })
}

/// Similarity score `-ln(max(d, MIN_DISTANCE))`; larger means more alike.
pub fn simp_score<T: Real>(a: &PatternTree<T>, b: &PatternTree<T>) -> Result<T> {
    let d = tree_distance(a, b)?;
    Ok(-d.max(T::from_f64_lossy(MIN_DISTANCE)).ln())
}

/// The largest score [`simp_score`] can return.
pub fn max_score<T: Real>() -> T {
    -T::from_f64_lossy(MIN_DISTANCE).ln()
}

/// Undirected, unweighted graph over object ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimilarityGraph {
    vertices: Vec<ObjectId>,
    adjacency: Vec<BTreeSet<usize>>,
}

impl SimilarityGraph {
    pub fn new(mut vertices: Vec<ObjectId>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        let adjacency = vec![BTreeSet::new(); vertices.len()];
        SimilarityGraph {
            vertices,
            adjacency,
        }
    }

    /// Adds the edge `a – b`; self-loops and unknown ids are ignored.
    pub fn add_edge(&mut self, a: ObjectId, b: ObjectId) {
        if a == b {
            return;
        }
        if let (Some(i), Some(j)) = (self.index(a), self.index(b)) {
            self.adjacency[i].insert(j);
            self.adjacency[j].insert(i);
        }
    }

    pub fn index(&self, id: ObjectId) -> Option<usize> {
        self.vertices.binary_search(&id).ok()
    }

    pub fn vertices(&self) -> &[ObjectId] {
        &self.vertices
    }

    pub fn neighbours(&self, idx: usize) -> &BTreeSet<usize> {
        &self.adjacency[idx]
    }

    pub fn has_edge(&self, a: ObjectId, b: ObjectId) -> bool {
        match (self.index(a), self.index(b)) {
            (Some(i), Some(j)) => self.adjacency[i].contains(&j),
            _ => false,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }
}

/// Connects every pair whose similarity score reaches `threshold`.
pub fn build_similarity_graph<T: Real>(
    trees: &BTreeMap<ObjectId, PatternTree<T>>,
    threshold: T,
) -> Result<SimilarityGraph> {
    let mut graph = SimilarityGraph::new(trees.keys().copied().collect());
    let entries: Vec<_> = trees.iter().collect();
    for (i, (&a, ta)) in entries.iter().enumerate() {
        for (&b, tb) in &entries[i + 1..] {
            if simp_score(ta, tb)? >= threshold {
                graph.add_edge(a, b);
            }
        }
    }
    Ok(graph)
}

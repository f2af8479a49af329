//! Cluster ensembling of local grouping results.

use std::collections::{BTreeMap, BTreeSet};

use super::grouping::GroupingResult;
use crate::error::{domain, Error, Result};
use crate::num::Real;
use crate::symbol::{GroupId, ObjectId};

/// Normalised mutual information `I(X;Y) / sqrt(H(X) H(Y))` between two
/// labelings of the same items. Two single-cluster labelings score 1; a
/// single-cluster labeling against any other scores 0.
pub fn nmi<T: Real>(a: &[GroupId], b: &[GroupId]) -> T {
    assert_eq!(a.len(), b.len(), "labelings must cover the same items");
    let n = a.len();
    if n == 0 {
        return T::one();
    }
    let mut joint: BTreeMap<(GroupId, GroupId), usize> = BTreeMap::new();
    let mut ca: BTreeMap<GroupId, usize> = BTreeMap::new();
    let mut cb: BTreeMap<GroupId, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
    }
    let nf = T::from_usize_lossy(n);
    let entropy = |counts: &BTreeMap<GroupId, usize>| -> T {
        -counts
            .values()
            .map(|&c| {
                let p = T::from_usize_lossy(c) / nf;
                p * p.ln()
            })
            .sum::<T>()
    };
    let (ha, hb) = (entropy(&ca), entropy(&cb));
    let tiny = T::from_f64_lossy(1e-15);
    if ha <= tiny && hb <= tiny {
        return T::one();
    }
    if ha <= tiny || hb <= tiny {
        return T::zero();
    }
    let mi: T = joint
        .iter()
        .map(|(&(x, y), &c)| {
            let pxy = T::from_usize_lossy(c) / nf;
            let px = T::from_usize_lossy(ca[&x]) / nf;
            let py = T::from_usize_lossy(cb[&y]) / nf;
            pxy * (pxy / (px * py)).ln()
        })
        .sum();
    (mi / (ha * hb).sqrt()).min(T::one()).max(T::zero())
}

/// NMI of `candidate` against `local`, over the objects `local` mentions.
fn nmi_against<T: Real>(candidate: &GroupingResult, local: &GroupingResult) -> T {
    let (a, b): (Vec<GroupId>, Vec<GroupId>) = local
        .partition()
        .iter()
        .map(|(&obj, &g)| (candidate.group_of(obj).expect("candidate covers the universe"), g))
        .unzip();
    nmi(&a, &b)
}

/// Pairwise co-association: among the local results that mention both
/// objects, the fraction (Jaccard coefficient of "grouped together" against
/// "mentioned together") that put them in the same group. Pairs never
/// mentioned together score 0.
pub fn co_association<T: Real>(
    locals: &[GroupingResult],
    universe: &[ObjectId],
) -> BTreeMap<(ObjectId, ObjectId), T> {
    let mut out = BTreeMap::new();
    for (i, &a) in universe.iter().enumerate() {
        for &b in &universe[i + 1..] {
            let mut together = 0usize;
            let mut mentioned = 0usize;
            for r in locals {
                if let (Some(x), Some(y)) = (r.group_of(a), r.group_of(b)) {
                    mentioned += 1;
                    together += usize::from(x == y);
                }
            }
            let score = if mentioned == 0 {
                T::zero()
            } else {
                T::from_usize_lossy(together) / T::from_usize_lossy(mentioned)
            };
            out.insert((a, b), score);
        }
    }
    out
}

fn components_at<T: Real>(
    universe: &[ObjectId],
    co: &BTreeMap<(ObjectId, ObjectId), T>,
    level: T,
) -> GroupingResult {
    // union-find over universe indices
    let mut parent: Vec<usize> = (0..universe.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    let index: BTreeMap<ObjectId, usize> = universe.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let slack = T::from_f64_lossy(1e-12);
    for (&(a, b), &s) in co {
        if s + slack >= level {
            let (ra, rb) = (find(&mut parent, index[&a]), find(&mut parent, index[&b]));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let labels: BTreeMap<ObjectId, GroupId> = universe
        .iter()
        .enumerate()
        .map(|(i, &o)| (o, find(&mut parent, i) as GroupId))
        .collect();
    GroupingResult::from_partition(labels, None)
}

/// Combines local grouping results.
///
/// The co-association graph is thresholded at `levels` evenly spaced levels
/// `k / (levels + 1)`; each threshold yields a candidate partition (its
/// connected components) and the candidate with the highest mean NMI
/// against the local results wins, the lowest level on ties.
pub fn ce_ensemble<T: Real>(locals: &[GroupingResult], levels: usize) -> Result<GroupingResult> {
    if locals.is_empty() {
        return domain("ensembling needs at least one local result");
    }
    if levels == 0 {
        return domain("the partition parameter must be at least 1");
    }
    if let Some(r) = locals.iter().find(|r| r.is_empty()) {
        return Err(Error::InconsistentObjects(format!(
            "local result {:?} mentions no objects",
            r.source
        )));
    }
    if locals.len() == 1 {
        return Ok(locals[0].clone());
    }
    let universe: Vec<ObjectId> = locals
        .iter()
        .flat_map(|r| r.objects())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let co = co_association::<T>(locals, &universe);

    let mut best: Option<(T, GroupingResult)> = None;
    let denom = T::from_usize_lossy(levels + 1);
    let count = T::from_usize_lossy(locals.len());
    for k in 1..=levels {
        let level = T::from_usize_lossy(k) / denom;
        let candidate = components_at(&universe, &co, level);
        if best.as_ref().is_some_and(|(_, b)| *b == candidate) {
            continue;
        }
        let score = locals.iter().map(|r| nmi_against::<T>(&candidate, r)).sum::<T>() / count;
        if best.as_ref().map_or(true, |(s, _)| score > *s) {
            best = Some((score, candidate));
        }
    }
    Ok(best.expect("levels >= 1").1)
}

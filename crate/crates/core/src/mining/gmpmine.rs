//! Local group mining and the regional pipeline feeding the ensemble.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::ensemble::ce_ensemble;
use super::grouping::GroupingResult;
use super::hcs::hcs_cluster;
use super::pst::{PatternTree, PstParams};
use super::similarity::build_similarity_graph;
use crate::error::{domain, Result};
use crate::num::Real;
use crate::symbol::{GroupId, ObjectId, Symbol};
use crate::world::{LocationSequence, SensorGrid};

#[derive(Clone, Debug, PartialEq)]
pub struct MiningParams<T> {
    pub pst: PstParams<T>,
    /// Minimum similarity score for an edge of the similarity graph.
    pub similarity_threshold: T,
    /// Number of threshold levels tried by the ensemble.
    pub ensemble_levels: usize,
    /// Number of local regions (vertical bands of cluster columns).
    pub regions: u32,
    /// Objects with fewer items inside a region are left out of its result.
    pub min_region_items: usize,
}

impl<T: Real> Default for MiningParams<T> {
    fn default() -> Self {
        MiningParams {
            pst: PstParams::default(),
            similarity_threshold: T::from_f64_lossy(2.0),
            ensemble_levels: 4,
            regions: 3,
            min_region_items: 8,
        }
    }
}

/// Splits an object's items into runs of consecutive timestamps.
fn contiguous_runs(seq: &LocationSequence) -> Vec<Vec<Symbol>> {
    let mut runs: Vec<Vec<Symbol>> = Vec::new();
    let mut last_t: Option<u32> = None;
    for item in &seq.items {
        match (runs.last_mut(), last_t) {
            (Some(run), Some(t)) if item.t == t + 1 => run.push(item.symbol),
            _ => runs.push(vec![item.symbol]),
        }
        last_t = Some(item.t);
    }
    runs
}

/// Learns one tree per object, in parallel.
pub fn learn_trees<T: Real>(
    seqs: &[LocationSequence],
    alphabet: u32,
    params: PstParams<T>,
) -> Result<BTreeMap<ObjectId, PatternTree<T>>> {
    seqs.par_iter()
        .map(|s| {
            let runs = contiguous_runs(s);
            let refs: Vec<&[Symbol]> = runs.iter().map(Vec::as_slice).collect();
            PatternTree::learn_many(&refs, alphabet, params).map(|t| (s.object_id, t))
        })
        .collect()
}

/// Local grouping of the objects in `seqs`: trees, similarity graph, HCS.
pub fn mine_local<T: Real>(
    seqs: &[LocationSequence],
    alphabet: u32,
    params: &MiningParams<T>,
    source: Option<u32>,
) -> Result<GroupingResult> {
    if seqs.is_empty() {
        return domain("local mining needs at least one object");
    }
    let trees = learn_trees(seqs, alphabet, params.pst)?;
    let graph = build_similarity_graph(&trees, params.similarity_threshold)?;
    Ok(hcs_cluster(&graph, source))
}

/// Region (vertical band of cluster columns) holding `symbol`.
pub fn region_of(grid: &SensorGrid, regions: u32, symbol: Symbol) -> Result<u32> {
    let cluster = grid.cluster_of_symbol(symbol)?;
    let column = cluster % grid.cluster_grid();
    Ok(column * regions / grid.cluster_grid())
}

/// Runs local mining once per region on the items observed inside it.
pub fn mine_regions<T: Real>(
    seqs: &[LocationSequence],
    grid: &SensorGrid,
    params: &MiningParams<T>,
) -> Result<Vec<GroupingResult>> {
    if params.regions == 0 || params.regions > grid.cluster_grid() {
        return domain(format!(
            "{} regions cannot be formed from {} cluster columns",
            params.regions,
            grid.cluster_grid()
        ));
    }
    let mut out = Vec::new();
    for region in 0..params.regions {
        let mut local = Vec::new();
        for s in seqs {
            let mut items = Vec::new();
            for &item in &s.items {
                if region_of(grid, params.regions, item.symbol)? == region {
                    items.push(item);
                }
            }
            if items.len() >= params.min_region_items.max(1) {
                local.push(LocationSequence {
                    object_id: s.object_id,
                    items,
                });
            }
        }
        if !local.is_empty() {
            out.push(mine_local(&local, grid.node_count(), params, Some(region))?);
        }
    }
    Ok(out)
}

/// Output of the full mining pipeline.
#[derive(Clone, Debug)]
pub struct MiningOutcome<T> {
    pub locals: Vec<GroupingResult>,
    pub groups: GroupingResult,
    /// Group-level predictor per group of at least two members, learned on
    /// all member sequences together.
    pub models: BTreeMap<GroupId, PatternTree<T>>,
}

/// Regional mining, ensembling and group-model learning.
pub fn mine_groups<T: Real>(
    seqs: &[LocationSequence],
    grid: &SensorGrid,
    params: &MiningParams<T>,
) -> Result<MiningOutcome<T>> {
    let locals = mine_regions(seqs, grid, params)?;
    let groups = if locals.is_empty() {
        mine_local(seqs, grid.node_count(), params, None)?
    } else {
        ce_ensemble::<T>(&locals, params.ensemble_levels)?
    };
    let mut models = BTreeMap::new();
    for (gid, members) in groups.groups().into_iter().enumerate() {
        if members.len() < 2 {
            continue;
        }
        let member_seqs: Vec<&LocationSequence> =
            seqs.iter().filter(|s| members.contains(&s.object_id)).collect();
        models.insert(gid as GroupId, learn_group_model(&member_seqs, grid.node_count(), params.pst)?);
    }
    Ok(MiningOutcome {
        locals,
        groups,
        models,
    })
}

/// Group predictor learned from every member's sequence.
pub fn learn_group_model<T: Real>(
    members: &[&LocationSequence],
    alphabet: u32,
    params: PstParams<T>,
) -> Result<PatternTree<T>> {
    let runs: Vec<Vec<Symbol>> = members.iter().flat_map(|s| contiguous_runs(s)).collect();
    let refs: Vec<&[Symbol]> = runs.iter().map(Vec::as_slice).collect();
    PatternTree::learn_many(&refs, alphabet, params)
}

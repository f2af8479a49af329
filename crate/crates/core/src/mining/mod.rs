//! Group movement pattern mining: per-object pattern trees, the similarity
//! graph, highly connected subgraph clustering and ensembling of regional
//! results.

mod ensemble;
mod gmpmine;
mod grouping;
mod hcs;
mod pst;
mod similarity;

pub use ensemble::{ce_ensemble, co_association, nmi};
pub use gmpmine::{
    learn_group_model, learn_trees, mine_groups, mine_local, mine_regions, region_of,
    MiningOutcome, MiningParams,
};
pub use grouping::GroupingResult;
pub use hcs::{hcs_cluster, min_cut};
pub use pst::{ContextNode, PatternTree, PstParams};
pub use similarity::{
    build_similarity_graph, max_score, simp_score, tree_distance, SimilarityGraph, MIN_DISTANCE,
};

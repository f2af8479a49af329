//! Highly connected subgraph clustering.

use std::collections::BTreeSet;

use super::grouping::GroupingResult;
use super::similarity::SimilarityGraph;

/// Global minimum edge cut of the subgraph induced by `vertices` (indices
/// into `graph`), by Stoer–Wagner contraction. Returns the cut weight and the
/// side that contains the smallest vertex. Needs at least two vertices.
pub fn min_cut(graph: &SimilarityGraph, vertices: &[usize]) -> (usize, Vec<usize>) {
    let n = vertices.len();
    assert!(n >= 2, "a cut needs two vertices");
    let mut weight = vec![vec![0usize; n]; n];
    for (i, &u) in vertices.iter().enumerate() {
        for (j, &v) in vertices.iter().enumerate() {
            if graph.neighbours(u).contains(&v) {
                weight[i][j] = 1;
            }
        }
    }
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut best: Option<(usize, Vec<usize>)> = None;

    while active.len() > 1 {
        let mut in_a = vec![false; n];
        let mut key = vec![0usize; n];
        let mut prev = active[0];
        let mut last = active[0];
        in_a[last] = true;
        for &v in &active {
            key[v] = weight[last][v];
        }
        for _ in 1..active.len() {
            // ties go to the first (smallest) active index
            let next = active
                .iter()
                .copied()
                .filter(|&v| !in_a[v])
                .fold(None, |acc: Option<usize>, v| match acc {
                    Some(a) if key[a] >= key[v] => Some(a),
                    _ => Some(v),
                })
                .expect("an unvisited vertex remains");
            in_a[next] = true;
            prev = last;
            last = next;
            for &v in &active {
                if !in_a[v] {
                    key[v] += weight[next][v];
                }
            }
        }
        let cut = key[last];
        if best.as_ref().map_or(true, |(w, _)| cut < *w) {
            best = Some((cut, members[last].clone()));
        }
        // contract `last` into `prev`
        let moved = std::mem::take(&mut members[last]);
        members[prev].extend(moved);
        for &v in &active {
            weight[prev][v] += weight[last][v];
            weight[v][prev] = weight[prev][v];
        }
        weight[prev][prev] = 0;
        active.retain(|&v| v != last);
    }

    let (cut, side) = best.expect("at least one phase ran");
    let side: BTreeSet<usize> = side.into_iter().map(|i| vertices[i]).collect();
    let smallest = *vertices.iter().min().unwrap();
    let side: Vec<usize> = if side.contains(&smallest) {
        side.into_iter().collect()
    } else {
        let mut rest: Vec<usize> = vertices.iter().copied().filter(|v| !side.contains(v)).collect();
        rest.sort_unstable();
        rest
    };
    (cut, side)
}

fn components(graph: &SimilarityGraph, vertices: &[usize]) -> Vec<Vec<usize>> {
    let set: BTreeSet<usize> = vertices.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in &set {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in graph.neighbours(u) {
                if set.contains(&v) && seen.insert(v) {
                    comp.push(v);
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn split(graph: &SimilarityGraph, vertices: Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if vertices.len() <= 1 {
        out.push(vertices);
        return;
    }
    let comps = components(graph, &vertices);
    if comps.len() > 1 {
        for c in comps {
            split(graph, c, out);
        }
        return;
    }
    let (cut, side) = min_cut(graph, &vertices);
    if 2 * cut > vertices.len() {
        out.push(vertices);
        return;
    }
    let side_set: BTreeSet<usize> = side.iter().copied().collect();
    let rest: Vec<usize> = vertices.into_iter().filter(|v| !side_set.contains(v)).collect();
    split(graph, side, out);
    split(graph, rest, out);
}

/// Splits `graph` by minimum cuts until every part is highly connected
/// (edge connectivity above half its size). Isolated vertices end up as
/// singleton groups.
pub fn hcs_cluster(graph: &SimilarityGraph, source: Option<u32>) -> GroupingResult {
    let mut parts = Vec::new();
    split(graph, (0..graph.vertices().len()).collect(), &mut parts);
    GroupingResult::from_groups(
        parts
            .into_iter()
            .map(|p| p.into_iter().map(|i| graph.vertices()[i]).collect::<Vec<_>>()),
        source,
    )
}

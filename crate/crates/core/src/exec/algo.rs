//! Whole-graph analytics outside the query language.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::ExecError;
use crate::graph::{EdgeId, PropertyGraph, VertexId};
use crate::views::Reducer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Along edges: descendants.
    Forward,
    /// Against edges: ancestors.
    Backward,
}

/// Vertices reached from `sources` over 1 to `k` edges, optionally only
/// through edges with the given labels.
pub fn k_hop_neighborhood(
    g: &PropertyGraph,
    sources: &[VertexId],
    dir: Direction,
    k: u32,
    labels: Option<&BTreeSet<String>>,
) -> BTreeSet<VertexId> {
    let mut seen: BTreeSet<VertexId> = sources.iter().copied().collect();
    let mut frontier: Vec<VertexId> = sources.to_vec();
    let mut out = BTreeSet::new();
    for _ in 0..k {
        let mut next = Vec::new();
        for &v in &frontier {
            let edges = match dir {
                Direction::Forward => g.out_edges(v),
                Direction::Backward => g.in_edges(v),
            };
            for &e in edges {
                if labels.is_some_and(|ls| !ls.contains(g.edge_label(e))) {
                    continue;
                }
                let w = match dir {
                    Direction::Forward => g.edge_dst(e),
                    Direction::Backward => g.edge_src(e),
                };
                out.insert(w);
                if seen.insert(w) {
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    out
}

/// For each vertex other than `source` reached by a trail of 1 to `k_max`
/// edges: the least, over such trails, of the reducer applied to edge
/// property `prop` along the trail. Edges lacking the property contribute
/// nothing.
pub fn path_lengths(
    g: &PropertyGraph,
    source: VertexId,
    k_max: u32,
    prop: &str,
    reducer: Reducer,
) -> Result<BTreeMap<VertexId, f64>, ExecError> {
    fn go(
        g: &PropertyGraph,
        at: VertexId,
        acc: f64,
        trail: &mut Vec<EdgeId>,
        k_max: u32,
        want: (&str, Reducer),
        best: &mut BTreeMap<VertexId, f64>,
    ) -> Result<(), ExecError> {
        if !trail.is_empty() {
            let b = best.entry(at).or_insert(f64::INFINITY);
            *b = b.min(acc);
        }
        if trail.len() as u32 == k_max {
            return Ok(());
        }
        for &e in g.out_edges(at) {
            if trail.contains(&e) {
                continue;
            }
            let next = match g.edge_props(e).get(want.0) {
                None => acc,
                Some(v) => {
                    let w = v.as_f64().ok_or_else(|| ExecError::PropertyTypeMismatch {
                        func: want.1.name().to_string(),
                        found: v.type_name().to_string(),
                    })?;
                    match want.1 {
                        Reducer::Max => acc.max(w),
                        Reducer::Sum => acc + w,
                    }
                }
            };
            trail.push(e);
            go(g, g.edge_dst(e), next, trail, k_max, want, best)?;
            trail.pop();
        }
        Ok(())
    }
    let start = match reducer {
        Reducer::Max => f64::NEG_INFINITY,
        Reducer::Sum => 0.0,
    };
    let mut best = BTreeMap::new();
    go(g, source, start, &mut Vec::new(), k_max, (prop, reducer), &mut best)?;
    best.remove(&source);
    Ok(best)
}

/// `path_lengths` from every `xtype` vertex, kept for `ytype` targets and
/// keyed by external ids.
pub fn path_lengths_by_type(
    g: &PropertyGraph,
    xtype: &str,
    ytype: &str,
    k_max: u32,
    prop: &str,
    reducer: Reducer,
) -> Result<BTreeMap<(String, String), f64>, ExecError> {
    let per_source: Vec<Vec<((String, String), f64)>> = g
        .vertices_of_type(xtype)
        .par_iter()
        .map(|&x| {
            Ok(path_lengths(g, x, k_max, prop, reducer)?
                .into_iter()
                .filter(|(y, _)| g.vertex_type(*y) == ytype)
                .map(|(y, d)| ((g.vertex_key(x).to_string(), g.vertex_key(y).to_string()), d))
                .collect())
        })
        .collect::<Result<_, ExecError>>()?;
    Ok(per_source.into_iter().flatten().collect())
}

/// Synchronous label propagation over the undirected view of `g`: each pass
/// every vertex takes the most frequent label among its neighbors and
/// itself, the smallest on ties. The self vote stops two-vertex swaps.
/// Labels are vertex ids.
pub fn label_propagation(g: &PropertyGraph, passes: u32) -> Vec<VertexId> {
    let mut labels: Vec<VertexId> = g.vertex_ids().collect();
    let ids = labels.clone();
    for _ in 0..passes {
        let next: Vec<VertexId> = ids
            .par_iter()
            .map(|&v| {
                let mut counts = BTreeMap::from([(labels[v.index()], 1u32)]);
                for &e in g.out_edges(v) {
                    *counts.entry(labels[g.edge_dst(e).index()]).or_default() += 1;
                }
                for &e in g.in_edges(v) {
                    *counts.entry(labels[g.edge_src(e).index()]).or_default() += 1;
                }
                counts
                    .into_iter()
                    .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                    .unwrap()
                    .0
            })
            .collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    labels
}

/// The community with the most `count_type` vertices, smallest label on
/// ties, with the subgraph its members induce.
pub fn largest_community(
    g: &PropertyGraph,
    labels: &[VertexId],
    count_type: &str,
) -> Option<(VertexId, usize, PropertyGraph)> {
    let mut counts: BTreeMap<VertexId, usize> = labels.iter().map(|&l| (l, 0)).collect();
    for &v in g.vertices_of_type(count_type) {
        *counts.get_mut(&labels[v.index()]).unwrap() += 1;
    }
    let (label, n) = counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))?;
    let mut sub = PropertyGraph::new(g.schema().clone());
    for v in g.vertex_ids().filter(|v| labels[v.index()] == label) {
        sub.add_vertex(g.vertex_key(v), g.vertex_type(v), g.vertex_props(v).clone())
            .expect("keys unique in source graph");
    }
    for e in g.edge_ids() {
        let (s, d) = (g.edge_src(e), g.edge_dst(e));
        if labels[s.index()] == label && labels[d.index()] == label {
            sub.add_edge(
                g.edge_key(e),
                g.vertex_key(s),
                g.vertex_key(d),
                g.edge_label(e),
                g.edge_props(e).clone(),
            )
            .expect("edge valid in source graph");
        }
    }
    Some((label, n, sub))
}

//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use graph_views::graph::{EdgeTriple, GraphSchema, PropertyGraph, VertexId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Triple = (String, String, String);

/// Procedural schema path mining: seed with single edges, then repeatedly
/// grow each path by one edge at either end and keep only the paths that
/// grew this round.
pub fn k_hop_schema_paths(schema_edges: &[Triple], k: usize) -> BTreeSet<Vec<Triple>> {
    fn step(edges: &[Triple], paths: Vec<Vec<Triple>>, k: usize, curr_k: usize) -> Vec<Vec<Triple>> {
        if curr_k == 0 {
            return paths.into_iter().filter(|p| p.len() == k).collect();
        }
        if k == curr_k {
            let seeded = edges.iter().map(|e| vec![e.clone()]).collect();
            return step(edges, seeded, k, k - 1);
        }
        let mut new_paths = Vec::new();
        for path in &paths {
            let src = &path[0].0;
            let dst = &path[path.len() - 1].1;
            for edge in edges {
                if *dst == edge.0 {
                    let mut p = path.clone();
                    p.push(edge.clone());
                    new_paths.push(p);
                }
                if *src == edge.1 {
                    let mut p = vec![edge.clone()];
                    p.extend(path.iter().cloned());
                    new_paths.push(p);
                }
            }
        }
        let mut seen = BTreeSet::new();
        new_paths.retain(|p| seen.insert(p.clone()));
        let grown = new_paths.into_iter().filter(|p| p.len() == k - curr_k + 1).collect();
        step(edges, grown, k, curr_k - 1)
    }
    if k == 0 {
        return BTreeSet::new();
    }
    step(schema_edges, Vec::new(), k, k).into_iter().collect()
}

pub fn triples(s: &GraphSchema) -> Vec<Triple> {
    s.edge_types()
        .iter()
        .map(|e| (e.src.clone(), e.dst.clone(), e.label.clone()))
        .collect()
}

/// Up to 5 types and up to 8 distinct edge triples.
pub fn random_schema(seed: u64) -> GraphSchema {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_types = rng.gen_range(1..=5);
    let types: Vec<String> = (0..n_types).map(|i| format!("T{i}")).collect();
    let labels = ["a", "b", "c"];
    let want = rng.gen_range(0..=8);
    let mut edges = BTreeSet::new();
    for _ in 0..want * 4 {
        if edges.len() == want {
            break;
        }
        edges.insert(EdgeTriple::new(
            types.choose(&mut rng).unwrap().clone(),
            types.choose(&mut rng).unwrap().clone(),
            *labels.choose(&mut rng).unwrap(),
        ));
    }
    GraphSchema::new(types, edges).unwrap()
}

/// A schema whose type graph is bipartite: every triple runs between the
/// two sides.
pub fn bipartite_schema(seed: u64) -> GraphSchema {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let left = rng.gen_range(1..=3);
    let right = rng.gen_range(1..=3);
    let l: Vec<String> = (0..left).map(|i| format!("L{i}")).collect();
    let r: Vec<String> = (0..right).map(|i| format!("R{i}")).collect();
    let mut edges = BTreeSet::new();
    for _ in 0..rng.gen_range(1..=8) {
        let (a, b) = (l.choose(&mut rng).unwrap().clone(), r.choose(&mut rng).unwrap().clone());
        let label = ["x", "y"].choose(&mut rng).unwrap().to_string();
        if rng.gen_bool(0.5) {
            edges.insert(EdgeTriple::new(a, b, label));
        } else {
            edges.insert(EdgeTriple::new(b, a, label));
        }
    }
    GraphSchema::new(l.into_iter().chain(r), edges).unwrap()
}

/// Exact count of directed k-edge paths with pairwise-distinct vertices, by
/// plain recursion, optionally filtered by endpoint types.
pub fn brute_simple_paths(g: &PropertyGraph, k: usize, src_type: Option<&str>, dst_type: Option<&str>) -> u64 {
    fn go(g: &PropertyGraph, v: VertexId, left: usize, on_path: &mut Vec<VertexId>, dst_type: Option<&str>) -> u64 {
        if left == 0 {
            return u64::from(dst_type.is_none_or(|t| g.vertex_type(v) == t));
        }
        let mut total = 0;
        for &e in g.out_edges(v) {
            let w = g.edge_dst(e);
            if on_path.contains(&w) {
                continue;
            }
            on_path.push(w);
            total += go(g, w, left - 1, on_path, dst_type);
            on_path.pop();
        }
        total
    }
    g.vertex_ids()
        .filter(|&v| src_type.is_none_or(|t| g.vertex_type(v) == t))
        .map(|v| go(g, v, k, &mut vec![v], dst_type))
        .sum()
}

/// Every (source, target) pair joined by a trail of exactly `k` edges whose
/// endpoints have the given types, with the number of such trails.
pub fn brute_trail_pairs(g: &PropertyGraph, k: usize, xtype: &str, ytype: &str) -> BTreeMap<(String, String), u64> {
    fn go(
        g: &PropertyGraph,
        start: VertexId,
        v: VertexId,
        left: usize,
        used: &mut Vec<u32>,
        ytype: &str,
        out: &mut BTreeMap<(String, String), u64>,
    ) {
        if left == 0 {
            if g.vertex_type(v) == ytype {
                *out.entry((g.vertex_key(start).to_string(), g.vertex_key(v).to_string()))
                    .or_default() += 1;
            }
            return;
        }
        for &e in g.out_edges(v) {
            if used.contains(&e.0) {
                continue;
            }
            used.push(e.0);
            go(g, start, g.edge_dst(e), left - 1, used, ytype, out);
            used.pop();
        }
    }
    let mut out = BTreeMap::new();
    for v in g.vertex_ids().filter(|&v| g.vertex_type(v) == xtype) {
        go(g, v, v, k, &mut Vec::new(), ytype, &mut out);
    }
    out
}

/// Exhaustive 0-1 knapsack over every subset in Gray-code order. Returns
/// the winning index set under the rule: most value, then least weight,
/// then the lexicographically smallest index list. Values should be exact
/// in floating point (small integers) so ties are real ties.
pub fn knapsack_exhaustive(items: &[(u64, f64)], budget: u64) -> (f64, u64, Vec<usize>) {
    let n = items.len();
    let indices = |mask: u64| -> Vec<usize> { (0..n).filter(|i| mask & (1 << i) != 0).collect() };
    let (mut best_v, mut best_w, mut best_mask) = (0.0f64, 0u64, 0u64);
    let (mut v, mut w, mut mask) = (0.0f64, 0u64, 0u64);
    for step in 1u64..(1u64 << n) {
        let bit = step.trailing_zeros() as usize;
        mask ^= 1 << bit;
        if mask & (1 << bit) != 0 {
            v += items[bit].1;
            w += items[bit].0;
        } else {
            v -= items[bit].1;
            w -= items[bit].0;
        }
        if w > budget {
            continue;
        }
        let better = v > best_v || (v == best_v && (w < best_w || (w == best_w && indices(mask) < indices(best_mask))));
        if better {
            (best_v, best_w, best_mask) = (v, w, mask);
        }
    }
    (best_v, best_w, indices(best_mask))
}

/// A random typed graph with at most `max_n` vertices and up to three edges
/// per vertex. Homogeneous graphs have one type `N` and label `E`;
/// heterogeneous ones have two to four types and a random nonempty set of
/// triples. Parallel edges are allowed; self-loops are not.
pub fn random_graph(seed: u64, max_n: usize, homogeneous: bool) -> PropertyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (types, triples): (Vec<String>, Vec<EdgeTriple>) = if homogeneous {
        (vec!["N".into()], vec![EdgeTriple::new("N", "N", "E")])
    } else {
        let types: Vec<String> = (0..rng.gen_range(2..=4)).map(|i| format!("T{i}")).collect();
        let mut triples = BTreeSet::new();
        while triples.is_empty() || (triples.len() < 6 && rng.gen_bool(0.6)) {
            triples.insert(EdgeTriple::new(
                types.choose(&mut rng).unwrap().clone(),
                types.choose(&mut rng).unwrap().clone(),
                *["a", "b"].choose(&mut rng).unwrap(),
            ));
        }
        (types, triples.into_iter().collect())
    };
    let mut g = PropertyGraph::new(GraphSchema::new(types.clone(), triples.clone()).unwrap());
    let n = rng.gen_range(1..=max_n);
    let mut by_type: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for i in 0..n {
        let t = types.choose(&mut rng).unwrap().clone();
        let key = format!("v{i}");
        g.add_vertex(&key, &t, Default::default()).unwrap();
        by_type.entry(t).or_default().push(key);
    }
    let mut next = 0;
    for _ in 0..rng.gen_range(0..=3 * n) {
        let t = triples.choose(&mut rng).unwrap();
        let (Some(srcs), Some(dsts)) = (by_type.get(&t.src), by_type.get(&t.dst)) else {
            continue;
        };
        let (a, b) = (srcs.choose(&mut rng).unwrap(), dsts.choose(&mut rng).unwrap());
        if a == b {
            continue;
        }
        g.add_edge(format!("e{next}"), a, b, &t.label, Default::default())
            .unwrap();
        next += 1;
    }
    g
}

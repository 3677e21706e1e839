//! Explicit facts read off a query and a schema, plus the implicit
//! constraints derived from them: schema k-hop paths and the hop range of
//! each connector in the query pattern.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::graph::{EdgeTriple, GraphSchema};
use crate::query::QueryGraph;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Fact {
    QueryVertex(String),
    QueryVertexType(String, String),
    QueryEdge(String, String),
    QueryEdgeType(String, String, String),
    QueryVarLengthPath(String, String, u32, u32),
    SchemaVertex(String),
    SchemaEdge(String, String, String),
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::QueryVertex(v) => write!(f, "queryVertex({v})"),
            Fact::QueryVertexType(v, t) => write!(f, "queryVertexType({v}, '{t}')"),
            Fact::QueryEdge(s, d) => write!(f, "queryEdge({s}, {d})"),
            Fact::QueryEdgeType(s, d, l) => write!(f, "queryEdgeType({s}, {d}, '{l}')"),
            Fact::QueryVarLengthPath(s, d, lo, hi) => write!(f, "queryVariableLengthPath({s}, {d}, {lo}, {hi})"),
            Fact::SchemaVertex(t) => write!(f, "schemaVertex('{t}')"),
            Fact::SchemaEdge(s, d, l) => write!(f, "schemaEdge('{s}', '{d}', '{l}')"),
        }
    }
}

pub fn mine_query_facts(q: &QueryGraph) -> BTreeSet<Fact> {
    let mut facts = BTreeSet::new();
    for (name, vtype) in &q.vertices {
        facts.insert(Fact::QueryVertex(name.clone()));
        if let Some(t) = vtype {
            facts.insert(Fact::QueryVertexType(name.clone(), t.clone()));
        }
    }
    for e in &q.edges {
        facts.insert(Fact::QueryEdge(e.src.clone(), e.dst.clone()));
        if let Some(l) = &e.label {
            facts.insert(Fact::QueryEdgeType(e.src.clone(), e.dst.clone(), l.clone()));
        }
    }
    if let Some(p) = &q.path {
        facts.insert(Fact::QueryVarLengthPath(p.src.clone(), p.dst.clone(), p.min, p.max));
    }
    facts
}

pub fn mine_schema_facts(s: &GraphSchema) -> BTreeSet<Fact> {
    let mut facts: BTreeSet<Fact> = s.vertex_types().iter().map(|t| Fact::SchemaVertex(t.clone())).collect();
    facts.extend(
        s.edge_types()
            .iter()
            .map(|e| Fact::SchemaEdge(e.src.clone(), e.dst.clone(), e.label.clone())),
    );
    facts
}

/// A chain of schema edge triples.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SchemaPath {
    pub src_type: String,
    pub dst_type: String,
    pub edges: Vec<EdgeTriple>,
}

impl SchemaPath {
    pub fn k(&self) -> usize {
        self.edges.len()
    }
}

/// All k-edge chains over the schema graph. Schema edges may repeat within a
/// chain.
pub fn schema_k_hop_paths(s: &GraphSchema, k: usize) -> BTreeSet<SchemaPath> {
    if k == 0 {
        return BTreeSet::new();
    }
    let mut chains: Vec<Vec<&EdgeTriple>> = s.edge_types().iter().map(|e| vec![e]).collect();
    for _ in 1..k {
        let mut next = Vec::new();
        for c in &chains {
            let end = &c.last().unwrap().dst;
            for e in s.edge_types().iter().filter(|e| &e.src == end) {
                let mut grown = c.clone();
                grown.push(e);
                next.push(grown);
            }
        }
        chains = next;
    }
    chains
        .into_iter()
        .map(|c| SchemaPath {
            src_type: c[0].src.clone(),
            dst_type: c[c.len() - 1].dst.clone(),
            edges: c.into_iter().cloned().collect(),
        })
        .collect()
}

/// Number of k-edge schema chains per (src type, dst type), saturating.
pub fn schema_path_counts(s: &GraphSchema, k: usize) -> BTreeMap<(String, String), u64> {
    let types: Vec<&String> = s.vertex_types().iter().collect();
    let idx = |t: &str| types.iter().position(|x| x.as_str() == t).unwrap();
    let n = types.len();
    let mut out = BTreeMap::new();
    if k == 0 {
        return out;
    }
    for start in 0..n {
        let mut cur = vec![0u64; n];
        cur[start] = 1;
        for _ in 0..k {
            let mut next = vec![0u64; n];
            for e in s.edge_types() {
                let (a, b) = (idx(&e.src), idx(&e.dst));
                next[b] = next[b].saturating_add(cur[a]);
            }
            cur = next;
        }
        for (end, &c) in cur.iter().enumerate() {
            if c > 0 {
                out.insert((types[start].clone(), types[end].clone()), c);
            }
        }
    }
    out
}

/// Total number of k-edge schema chains, saturating.
pub fn schema_path_total(s: &GraphSchema, k: usize) -> u64 {
    schema_path_counts(s, k)
        .values()
        .fold(0u64, |a, &b| a.saturating_add(b))
}

/// The end-to-end connector a query pattern induces: a variable-length path
/// widened by up to two folded fixed edges, or a chain of fixed edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Connector {
    pub src: String,
    pub dst: String,
    pub min: u32,
    pub max: u32,
    /// Number of fixed edges folded into the connector (f).
    pub folded: u32,
    /// Indices of the fixed edges the connector covers, in chain order
    /// around the path: the source-side fold first.
    pub fixed_edges: Vec<usize>,
    /// Whether the connector contains the query's variable-length path.
    pub has_path: bool,
}

/// Per-connector feasible hop range.
pub fn query_hop_bounds(q: &QueryGraph) -> Vec<Connector> {
    let referenced = q.referenced_names();
    if let Some(p) = &q.path {
        let mut c = Connector {
            src: p.src.clone(),
            dst: p.dst.clone(),
            min: p.min,
            max: p.max,
            folded: 0,
            fixed_edges: Vec::new(),
            has_path: true,
        };
        let foldable = |name: &str| -> Option<(usize, bool)> {
            if referenced.contains(name) || p.src == p.dst {
                return None;
            }
            let (out, inc) = q.incident_edges(name);
            match (out.as_slice(), inc.as_slice()) {
                ([], [i]) if q.edges[*i].src != name => Some((*i, true)),
                ([o], []) if q.edges[*o].dst != name => Some((*o, false)),
                _ => None,
            }
        };
        if let Some((i, true)) = foldable(&p.src) {
            c.src = q.edges[i].src.clone();
            c.fixed_edges.push(i);
            c.folded += 1;
        }
        if let Some((o, false)) = foldable(&p.dst) {
            if !c.fixed_edges.contains(&o) {
                c.dst = q.edges[o].dst.clone();
                c.fixed_edges.push(o);
                c.folded += 1;
            }
        }
        c.min += c.folded;
        c.max += c.folded;
        return vec![c];
    }
    fixed_chain(q).into_iter().collect()
}

/// The fixed edges as one simple chain v0 → … → vn covering the whole
/// pattern, if they form one.
fn fixed_chain(q: &QueryGraph) -> Option<Connector> {
    if q.edges.is_empty() {
        return None;
    }
    let starts: Vec<&String> = q
        .vertices
        .keys()
        .filter(|v| {
            let (out, inc) = q.incident_edges(v);
            out.len() == 1 && inc.is_empty()
        })
        .collect();
    let [start] = starts.as_slice() else { return None };
    let mut order = Vec::new();
    let mut seen = BTreeSet::new();
    let mut cur = (*start).clone();
    seen.insert(cur.clone());
    loop {
        let (out, _) = q.incident_edges(&cur);
        match out.as_slice() {
            [] => break,
            [e] => {
                order.push(*e);
                cur = q.edges[*e].dst.clone();
                if !seen.insert(cur.clone()) {
                    return None;
                }
            }
            _ => return None,
        }
    }
    if order.len() != q.edges.len() || seen.len() != q.vertices.len() {
        return None;
    }
    let n = order.len() as u32;
    Some(Connector {
        src: (*start).clone(),
        dst: cur,
        min: n,
        max: n,
        folded: 0,
        fixed_edges: order,
        has_path: false,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintSet {
    pub facts: BTreeSet<Fact>,
    pub connectors: Vec<Connector>,
    /// Schema chains for every k in a connector's range, capped at max_k.
    pub schema_paths: BTreeMap<u32, BTreeSet<SchemaPath>>,
    pub source_types: BTreeSet<String>,
    pub sink_types: BTreeSet<String>,
    pub max_k: u32,
    pub schema: GraphSchema,
}

/// Chains are materialized only while their count stays below this; beyond
/// it the enumerator relies on per-endpoint counts.
pub const SCHEMA_PATH_CAP: u64 = 100_000;

pub fn mine_constraints(q: &QueryGraph, s: &GraphSchema, max_k: u32) -> ConstraintSet {
    let mut facts = mine_query_facts(q);
    facts.extend(mine_schema_facts(s));
    let connectors = query_hop_bounds(q);
    let mut schema_paths = BTreeMap::new();
    for c in &connectors {
        for k in c.min.max(1)..=c.max.min(max_k) {
            if schema_paths.contains_key(&k) || schema_path_total(s, k as usize) > SCHEMA_PATH_CAP {
                continue;
            }
            schema_paths.insert(k, schema_k_hop_paths(s, k as usize));
        }
    }
    ConstraintSet {
        facts,
        connectors,
        schema_paths,
        source_types: s.source_types().into_iter().map(str::to_string).collect(),
        sink_types: s.sink_types().into_iter().map(str::to_string).collect(),
        max_k,
        schema: s.clone(),
    }
}

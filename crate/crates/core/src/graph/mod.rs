//! In-memory directed property graph with schema validation.
//!
//! Caller-supplied string ids are mapped to dense [`VertexId`] / [`EdgeId`]
//! indices at insertion time; traversal works on the dense indices and
//! adjacency lists are kept in ascending edge-id order.

mod io;
mod schema;
mod stats;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load_graph, load_graph_dir, save_graph, save_graph_dir, GRAPH_FILES};
pub use schema::{EdgeTriple, GraphSchema};
pub use stats::{degree_summary, Alpha, DegreeSummary, TypeDegreeStats};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown vertex type '{0}'")]
    UnknownVertexType(String),
    #[error("edge triple ({src})-[:{label}]->({dst}) is not in the schema")]
    UnknownEdgeTriple { src: String, dst: String, label: String },
    #[error("edge '{edge}' references missing vertex '{vertex}'")]
    DanglingEdgeEndpoint { edge: String, vertex: String },
    #[error("duplicate id '{0}'")]
    DuplicateId(String),
    #[error("malformed row: {0}")]
    MalformedRow(String),
    #[error("unknown vertex '{0}'")]
    UnknownVertex(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("{path}:{line}: {source}")]
    AtLine {
        path: String,
        line: usize,
        #[source]
        source: Box<GraphError>,
    },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl GraphError {
    /// The underlying error with any file/line context stripped.
    pub fn kind(&self) -> &GraphError {
        match self {
            GraphError::AtLine { source, .. } => source.kind(),
            other => other,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            GraphError::AtLine { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// A property value. Integers and floats compare numerically with each other.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropertyValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl PropertyValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            PropertyValue::Int(i) => Some(*i as f64),
            PropertyValue::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, PropertyValue::Int(_) | PropertyValue::Float(_))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            PropertyValue::Bool(_) => "boolean",
            PropertyValue::Int(_) => "integer",
            PropertyValue::Float(_) => "float",
            PropertyValue::Str(_) => "string",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            PropertyValue::Bool(_) => 0,
            PropertyValue::Int(_) | PropertyValue::Float(_) => 1,
            PropertyValue::Str(_) => 2,
        }
    }

    /// Comparison within a comparable kind; `None` across kinds.
    pub fn partial_compare(&self, other: &PropertyValue) -> Option<Ordering> {
        use PropertyValue::*;
        match (self, other) {
            (Bool(a), Bool(b)) => Some(a.cmp(b)),
            (Str(a), Str(b)) => Some(a.cmp(b)),
            (Int(a), Int(b)) => Some(a.cmp(b)),
            (a, b) if a.is_numeric() && b.is_numeric() => Some(a.as_f64().unwrap().total_cmp(&b.as_f64().unwrap())),
            _ => None,
        }
    }
}

impl Ord for PropertyValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.partial_compare(other)
            .unwrap_or_else(|| self.rank().cmp(&other.rank()))
    }
}

impl PartialOrd for PropertyValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for PropertyValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for PropertyValue {}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Bool(b) => write!(f, "{b}"),
            PropertyValue::Int(i) => write!(f, "{i}"),
            PropertyValue::Float(x) => write!(f, "{x:?}"),
            PropertyValue::Str(s) => f.write_str(s),
        }
    }
}

impl From<i64> for PropertyValue {
    fn from(v: i64) -> Self {
        PropertyValue::Int(v)
    }
}

impl From<f64> for PropertyValue {
    fn from(v: f64) -> Self {
        PropertyValue::Float(v)
    }
}

impl From<&str> for PropertyValue {
    fn from(v: &str) -> Self {
        PropertyValue::Str(v.to_string())
    }
}

impl From<bool> for PropertyValue {
    fn from(v: bool) -> Self {
        PropertyValue::Bool(v)
    }
}

pub type Properties = BTreeMap<String, PropertyValue>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
struct VertexRecord {
    key: String,
    vtype: u32,
    props: Properties,
}

#[derive(Debug, Clone)]
struct EdgeRecord {
    key: String,
    src: VertexId,
    dst: VertexId,
    label: u32,
    props: Properties,
}

#[derive(Debug, Clone)]
pub struct PropertyGraph {
    schema: GraphSchema,
    type_names: Vec<String>,
    label_names: Vec<String>,
    triples: HashSet<(u32, u32, u32)>,
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeRecord>,
    vertex_keys: HashMap<String, VertexId>,
    edge_keys: HashMap<String, EdgeId>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    by_type: Vec<Vec<VertexId>>,
}

impl PropertyGraph {
    pub fn new(schema: GraphSchema) -> Self {
        let type_names: Vec<String> = schema.vertex_types().iter().cloned().collect();
        let label_names: Vec<String> = schema.labels().into_iter().map(str::to_string).collect();
        let type_idx = |t: &str| type_names.iter().position(|x| x == t).unwrap() as u32;
        let label_idx = |l: &str| label_names.iter().position(|x| x == l).unwrap() as u32;
        let triples = schema
            .edge_types()
            .iter()
            .map(|e| (type_idx(&e.src), type_idx(&e.dst), label_idx(&e.label)))
            .collect();
        let by_type = vec![Vec::new(); type_names.len()];
        PropertyGraph {
            schema,
            type_names,
            label_names,
            triples,
            vertices: Vec::new(),
            edges: Vec::new(),
            vertex_keys: HashMap::new(),
            edge_keys: HashMap::new(),
            out_adj: Vec::new(),
            in_adj: Vec::new(),
            by_type,
        }
    }

    pub fn schema(&self) -> &GraphSchema {
        &self.schema
    }

    pub fn add_vertex(
        &mut self,
        key: impl Into<String>,
        vtype: &str,
        props: Properties,
    ) -> Result<VertexId, GraphError> {
        let key = key.into();
        let t = self
            .type_index(vtype)
            .ok_or_else(|| GraphError::UnknownVertexType(vtype.to_string()))?;
        if self.vertex_keys.contains_key(&key) {
            return Err(GraphError::DuplicateId(key));
        }
        let id = VertexId(self.vertices.len() as u32);
        self.vertex_keys.insert(key.clone(), id);
        self.vertices.push(VertexRecord { key, vtype: t, props });
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        self.by_type[t as usize].push(id);
        Ok(id)
    }

    pub fn add_edge(
        &mut self,
        key: impl Into<String>,
        src: &str,
        dst: &str,
        label: &str,
        props: Properties,
    ) -> Result<EdgeId, GraphError> {
        let key = key.into();
        let s = self.vertex_id(src).ok_or_else(|| GraphError::DanglingEdgeEndpoint {
            edge: key.clone(),
            vertex: src.to_string(),
        })?;
        let d = self.vertex_id(dst).ok_or_else(|| GraphError::DanglingEdgeEndpoint {
            edge: key.clone(),
            vertex: dst.to_string(),
        })?;
        self.add_edge_between(key, s, d, label, props)
    }

    pub fn add_edge_between(
        &mut self,
        key: impl Into<String>,
        src: VertexId,
        dst: VertexId,
        label: &str,
        props: Properties,
    ) -> Result<EdgeId, GraphError> {
        let key = key.into();
        let st = self.vertices[src.index()].vtype;
        let dt = self.vertices[dst.index()].vtype;
        let l = self.label_index(label);
        if !l.is_some_and(|l| self.triples.contains(&(st, dt, l))) {
            return Err(GraphError::UnknownEdgeTriple {
                src: self.type_names[st as usize].clone(),
                dst: self.type_names[dt as usize].clone(),
                label: label.to_string(),
            });
        }
        if self.edge_keys.contains_key(&key) {
            return Err(GraphError::DuplicateId(key));
        }
        let id = EdgeId(self.edges.len() as u32);
        self.edge_keys.insert(key.clone(), id);
        self.edges.push(EdgeRecord {
            key,
            src,
            dst,
            label: l.unwrap(),
            props,
        });
        self.out_adj[src.index()].push(id);
        self.in_adj[dst.index()].push(id);
        Ok(id)
    }

    /// n = |V|
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// m = |E|
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len() as u32).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn vertex_id(&self, key: &str) -> Option<VertexId> {
        self.vertex_keys.get(key).copied()
    }

    pub fn edge_id(&self, key: &str) -> Option<EdgeId> {
        self.edge_keys.get(key).copied()
    }

    pub fn vertex_key(&self, v: VertexId) -> &str {
        &self.vertices[v.index()].key
    }

    pub fn vertex_type(&self, v: VertexId) -> &str {
        &self.type_names[self.vertices[v.index()].vtype as usize]
    }

    pub fn vertex_type_index(&self, v: VertexId) -> u32 {
        self.vertices[v.index()].vtype
    }

    pub fn vertex_props(&self, v: VertexId) -> &Properties {
        &self.vertices[v.index()].props
    }

    pub fn edge_key(&self, e: EdgeId) -> &str {
        &self.edges[e.index()].key
    }

    pub fn edge_src(&self, e: EdgeId) -> VertexId {
        self.edges[e.index()].src
    }

    pub fn edge_dst(&self, e: EdgeId) -> VertexId {
        self.edges[e.index()].dst
    }

    pub fn edge_label(&self, e: EdgeId) -> &str {
        &self.label_names[self.edges[e.index()].label as usize]
    }

    pub fn edge_label_index(&self, e: EdgeId) -> u32 {
        self.edges[e.index()].label
    }

    pub fn edge_props(&self, e: EdgeId) -> &Properties {
        &self.edges[e.index()].props
    }

    pub fn type_index(&self, t: &str) -> Option<u32> {
        self.type_names.iter().position(|x| x == t).map(|i| i as u32)
    }

    pub fn type_name(&self, idx: u32) -> &str {
        &self.type_names[idx as usize]
    }

    pub fn type_names(&self) -> &[String] {
        &self.type_names
    }

    pub fn label_index(&self, l: &str) -> Option<u32> {
        self.label_names.iter().position(|x| x == l).map(|i| i as u32)
    }

    pub fn vertices_of_type(&self, t: &str) -> &[VertexId] {
        match self.type_index(t) {
            Some(i) => &self.by_type[i as usize],
            None => &[],
        }
    }

    /// Outgoing edges of `v` in ascending edge-id order.
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_adj[v.index()]
    }

    /// Incoming edges of `v` in ascending edge-id order.
    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.in_adj[v.index()]
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_adj[v.index()].len()
    }

    /// Outgoing `(edge, destination)` pairs of the vertex with external id
    /// `key`, optionally restricted to one label.
    pub fn out_neighbors(&self, key: &str, label: Option<&str>) -> Result<Vec<(EdgeId, VertexId)>, GraphError> {
        let v = self
            .vertex_id(key)
            .ok_or_else(|| GraphError::UnknownVertex(key.to_string()))?;
        let wanted = match label {
            Some(l) => match self.label_index(l) {
                Some(i) => Some(i),
                None => return Ok(Vec::new()),
            },
            None => None,
        };
        Ok(self
            .out_edges(v)
            .iter()
            .filter(|&&e| wanted.is_none_or(|l| self.edges[e.index()].label == l))
            .map(|&e| (e, self.edge_dst(e)))
            .collect())
    }

    /// Full scan: every edge's type triple is declared in the schema.
    pub fn check_schema_closure(&self) -> Result<(), GraphError> {
        for e in self.edge_ids() {
            let (s, d) = (self.edge_src(e), self.edge_dst(e));
            if !self
                .schema
                .contains_triple(self.vertex_type(s), self.vertex_type(d), self.edge_label(e))
            {
                return Err(GraphError::UnknownEdgeTriple {
                    src: self.vertex_type(s).to_string(),
                    dst: self.vertex_type(d).to_string(),
                    label: self.edge_label(e).to_string(),
                });
            }
        }
        Ok(())
    }

    /// Same external-id → (type, props) maps and the same edge set, ignoring
    /// internal id assignment.
    pub fn same_content(&self, other: &PropertyGraph) -> bool {
        if self.schema != other.schema
            || self.vertex_count() != other.vertex_count()
            || self.edge_count() != other.edge_count()
        {
            return false;
        }
        let vertices_match = self.vertex_ids().all(|v| {
            other.vertex_id(self.vertex_key(v)).is_some_and(|w| {
                other.vertex_type(w) == self.vertex_type(v) && other.vertex_props(w) == self.vertex_props(v)
            })
        });
        vertices_match
            && self.edge_ids().all(|e| {
                other.edge_id(self.edge_key(e)).is_some_and(|f| {
                    other.vertex_key(other.edge_src(f)) == self.vertex_key(self.edge_src(e))
                        && other.vertex_key(other.edge_dst(f)) == self.vertex_key(self.edge_dst(e))
                        && other.edge_label(f) == self.edge_label(e)
                        && other.edge_props(f) == self.edge_props(e)
                })
            })
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn toy_graph_counts() {
        let g = toy_lineage();
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 2));
        g.check_schema_closure().unwrap();
    }

    #[test]
    fn files_never_write() {
        let mut g = toy_lineage();
        let err = g
            .add_edge("bad", "f1", "j1", "WRITES_TO", Properties::new())
            .unwrap_err();
        assert!(matches!(err, GraphError::UnknownEdgeTriple { .. }));
    }

    #[test]
    fn duplicate_and_dangling() {
        let mut g = toy_lineage();
        assert!(matches!(
            g.add_vertex("j1", "Job", Properties::new()),
            Err(GraphError::DuplicateId(_))
        ));
        assert!(matches!(
            g.add_edge("e9", "j1", "nope", "WRITES_TO", Properties::new()),
            Err(GraphError::DanglingEdgeEndpoint { .. })
        ));
        assert!(matches!(
            g.add_vertex("x", "Task", Properties::new()),
            Err(GraphError::UnknownVertexType(_))
        ));
    }

    #[test]
    fn out_neighbors_filters_by_label() {
        let g = toy_lineage();
        let n = g.out_neighbors("j1", Some("WRITES_TO")).unwrap();
        assert_eq!(n.len(), 1);
        assert_eq!(g.edge_key(n[0].0), "e1");
        assert_eq!(g.vertex_key(n[0].1), "f1");
        assert!(g.out_neighbors("j1", Some("IS_READ_BY")).unwrap().is_empty());
        assert!(matches!(g.out_neighbors("zz", None), Err(GraphError::UnknownVertex(_))));

        let s = star();
        assert_eq!(s.out_neighbors("hub", None).unwrap().len(), 4);
        assert!(s.out_neighbors("leaf0", None).unwrap().is_empty());
    }

    #[test]
    fn numeric_values_compare_across_kinds() {
        assert_eq!(PropertyValue::Int(2), PropertyValue::Float(2.0));
        assert!(PropertyValue::Int(2) < PropertyValue::Float(2.5));
        assert!(PropertyValue::Bool(true) < PropertyValue::Int(-5));
        assert!(PropertyValue::Int(i64::MAX) < PropertyValue::Str(String::new()));
        assert_eq!(PropertyValue::Int(1).partial_compare(&"a".into()), None);
    }
}

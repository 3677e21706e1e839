use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::GraphError;

/// A directed, labeled edge constraint: `label` edges may only run from
/// `src` vertices to `dst` vertices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeTriple {
    pub src: String,
    pub dst: String,
    pub label: String,
}

impl EdgeTriple {
    pub fn new(src: impl Into<String>, dst: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            src: src.into(),
            dst: dst.into(),
            label: label.into(),
        }
    }
}

impl fmt::Display for EdgeTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})-[:{}]->({})", self.src, self.label, self.dst)
    }
}

/// Allowed vertex types and typed edge triples of a property graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct GraphSchema {
    vertex_types: BTreeSet<String>,
    edge_types: BTreeSet<EdgeTriple>,
}

#[derive(Serialize, Deserialize)]
struct RawSchema {
    vertex_types: Vec<String>,
    edge_types: Vec<EdgeTriple>,
}

impl TryFrom<RawSchema> for GraphSchema {
    type Error = GraphError;

    fn try_from(raw: RawSchema) -> Result<Self, Self::Error> {
        GraphSchema::new(raw.vertex_types, raw.edge_types)
    }
}

impl From<GraphSchema> for RawSchema {
    fn from(s: GraphSchema) -> Self {
        RawSchema {
            vertex_types: s.vertex_types.into_iter().collect(),
            edge_types: s.edge_types.into_iter().collect(),
        }
    }
}

impl GraphSchema {
    pub fn new<V, E>(vertex_types: V, edge_types: E) -> Result<Self, GraphError>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        E: IntoIterator<Item = EdgeTriple>,
    {
        let mut schema = GraphSchema::default();
        for t in vertex_types {
            let t = t.into();
            if t.is_empty() {
                return Err(GraphError::InvalidSchema("empty vertex type name".into()));
            }
            if !schema.vertex_types.insert(t.clone()) {
                return Err(GraphError::InvalidSchema(format!("duplicate vertex type '{t}'")));
            }
        }
        for e in edge_types {
            schema.add_edge_type(e)?;
        }
        Ok(schema)
    }

    pub fn add_edge_type(&mut self, e: EdgeTriple) -> Result<(), GraphError> {
        if e.label.is_empty() {
            return Err(GraphError::InvalidSchema("empty edge label".into()));
        }
        for t in [&e.src, &e.dst] {
            if !self.vertex_types.contains(t) {
                return Err(GraphError::InvalidSchema(format!(
                    "edge type {e} references undeclared vertex type '{t}'"
                )));
            }
        }
        if !self.edge_types.insert(e.clone()) {
            return Err(GraphError::InvalidSchema(format!("duplicate edge type {e}")));
        }
        Ok(())
    }

    /// The two-type data lineage schema: jobs write files, files are read by jobs.
    pub fn lineage() -> Self {
        Self::new(
            ["Job", "File"],
            [
                EdgeTriple::new("Job", "File", "WRITES_TO"),
                EdgeTriple::new("File", "Job", "IS_READ_BY"),
            ],
        )
        .expect("static schema")
    }

    /// Lineage plus the task and machine layer of a job scheduler.
    pub fn provenance() -> Self {
        Self::new(
            ["Job", "File", "Task", "Machine"],
            [
                EdgeTriple::new("Job", "File", "WRITES_TO"),
                EdgeTriple::new("File", "Job", "IS_READ_BY"),
                EdgeTriple::new("Job", "Task", "HAS_TASK"),
                EdgeTriple::new("Task", "Machine", "RUNS_ON"),
                EdgeTriple::new("Task", "Task", "TRANSFERS_TO"),
            ],
        )
        .expect("static schema")
    }

    pub fn vertex_types(&self) -> &BTreeSet<String> {
        &self.vertex_types
    }

    pub fn edge_types(&self) -> &BTreeSet<EdgeTriple> {
        &self.edge_types
    }

    pub fn has_vertex_type(&self, t: &str) -> bool {
        self.vertex_types.contains(t)
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.edge_types.iter().any(|e| e.label == label)
    }

    pub fn contains_triple(&self, src: &str, dst: &str, label: &str) -> bool {
        self.edge_types
            .iter()
            .any(|e| e.src == src && e.dst == dst && e.label == label)
    }

    pub fn labels(&self) -> BTreeSet<&str> {
        self.edge_types.iter().map(|e| e.label.as_str()).collect()
    }

    /// Number of schema edges (M).
    pub fn edge_count(&self) -> usize {
        self.edge_types.len()
    }

    /// Types that are the domain of at least one edge type.
    pub fn edge_source_types(&self) -> BTreeSet<&str> {
        self.edge_types.iter().map(|e| e.src.as_str()).collect()
    }

    /// Types with no incoming schema edge.
    pub fn source_types(&self) -> BTreeSet<&str> {
        let targets: BTreeSet<&str> = self.edge_types.iter().map(|e| e.dst.as_str()).collect();
        self.vertex_types
            .iter()
            .map(String::as_str)
            .filter(|t| !targets.contains(t))
            .collect()
    }

    /// Types with no outgoing schema edge.
    pub fn sink_types(&self) -> BTreeSet<&str> {
        let sources = self.edge_source_types();
        self.vertex_types
            .iter()
            .map(String::as_str)
            .filter(|t| !sources.contains(t))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        serde_json::from_str(text).map_err(|e| GraphError::InvalidSchema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }
}

//! View definitions (spanners and sparsifiers), their derived schemas and
//! defining queries, plus selection, materialization and the on-disk catalog.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{EdgeTriple, GraphSchema};
pub mod catalog;
pub mod materialize;
pub mod select;

pub use catalog::{CatalogEntry, CatalogError, ViewCatalog};
pub use materialize::{materialize, materialize_spanner, materialize_sparsifier, MaterializeError, MaterializeOptions};
pub use select::{knapsack, select_views, Candidate, Selection};

use crate::query::{AggFunc, PatternEdge, QueryGraph, ReturnExpr, ReturnItem, ValueExpr, VarLengthPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViewKind {
    KHopConnector,
    SameVertexTypeConnector,
    SameEdgeTypeConnector,
    SourceToSinkConnector,
    VertexRemoval,
    EdgeRemoval,
    VertexInclusion,
    EdgeInclusion,
    VertexAggregator,
    EdgeAggregator,
    SubgraphAggregator,
}

impl ViewKind {
    pub const ALL: [ViewKind; 11] = [
        ViewKind::KHopConnector,
        ViewKind::SameVertexTypeConnector,
        ViewKind::SameEdgeTypeConnector,
        ViewKind::SourceToSinkConnector,
        ViewKind::VertexRemoval,
        ViewKind::EdgeRemoval,
        ViewKind::VertexInclusion,
        ViewKind::EdgeInclusion,
        ViewKind::VertexAggregator,
        ViewKind::EdgeAggregator,
        ViewKind::SubgraphAggregator,
    ];

    /// Template name in the rule notation used by `enumerate`.
    pub fn template(self) -> &'static str {
        match self {
            ViewKind::KHopConnector => "kHopConnector",
            ViewKind::SameVertexTypeConnector => "sameVertexTypeConnector",
            ViewKind::SameEdgeTypeConnector => "sameEdgeTypeConnector",
            ViewKind::SourceToSinkConnector => "sourceToSinkConnector",
            ViewKind::VertexRemoval => "vertexRemoval",
            ViewKind::EdgeRemoval => "edgeRemoval",
            ViewKind::VertexInclusion => "vertexInclusion",
            ViewKind::EdgeInclusion => "edgeInclusion",
            ViewKind::VertexAggregator => "vertexAggregator",
            ViewKind::EdgeAggregator => "edgeAggregator",
            ViewKind::SubgraphAggregator => "subgraphAggregator",
        }
    }

    pub fn is_spanner(self) -> bool {
        matches!(
            self,
            ViewKind::KHopConnector
                | ViewKind::SameVertexTypeConnector
                | ViewKind::SameEdgeTypeConnector
                | ViewKind::SourceToSinkConnector
        )
    }
}

/// Per-trail reducer for spanner edge summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reducer {
    Max,
    Sum,
}

impl Reducer {
    pub fn name(self) -> &'static str {
        match self {
            Reducer::Max => "max",
            Reducer::Sum => "sum",
        }
    }
}

/// Spanner edge property: the minimum over contracted trails of the
/// per-trail reduction of a numeric edge property.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeSummary {
    pub property: String,
    pub reducer: Reducer,
}

impl EdgeSummary {
    /// Name of the property stored on spanner edges.
    pub fn output_property(&self) -> String {
        format!("{}_{}", self.reducer.name(), self.property)
    }
}

/// One aggregate kept by an aggregator view: `count` with no property
/// counts members.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AggSpec {
    pub func: AggFunc,
    pub property: String,
}

impl AggSpec {
    pub fn output_property(&self) -> String {
        format!("{}_{}", self.func.name(), self.property)
    }
}

impl Serialize for AggFunc {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for AggFunc {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        AggFunc::from_name(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown aggregate '{s}'")))
    }
}

pub const MEMBER_COUNT: &str = "member_count";
pub const EDGE_COUNT: &str = "edge_count";
pub const PATH_COUNT: &str = "path_count";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ViewDef {
    /// Edges contract trails of exactly `k` edges from `xtype` to `ytype`
    /// vertices; `allowed_types` restricts the intermediate vertices.
    KHop {
        xtype: String,
        ytype: String,
        k: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        allowed_types: Option<BTreeSet<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edge_summary: Option<EdgeSummary>,
    },
    /// Edges contract trails of up to `max_len` edges between `vtype`
    /// vertices with no `vtype` vertex in between.
    SameVertexType {
        vtype: String,
        max_len: u32,
    },
    /// Edges contract trails of exactly `k` edges all labeled `label`.
    SameEdgeType {
        xtype: String,
        ytype: String,
        label: String,
        k: u32,
    },
    /// Edges contract trails of `min_len..=max_len` edges from a schema
    /// source type to a schema sink type; an empty label set allows any.
    SourceToSink {
        xtype: String,
        ytype: String,
        min_len: u32,
        max_len: u32,
        labels: BTreeSet<String>,
    },
    VertexRemoval {
        types: BTreeSet<String>,
    },
    EdgeRemoval {
        labels: BTreeSet<String>,
    },
    VertexInclusion {
        types: BTreeSet<String>,
    },
    EdgeInclusion {
        labels: BTreeSet<String>,
    },
    /// One supervertex per distinct `group_by` value among `vtype` vertices.
    VertexAggregator {
        vtype: String,
        group_by: String,
        aggregates: Vec<AggSpec>,
    },
    /// One superedge per (source, target) pair of `label` edges.
    EdgeAggregator {
        label: String,
        aggregates: Vec<AggSpec>,
    },
    /// Supervertices as for the vertex aggregator, plus superedges counting
    /// the `vtype`-to-`vtype` edges between groups.
    SubgraphAggregator {
        vtype: String,
        group_by: String,
        aggregates: Vec<AggSpec>,
    },
}

fn upper(s: &str) -> String {
    s.to_ascii_uppercase()
}

fn join(set: &BTreeSet<String>) -> String {
    set.iter().cloned().collect::<Vec<_>>().join("+")
}

impl ViewDef {
    pub fn kind(&self) -> ViewKind {
        match self {
            ViewDef::KHop { .. } => ViewKind::KHopConnector,
            ViewDef::SameVertexType { .. } => ViewKind::SameVertexTypeConnector,
            ViewDef::SameEdgeType { .. } => ViewKind::SameEdgeTypeConnector,
            ViewDef::SourceToSink { .. } => ViewKind::SourceToSinkConnector,
            ViewDef::VertexRemoval { .. } => ViewKind::VertexRemoval,
            ViewDef::EdgeRemoval { .. } => ViewKind::EdgeRemoval,
            ViewDef::VertexInclusion { .. } => ViewKind::VertexInclusion,
            ViewDef::EdgeInclusion { .. } => ViewKind::EdgeInclusion,
            ViewDef::VertexAggregator { .. } => ViewKind::VertexAggregator,
            ViewDef::EdgeAggregator { .. } => ViewKind::EdgeAggregator,
            ViewDef::SubgraphAggregator { .. } => ViewKind::SubgraphAggregator,
        }
    }

    pub fn khop(xtype: &str, ytype: &str, k: u32) -> ViewDef {
        ViewDef::KHop {
            xtype: xtype.to_string(),
            ytype: ytype.to_string(),
            k,
            allowed_types: None,
            edge_summary: None,
        }
    }

    /// Stable identifier, also used as the catalog directory name.
    pub fn id(&self) -> String {
        let raw = match self {
            ViewDef::KHop {
                xtype,
                ytype,
                k,
                allowed_types,
                edge_summary,
            } => {
                let mut s = format!("khop-{xtype}-{ytype}-{k}");
                if let Some(t) = allowed_types {
                    s.push_str(&format!("-via-{}", join(t)));
                }
                if let Some(e) = edge_summary {
                    s.push_str(&format!("-{}", e.output_property()));
                }
                s
            }
            ViewDef::SameVertexType { vtype, max_len } => format!("samevtype-{vtype}-{max_len}"),
            ViewDef::SameEdgeType { xtype, ytype, label, k } => format!("sameetype-{xtype}-{ytype}-{label}-{k}"),
            ViewDef::SourceToSink {
                xtype,
                ytype,
                min_len,
                max_len,
                labels,
            } => {
                let mut s = format!("srcsink-{xtype}-{ytype}-{min_len}-{max_len}");
                if !labels.is_empty() {
                    s.push_str(&format!("-{}", join(labels)));
                }
                s
            }
            ViewDef::VertexRemoval { types } => format!("vremove-{}", join(types)),
            ViewDef::EdgeRemoval { labels } => format!("eremove-{}", join(labels)),
            ViewDef::VertexInclusion { types } => format!("vinclude-{}", join(types)),
            ViewDef::EdgeInclusion { labels } => format!("einclude-{}", join(labels)),
            ViewDef::VertexAggregator {
                vtype,
                group_by,
                aggregates,
            } => format!("vagg-{vtype}-{group_by}{}", agg_suffix(aggregates)),
            ViewDef::EdgeAggregator { label, aggregates } => format!("eagg-{label}{}", agg_suffix(aggregates)),
            ViewDef::SubgraphAggregator {
                vtype,
                group_by,
                aggregates,
            } => format!("sgagg-{vtype}-{group_by}{}", agg_suffix(aggregates)),
        };
        raw.chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || "-_+".contains(c) {
                    c
                } else {
                    '_'
                }
            })
            .collect()
    }

    /// Label of the contracted edges of a spanner view.
    pub fn spanner_label(&self) -> Option<String> {
        Some(match self {
            ViewDef::KHop { xtype, ytype, k, .. } => format!("{}_TO_{}_{k}HOP", upper(xtype), upper(ytype)),
            ViewDef::SameVertexType { vtype, .. } => format!("{}_TO_{}_SAME_TYPE", upper(vtype), upper(vtype)),
            ViewDef::SameEdgeType { xtype, ytype, label, k } => {
                format!("{}_TO_{}_{k}HOP_{}", upper(xtype), upper(ytype), upper(label))
            }
            ViewDef::SourceToSink {
                xtype,
                ytype,
                min_len,
                max_len,
                ..
            } => format!("{}_TO_{}_{min_len}_{max_len}HOP", upper(xtype), upper(ytype)),
            _ => return None,
        })
    }

    /// Schema of the materialized view, derived from the base schema.
    pub fn view_schema(&self, base: &GraphSchema) -> GraphSchema {
        let restrict = |types: &BTreeSet<String>, keep: &dyn Fn(&EdgeTriple) -> bool| {
            GraphSchema::new(
                types.iter().cloned(),
                base.edge_types()
                    .iter()
                    .filter(|e| types.contains(&e.src) && types.contains(&e.dst) && keep(e))
                    .cloned(),
            )
            .expect("subset of a valid schema")
        };
        let all_types = base.vertex_types().clone();
        match self {
            ViewDef::KHop { xtype, ytype, .. }
            | ViewDef::SameEdgeType { xtype, ytype, .. }
            | ViewDef::SourceToSink { xtype, ytype, .. } => {
                let label = self.spanner_label().unwrap();
                GraphSchema::new(
                    BTreeSet::from([xtype.clone(), ytype.clone()]),
                    [EdgeTriple::new(xtype.clone(), ytype.clone(), label)],
                )
                .expect("spanner schema")
            }
            ViewDef::SameVertexType { vtype, .. } => GraphSchema::new(
                [vtype.clone()],
                [EdgeTriple::new(
                    vtype.clone(),
                    vtype.clone(),
                    self.spanner_label().unwrap(),
                )],
            )
            .expect("spanner schema"),
            ViewDef::VertexInclusion { types } => {
                restrict(&types.intersection(&all_types).cloned().collect(), &|_| true)
            }
            ViewDef::VertexRemoval { types } => restrict(&all_types.difference(types).cloned().collect(), &|_| true),
            ViewDef::EdgeInclusion { labels } => restrict(&all_types, &|e| labels.contains(&e.label)),
            ViewDef::EdgeRemoval { labels } => restrict(&all_types, &|e| !labels.contains(&e.label)),
            ViewDef::VertexAggregator { vtype, .. } => {
                GraphSchema::new([vtype.clone()], []).expect("aggregator schema")
            }
            ViewDef::SubgraphAggregator { vtype, .. } => restrict(&BTreeSet::from([vtype.clone()]), &|_| true),
            ViewDef::EdgeAggregator { .. } => base.clone(),
        }
    }

    /// The view expressed as one or more queries over the base graph; a
    /// sparsifier spanning several types or labels is the union of its parts.
    pub fn defining_queries(&self, base: &GraphSchema) -> Vec<QueryGraph> {
        let pair = |xtype: &str, ytype: &str, min: u32, max: u32, labels: BTreeSet<String>| {
            let mut q = QueryGraph::default();
            q.vertices.insert("x".into(), Some(xtype.to_string()));
            q.vertices.insert("y".into(), Some(ytype.to_string()));
            q.path = Some(VarLengthPath {
                var: None,
                src: "x".into(),
                dst: "y".into(),
                min,
                max,
                labels,
            });
            q.items = vec![
                ReturnItem::new(ReturnExpr::Value(ValueExpr::Var("x".into()))),
                ReturnItem::new(ReturnExpr::Value(ValueExpr::Var("y".into()))),
            ];
            q
        };
        let vertex_scan = |t: &str| {
            let mut q = QueryGraph::default();
            q.vertices.insert("v".into(), Some(t.to_string()));
            q.items = vec![ReturnItem::new(ReturnExpr::Value(ValueExpr::Var("v".into())))];
            q
        };
        let edge_scan = |e: &EdgeTriple| {
            let mut q = QueryGraph::default();
            q.vertices.insert("a".into(), Some(e.src.clone()));
            q.vertices.insert("b".into(), Some(e.dst.clone()));
            q.edges.push(PatternEdge {
                var: Some("e".into()),
                src: "a".into(),
                dst: "b".into(),
                label: Some(e.label.clone()),
            });
            q.items = vec![ReturnItem::new(ReturnExpr::Value(ValueExpr::Var("e".into())))];
            q
        };
        let group = |vtype: &str, group_by: &str, aggregates: &[AggSpec]| {
            let mut q = vertex_scan(vtype);
            q.items = vec![ReturnItem::new(ReturnExpr::Value(ValueExpr::Prop(
                "v".into(),
                group_by.to_string(),
            )))];
            q.items.push(ReturnItem::new(ReturnExpr::Agg {
                func: AggFunc::Count,
                arg: Some(ValueExpr::Var("v".into())),
            }));
            for a in aggregates {
                q.items.push(ReturnItem::new(ReturnExpr::Agg {
                    func: a.func,
                    arg: Some(ValueExpr::Prop("v".into(), a.property.clone())),
                }));
            }
            q
        };
        match self {
            ViewDef::KHop { xtype, ytype, k, .. } => vec![pair(xtype, ytype, *k, *k, BTreeSet::new())],
            ViewDef::SameVertexType { vtype, max_len } => vec![pair(vtype, vtype, 1, *max_len, BTreeSet::new())],
            ViewDef::SameEdgeType { xtype, ytype, label, k } => {
                vec![pair(xtype, ytype, *k, *k, BTreeSet::from([label.clone()]))]
            }
            ViewDef::SourceToSink {
                xtype,
                ytype,
                min_len,
                max_len,
                labels,
            } => vec![pair(xtype, ytype, *min_len, *max_len, labels.clone())],
            ViewDef::VertexAggregator {
                vtype,
                group_by,
                aggregates,
            } => vec![group(vtype, group_by, aggregates)],
            ViewDef::SubgraphAggregator {
                vtype,
                group_by,
                aggregates,
            } => {
                let mut out = vec![group(vtype, group_by, aggregates)];
                for e in base.edge_types().iter().filter(|e| &e.src == vtype && &e.dst == vtype) {
                    let mut q = edge_scan(e);
                    q.items = vec![
                        ReturnItem::new(ReturnExpr::Value(ValueExpr::Prop("a".into(), group_by.clone()))),
                        ReturnItem::new(ReturnExpr::Value(ValueExpr::Prop("b".into(), group_by.clone()))),
                        ReturnItem::new(ReturnExpr::Agg {
                            func: AggFunc::Count,
                            arg: Some(ValueExpr::Var("e".into())),
                        }),
                    ];
                    out.push(q);
                }
                out
            }
            ViewDef::EdgeAggregator { label, aggregates } => base
                .edge_types()
                .iter()
                .filter(|e| &e.label == label)
                .map(|e| {
                    let mut q = edge_scan(e);
                    q.items = vec![
                        ReturnItem::new(ReturnExpr::Value(ValueExpr::Var("a".into()))),
                        ReturnItem::new(ReturnExpr::Value(ValueExpr::Var("b".into()))),
                        ReturnItem::new(ReturnExpr::Agg {
                            func: AggFunc::Count,
                            arg: Some(ValueExpr::Var("e".into())),
                        }),
                    ];
                    for a in aggregates {
                        q.items.push(ReturnItem::new(ReturnExpr::Agg {
                            func: a.func,
                            arg: Some(ValueExpr::Prop("e".into(), a.property.clone())),
                        }));
                    }
                    q
                })
                .collect(),
            ViewDef::VertexInclusion { .. }
            | ViewDef::VertexRemoval { .. }
            | ViewDef::EdgeInclusion { .. }
            | ViewDef::EdgeRemoval { .. } => {
                let schema = self.view_schema(base);
                let mut out: Vec<QueryGraph> = schema.vertex_types().iter().map(|t| vertex_scan(t)).collect();
                out.extend(schema.edge_types().iter().map(edge_scan));
                out
            }
        }
    }
}

fn agg_suffix(aggs: &[AggSpec]) -> String {
    aggs.iter().map(|a| format!("-{}", a.output_property())).collect()
}

/// A view template instantiated for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewInstance {
    pub def: ViewDef,
    /// Connector endpoint names in the query the view was enumerated for.
    pub x: Option<String>,
    pub y: Option<String>,
    pub view_schema: GraphSchema,
    /// Rendered defining queries over the base schema.
    pub defining_queries: Vec<String>,
    /// Name of the query this instance was enumerated for.
    pub provenance: String,
}

impl ViewInstance {
    pub fn new(def: ViewDef, x: Option<String>, y: Option<String>, base: &GraphSchema, provenance: &str) -> Self {
        ViewInstance {
            view_schema: def.view_schema(base),
            defining_queries: def.defining_queries(base).iter().map(|q| q.to_string()).collect(),
            def,
            x,
            y,
            provenance: provenance.to_string(),
        }
    }

    pub fn id(&self) -> String {
        self.def.id()
    }
}

impl fmt::Display for ViewInstance {
    /// Unification notation, e.g.
    /// `(X='q_j1', Y='q_j2', XTYPE='Job', YTYPE='Job', K=2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = |s: &str| format!("'{s}'");
        let set = |s: &BTreeSet<String>| format!("[{}]", s.iter().map(|t| q(t)).collect::<Vec<_>>().join(", "));
        let aggs = |a: &[AggSpec]| {
            format!(
                "[{}]",
                a.iter()
                    .map(|a| format!("{}({})", a.func.name(), q(&a.property)))
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        };
        let mut parts = Vec::new();
        if let Some(x) = &self.x {
            parts.push(format!("X={}", q(x)));
        }
        if let Some(y) = &self.y {
            parts.push(format!("Y={}", q(y)));
        }
        match &self.def {
            ViewDef::KHop {
                xtype,
                ytype,
                k,
                allowed_types,
                edge_summary,
            } => {
                parts.push(format!("XTYPE={}", q(xtype)));
                parts.push(format!("YTYPE={}", q(ytype)));
                parts.push(format!("K={k}"));
                if let Some(t) = allowed_types {
                    parts.push(format!("VIA={}", set(t)));
                }
                if let Some(e) = edge_summary {
                    parts.push(format!("SUMMARY={}", q(&e.output_property())));
                }
            }
            ViewDef::SameVertexType { vtype, max_len } => {
                parts.push(format!("TYPE={}", q(vtype)));
                parts.push(format!("MAXLEN={max_len}"));
            }
            ViewDef::SameEdgeType { xtype, ytype, label, k } => {
                parts.push(format!("XTYPE={}", q(xtype)));
                parts.push(format!("YTYPE={}", q(ytype)));
                parts.push(format!("LABEL={}", q(label)));
                parts.push(format!("K={k}"));
            }
            ViewDef::SourceToSink {
                xtype,
                ytype,
                min_len,
                max_len,
                labels,
            } => {
                parts.push(format!("XTYPE={}", q(xtype)));
                parts.push(format!("YTYPE={}", q(ytype)));
                parts.push(format!("L={min_len}"));
                parts.push(format!("U={max_len}"));
                if !labels.is_empty() {
                    parts.push(format!("LABELS={}", set(labels)));
                }
            }
            ViewDef::VertexRemoval { types } | ViewDef::VertexInclusion { types } => {
                parts.push(format!("TYPES={}", set(types)))
            }
            ViewDef::EdgeRemoval { labels } | ViewDef::EdgeInclusion { labels } => {
                parts.push(format!("LABELS={}", set(labels)))
            }
            ViewDef::VertexAggregator {
                vtype,
                group_by,
                aggregates,
            }
            | ViewDef::SubgraphAggregator {
                vtype,
                group_by,
                aggregates,
            } => {
                parts.push(format!("TYPE={}", q(vtype)));
                parts.push(format!("GROUP={}", q(group_by)));
                parts.push(format!("AGG={}", aggs(aggregates)));
            }
            ViewDef::EdgeAggregator { label, aggregates } => {
                parts.push(format!("LABEL={}", q(label)));
                parts.push(format!("AGG={}", aggs(aggregates)));
            }
        }
        write!(f, "({})", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    #[test]
    fn unification_notation() {
        let v = ViewInstance::new(
            ViewDef::khop("Job", "Job", 2),
            Some("q_j1".into()),
            Some("q_j2".into()),
            &GraphSchema::lineage(),
            "q1",
        );
        assert_eq!(v.to_string(), "(X='q_j1', Y='q_j2', XTYPE='Job', YTYPE='Job', K=2)");
        assert_eq!(v.def.spanner_label().unwrap(), "JOB_TO_JOB_2HOP");
        assert_eq!(v.id(), "khop-Job-Job-2");
    }

    #[test]
    fn defining_queries_parse() {
        let base = GraphSchema::lineage();
        let defs = [
            ViewDef::khop("Job", "Job", 2),
            ViewDef::VertexInclusion {
                types: BTreeSet::from(["Job".to_string(), "File".to_string()]),
            },
            ViewDef::VertexAggregator {
                vtype: "File".into(),
                group_by: "dir".into(),
                aggregates: vec![AggSpec {
                    func: AggFunc::Sum,
                    property: "bytes".into(),
                }],
            },
            ViewDef::EdgeAggregator {
                label: "WRITES_TO".into(),
                aggregates: vec![],
            },
        ];
        for d in defs {
            let inst = ViewInstance::new(d.clone(), None, None, &base, "t");
            assert!(!inst.defining_queries.is_empty());
            for text in &inst.defining_queries {
                parse_query(text).unwrap_or_else(|e| panic!("{text}: {e}"));
            }
            let json = serde_json::to_string(&d).unwrap();
            assert_eq!(serde_json::from_str::<ViewDef>(&json).unwrap(), d);
        }
    }

    #[test]
    fn sparsifier_schemas() {
        let base = GraphSchema::lineage();
        let s = ViewDef::VertexRemoval {
            types: BTreeSet::from(["File".to_string()]),
        }
        .view_schema(&base);
        assert_eq!(s.vertex_types().len(), 1);
        assert_eq!(s.edge_count(), 0);
        let s = ViewDef::EdgeInclusion {
            labels: BTreeSet::from(["WRITES_TO".to_string()]),
        }
        .view_schema(&base);
        assert_eq!((s.vertex_types().len(), s.edge_count()), (2, 1));
    }
}

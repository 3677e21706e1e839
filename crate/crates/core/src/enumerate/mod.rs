//! Candidate view enumeration: each template is unified against the mined
//! constraints of one query, yielding every binding the constraints admit.

pub mod rewrite;
pub mod walks;

use std::collections::BTreeSet;

use serde::Serialize;

pub use rewrite::{first_return_lengths, query_footprint, rewrite_with_view, HopMapping, RewriteError, RewritePlan};

use crate::constraints::{schema_path_counts, ConstraintSet};
use crate::query::{AggFunc, QueryGraph, ReturnExpr, ValueExpr};
use crate::views::{AggSpec, ViewDef, ViewInstance, ViewKind};
use walks::{only, with_labels, WalkSpec};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EnumerationStats {
    /// Template bindings tested against the constraints.
    pub bindings_examined: u64,
    pub instances: usize,
}

/// Enumerates instances of `kinds` for `q`, ordered by kind, then
/// definition, then endpoint names.
pub fn enumerate_views(
    q: &QueryGraph,
    cs: &ConstraintSet,
    kinds: &[ViewKind],
    provenance: &str,
) -> (Vec<ViewInstance>, EnumerationStats) {
    let schema = &cs.schema;
    let mut stats = EnumerationStats::default();
    let mut found: BTreeSet<(ViewKind, ViewDef, Option<String>, Option<String>)> = BTreeSet::new();
    let want = |k: ViewKind| kinds.contains(&k);
    let mut add = |def: ViewDef, x: Option<&str>, y: Option<&str>| {
        found.insert((def.kind(), def, x.map(str::to_string), y.map(str::to_string)));
    };

    for c in &cs.connectors {
        let (Some(xt), Some(yt)) = (q.vertex_type(&c.src), q.vertex_type(&c.dst)) else {
            continue;
        };
        let (x, y) = (Some(c.src.as_str()), Some(c.dst.as_str()));
        let top = c.max.min(cs.max_k);
        if top < 2 {
            continue;
        }
        let ks = c.min.max(2)..=top;
        let path_labels = q
            .path
            .as_ref()
            .filter(|_| c.has_path)
            .map(|p| p.labels.clone())
            .unwrap_or_default();

        if want(ViewKind::KHopConnector) {
            for k in ks.clone() {
                let counts = schema_path_counts(schema, k as usize);
                if counts.is_empty() {
                    continue;
                }
                stats.bindings_examined += 1;
                if counts.get(&(xt.to_string(), yt.to_string())).is_some_and(|&n| n > 0) {
                    add(ViewDef::khop(xt, yt, k), x, y);
                }
            }
        }
        if want(ViewKind::SameEdgeTypeConnector) && c.folded == 0 && c.fixed_edges.is_empty() && path_labels.len() == 1
        {
            let label = path_labels.iter().next().unwrap();
            let steps = with_labels(schema, &path_labels);
            for k in ks.clone() {
                stats.bindings_examined += 1;
                let mut w = WalkSpec::any(k as usize).endpoints(only(xt), only(yt));
                for s in &mut w.steps {
                    *s = steps.clone();
                }
                if w.exists(schema) {
                    add(
                        ViewDef::SameEdgeType {
                            xtype: xt.into(),
                            ytype: yt.into(),
                            label: label.clone(),
                            k,
                        },
                        x,
                        y,
                    );
                }
            }
        }
        if want(ViewKind::SourceToSinkConnector) && c.min >= 1 && c.max <= cs.max_k {
            stats.bindings_examined += 1;
            if cs.source_types.contains(xt) && cs.sink_types.contains(yt) {
                let labels = if c.folded == 0 && c.fixed_edges.is_empty() {
                    path_labels.clone()
                } else {
                    BTreeSet::new()
                };
                let steps = with_labels(schema, &labels);
                let reachable = (c.min..=c.max).any(|l| {
                    let mut w = WalkSpec::any(l as usize).endpoints(only(xt), only(yt));
                    for s in &mut w.steps {
                        *s = steps.clone();
                    }
                    w.exists(schema)
                });
                if reachable {
                    add(
                        ViewDef::SourceToSink {
                            xtype: xt.into(),
                            ytype: yt.into(),
                            min_len: c.min,
                            max_len: c.max,
                            labels,
                        },
                        x,
                        y,
                    );
                }
            }
        }
        if want(ViewKind::SameVertexTypeConnector) && xt == yt {
            stats.bindings_examined += 1;
            if !first_return_lengths(schema, xt, top).is_empty() {
                add(
                    ViewDef::SameVertexType {
                        vtype: xt.into(),
                        max_len: top,
                    },
                    x,
                    y,
                );
            }
        }
    }

    let (types, triples) = query_footprint(q, schema);
    let labels: BTreeSet<String> = triples.iter().map(|t| t.label.clone()).collect();
    let all_types = schema.vertex_types().clone();
    let all_labels: BTreeSet<String> = schema.labels().into_iter().map(str::to_string).collect();
    let kept_types: BTreeSet<String> = types.intersection(&all_types).cloned().collect();
    let dropped_types: BTreeSet<String> = all_types.difference(&types).cloned().collect();
    let dropped_labels: BTreeSet<String> = all_labels.difference(&labels).cloned().collect();
    if want(ViewKind::VertexInclusion) && !kept_types.is_empty() {
        stats.bindings_examined += 1;
        add(ViewDef::VertexInclusion { types: kept_types }, None, None);
    }
    if want(ViewKind::VertexRemoval) && !dropped_types.is_empty() {
        stats.bindings_examined += 1;
        add(ViewDef::VertexRemoval { types: dropped_types }, None, None);
    }
    if want(ViewKind::EdgeInclusion) && !labels.is_empty() {
        stats.bindings_examined += 1;
        add(ViewDef::EdgeInclusion { labels }, None, None);
    }
    if want(ViewKind::EdgeRemoval) && !dropped_labels.is_empty() {
        stats.bindings_examined += 1;
        add(ViewDef::EdgeRemoval { labels: dropped_labels }, None, None);
    }

    for def in aggregator_candidates(q, cs).into_iter().filter(|d| want(d.kind())) {
        stats.bindings_examined += 1;
        let inst = ViewInstance::new(def.clone(), None, None, schema, provenance);
        if rewrite_with_view(q, &inst, schema).is_ok() {
            add(def, None, None);
        }
    }

    let out: Vec<ViewInstance> = found
        .into_iter()
        .map(|(_, def, x, y)| ViewInstance::new(def, x, y, schema, provenance))
        .collect();
    stats.instances = out.len();
    (out, stats)
}

/// Aggregates over `var` the query asks for, as view summaries.
fn wanted_aggs(q: &QueryGraph, var: &str, skip: &str) -> Vec<AggSpec> {
    let mut out: BTreeSet<AggSpec> = BTreeSet::new();
    for item in &q.items {
        if let ReturnExpr::Agg {
            func,
            arg: Some(ValueExpr::Prop(v, p)),
        } = &item.expr
        {
            if v == var && p != skip && p != "id" && *func != AggFunc::Avg {
                out.insert(AggSpec {
                    func: *func,
                    property: p.clone(),
                });
            }
        }
    }
    out.into_iter().collect()
}

fn group_key(q: &QueryGraph, vars: &[&str]) -> Option<String> {
    q.items.iter().find_map(|i| match &i.expr {
        ReturnExpr::Value(ValueExpr::Prop(v, p)) if vars.contains(&v.as_str()) && p != "id" => Some(p.clone()),
        _ => None,
    })
}

fn aggregator_candidates(q: &QueryGraph, cs: &ConstraintSet) -> Vec<ViewDef> {
    if !q.has_aggregates() || q.path.is_some() {
        return Vec::new();
    }
    let schema = &cs.schema;
    let self_loop = |t: &str| schema.edge_types().iter().any(|e| e.src == t && e.dst == t);
    let mut out = Vec::new();
    match (q.vertices.iter().collect::<Vec<_>>().as_slice(), q.edges.as_slice()) {
        ([(a, Some(t))], []) => {
            if let Some(g) = group_key(q, &[a]) {
                let aggregates = wanted_aggs(q, a, &g);
                out.push(ViewDef::VertexAggregator {
                    vtype: t.to_string(),
                    group_by: g.clone(),
                    aggregates: aggregates.clone(),
                });
                if self_loop(t) {
                    out.push(ViewDef::SubgraphAggregator {
                        vtype: t.to_string(),
                        group_by: g,
                        aggregates,
                    });
                }
            }
        }
        (_, [e]) => {
            if let Some(label) = &e.label {
                let aggregates = e.var.as_deref().map(|v| wanted_aggs(q, v, "")).unwrap_or_default();
                out.push(ViewDef::EdgeAggregator {
                    label: label.clone(),
                    aggregates,
                });
                if let (Some(t), Some(g)) = (q.vertex_type(&e.src), group_key(q, &[&e.src, &e.dst])) {
                    if q.vertex_type(&e.dst) == Some(t) && self_loop(t) {
                        out.push(ViewDef::SubgraphAggregator {
                            vtype: t.to_string(),
                            group_by: g,
                            aggregates: Vec::new(),
                        });
                    }
                }
            }
        }
        _ => {}
    }
    out
}

#[cfg(test)]
mod tests;

//! Building view graphs from a base graph.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use super::{AggSpec, EdgeSummary, Reducer, ViewDef, EDGE_COUNT, MEMBER_COUNT, PATH_COUNT};
use crate::exec::{aggregate, ExecError};
use crate::graph::{EdgeId, GraphError, Properties, PropertyGraph, PropertyValue, VertexId};
use crate::query::AggFunc;

#[derive(Debug, Error)]
pub enum MaterializeError {
    #[error("view would exceed {limit} edges or trail steps")]
    BudgetExceeded { limit: u64 },
    #[error("type '{0}' is not in the base schema")]
    UnknownType(String),
    #[error(transparent)]
    Aggregate(#[from] ExecError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy)]
pub struct MaterializeOptions {
    /// Largest number of view edges allowed.
    pub edge_cap: u64,
    /// Largest number of trail extensions while contracting.
    pub step_cap: u64,
}

impl Default for MaterializeOptions {
    fn default() -> Self {
        MaterializeOptions {
            edge_cap: 50_000_000,
            step_cap: 2_000_000_000,
        }
    }
}

pub fn materialize(
    g: &PropertyGraph,
    def: &ViewDef,
    opts: MaterializeOptions,
) -> Result<PropertyGraph, MaterializeError> {
    let out = if def.kind().is_spanner() {
        materialize_spanner(g, def, opts)?
    } else {
        materialize_sparsifier(g, def)?
    };
    if out.edge_count() as u64 > opts.edge_cap {
        return Err(MaterializeError::BudgetExceeded { limit: opts.edge_cap });
    }
    Ok(out)
}

/// Which trails a connector contracts.
struct TrailRule {
    xtype: u32,
    ytype: u32,
    min: u32,
    max: u32,
    /// Allowed edge labels; `None` allows all.
    labels: Option<BTreeSet<u32>>,
    /// Allowed interior vertex types; `None` allows all.
    interior: Option<BTreeSet<u32>>,
}

impl TrailRule {
    fn new(g: &PropertyGraph, def: &ViewDef) -> Result<TrailRule, MaterializeError> {
        let ty = |t: &str| {
            g.type_index(t)
                .ok_or_else(|| MaterializeError::UnknownType(t.to_string()))
        };
        let types = |s: &BTreeSet<String>| s.iter().filter_map(|t| g.type_index(t)).collect::<BTreeSet<u32>>();
        let labels = |s: &BTreeSet<String>| s.iter().filter_map(|l| g.label_index(l)).collect::<BTreeSet<u32>>();
        Ok(match def {
            ViewDef::KHop {
                xtype,
                ytype,
                k,
                allowed_types,
                ..
            } => TrailRule {
                xtype: ty(xtype)?,
                ytype: ty(ytype)?,
                min: *k,
                max: *k,
                labels: None,
                interior: allowed_types.as_ref().map(types),
            },
            ViewDef::SameVertexType { vtype, max_len } => {
                let t = ty(vtype)?;
                let all: BTreeSet<u32> = (0..g.schema().vertex_types().len() as u32)
                    .filter(|&i| i != t)
                    .collect();
                TrailRule {
                    xtype: t,
                    ytype: t,
                    min: 1,
                    max: *max_len,
                    labels: None,
                    interior: Some(all),
                }
            }
            ViewDef::SameEdgeType { xtype, ytype, label, k } => TrailRule {
                xtype: ty(xtype)?,
                ytype: ty(ytype)?,
                min: *k,
                max: *k,
                labels: Some(labels(&BTreeSet::from([label.clone()]))),
                interior: None,
            },
            ViewDef::SourceToSink {
                xtype,
                ytype,
                min_len,
                max_len,
                labels: ls,
            } => TrailRule {
                xtype: ty(xtype)?,
                ytype: ty(ytype)?,
                min: *min_len,
                max: *max_len,
                labels: (!ls.is_empty()).then(|| labels(ls)),
                interior: None,
            },
            _ => unreachable!("not a spanner"),
        })
    }
}

/// Per target: number of trails and the least per-trail reduction.
type Reach = BTreeMap<VertexId, (u64, f64)>;

struct Contract<'a> {
    g: &'a PropertyGraph,
    rule: &'a TrailRule,
    summary: Option<&'a EdgeSummary>,
    steps: &'a AtomicU64,
    cap: u64,
}

impl Contract<'_> {
    fn go(&self, at: VertexId, acc: f64, trail: &mut Vec<EdgeId>, out: &mut Reach) -> Result<(), MaterializeError> {
        let depth = trail.len() as u32;
        if depth >= self.rule.min && depth >= 1 && self.g.vertex_type_index(at) == self.rule.ytype {
            let slot = out.entry(at).or_insert((0, f64::INFINITY));
            slot.0 += 1;
            slot.1 = slot.1.min(acc);
        }
        if depth == self.rule.max {
            return Ok(());
        }
        if depth >= 1 {
            if let Some(allowed) = &self.rule.interior {
                if !allowed.contains(&self.g.vertex_type_index(at)) {
                    return Ok(());
                }
            }
        }
        for &e in self.g.out_edges(at) {
            if trail.contains(&e) {
                continue;
            }
            if let Some(ls) = &self.rule.labels {
                if !ls.contains(&self.g.edge_label_index(e)) {
                    continue;
                }
            }
            if self.steps.fetch_add(1, Ordering::Relaxed) >= self.cap {
                return Err(MaterializeError::BudgetExceeded { limit: self.cap });
            }
            let next = match self.summary {
                None => acc,
                Some(s) => match (
                    s.reducer,
                    self.g.edge_props(e).get(&s.property).and_then(|v| v.as_f64()),
                ) {
                    (_, None) => acc,
                    (Reducer::Max, Some(w)) => acc.max(w),
                    (Reducer::Sum, Some(w)) => acc + w,
                },
            };
            trail.push(e);
            self.go(self.g.edge_dst(e), next, trail, out)?;
            trail.pop();
        }
        Ok(())
    }
}

/// Contracts every qualifying trail into one edge per (source, target)
/// pair, carrying the trail count and the optional edge summary. Only trail
/// endpoints are kept; their keys and properties are unchanged.
pub fn materialize_spanner(
    g: &PropertyGraph,
    def: &ViewDef,
    opts: MaterializeOptions,
) -> Result<PropertyGraph, MaterializeError> {
    let rule = TrailRule::new(g, def)?;
    let summary = match def {
        ViewDef::KHop { edge_summary, .. } => edge_summary.as_ref(),
        _ => None,
    };
    let start = match summary.map(|s| s.reducer) {
        Some(Reducer::Sum) => 0.0,
        _ => f64::NEG_INFINITY,
    };
    let steps = AtomicU64::new(0);
    let c = Contract {
        g,
        rule: &rule,
        summary,
        steps: &steps,
        cap: opts.step_cap,
    };
    let sources: Vec<VertexId> = g
        .vertex_ids()
        .filter(|&v| g.vertex_type_index(v) == rule.xtype)
        .collect();
    let produced = AtomicU64::new(0);
    let reached: Vec<(VertexId, Reach)> = sources
        .par_iter()
        .map(|&x| {
            let mut out = Reach::new();
            c.go(x, start, &mut Vec::new(), &mut out)?;
            if produced.fetch_add(out.len() as u64, Ordering::Relaxed) + out.len() as u64 > opts.edge_cap {
                return Err(MaterializeError::BudgetExceeded { limit: opts.edge_cap });
            }
            Ok((x, out))
        })
        .collect::<Result<_, _>>()?;

    let mut out = PropertyGraph::new(def.view_schema(g.schema()));
    let mut endpoints: BTreeSet<VertexId> = BTreeSet::new();
    for (x, r) in &reached {
        if !r.is_empty() {
            endpoints.insert(*x);
            endpoints.extend(r.keys());
        }
    }
    for &v in &endpoints {
        out.add_vertex(g.vertex_key(v), g.vertex_type(v), g.vertex_props(v).clone())?;
    }
    let label = def.spanner_label().unwrap();
    for (x, r) in &reached {
        for (y, (count, best)) in r {
            let mut props = Properties::from([(PATH_COUNT.to_string(), PropertyValue::Int(*count as i64))]);
            if let Some(s) = summary {
                if best.is_finite() {
                    props.insert(s.output_property(), PropertyValue::Float(*best));
                }
            }
            let key = format!("{}->{}", g.vertex_key(*x), g.vertex_key(*y));
            out.add_edge(key, g.vertex_key(*x), g.vertex_key(*y), &label, props)?;
        }
    }
    Ok(out)
}

fn fold(
    func: AggFunc,
    values: impl IntoIterator<Item = Option<PropertyValue>>,
) -> Result<Option<PropertyValue>, MaterializeError> {
    Ok(aggregate(func, values)?)
}

fn aggregate_props(aggs: &[AggSpec], members: &[&Properties], props: &mut Properties) -> Result<(), MaterializeError> {
    for a in aggs {
        let v = fold(a.func, members.iter().map(|p| p.get(&a.property).cloned()))?;
        if let Some(v) = v {
            props.insert(a.output_property(), v);
        }
    }
    Ok(())
}

/// Groups `vtype` vertices by `group_by`, in order of their keys, and
/// returns (group value, members) with groups in value order.
fn groups(g: &PropertyGraph, vtype: &str, group_by: &str) -> Vec<(Option<PropertyValue>, Vec<VertexId>)> {
    let mut members: Vec<VertexId> = g.vertices_of_type(vtype).to_vec();
    members.sort_by(|a, b| g.vertex_key(*a).cmp(g.vertex_key(*b)));
    let mut by: BTreeMap<Option<PropertyValue>, Vec<VertexId>> = BTreeMap::new();
    for v in members {
        by.entry(g.vertex_props(v).get(group_by).cloned()).or_default().push(v);
    }
    by.into_iter().collect()
}

fn supervertex_key(vtype: &str, group_by: &str, i: usize) -> String {
    format!("{vtype}:{group_by}#{i}")
}

/// Filters or aggregates the base graph according to a sparsifier.
pub fn materialize_sparsifier(g: &PropertyGraph, def: &ViewDef) -> Result<PropertyGraph, MaterializeError> {
    let schema = def.view_schema(g.schema());
    let mut out = PropertyGraph::new(schema.clone());
    match def {
        ViewDef::VertexInclusion { .. }
        | ViewDef::VertexRemoval { .. }
        | ViewDef::EdgeInclusion { .. }
        | ViewDef::EdgeRemoval { .. } => {
            for v in g.vertex_ids() {
                if schema.has_vertex_type(g.vertex_type(v)) {
                    out.add_vertex(g.vertex_key(v), g.vertex_type(v), g.vertex_props(v).clone())?;
                }
            }
            for e in g.edge_ids() {
                let (s, d) = (g.edge_src(e), g.edge_dst(e));
                if schema.contains_triple(g.vertex_type(s), g.vertex_type(d), g.edge_label(e)) {
                    out.add_edge(
                        g.edge_key(e),
                        g.vertex_key(s),
                        g.vertex_key(d),
                        g.edge_label(e),
                        g.edge_props(e).clone(),
                    )?;
                }
            }
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
            if !g.schema().has_vertex_type(vtype) {
                return Err(MaterializeError::UnknownType(vtype.clone()));
            }
            let gs = groups(g, vtype, group_by);
            let mut group_of: BTreeMap<VertexId, usize> = BTreeMap::new();
            for (i, (value, members)) in gs.iter().enumerate() {
                let mut props =
                    Properties::from([(MEMBER_COUNT.to_string(), PropertyValue::Int(members.len() as i64))]);
                if let Some(v) = value {
                    props.insert(group_by.clone(), v.clone());
                }
                let member_props: Vec<&Properties> = members.iter().map(|&v| g.vertex_props(v)).collect();
                aggregate_props(aggregates, &member_props, &mut props)?;
                out.add_vertex(supervertex_key(vtype, group_by, i), vtype, props)?;
                for &v in members {
                    group_of.insert(v, i);
                }
            }
            if matches!(def, ViewDef::SubgraphAggregator { .. }) {
                let mut counts: BTreeMap<(usize, usize, &str), i64> = BTreeMap::new();
                for e in g.edge_ids() {
                    if let (Some(&a), Some(&b)) = (group_of.get(&g.edge_src(e)), group_of.get(&g.edge_dst(e))) {
                        *counts.entry((a, b, g.edge_label(e))).or_default() += 1;
                    }
                }
                for ((a, b, label), n) in counts {
                    let (ka, kb) = (supervertex_key(vtype, group_by, a), supervertex_key(vtype, group_by, b));
                    out.add_edge(
                        format!("{label}:{ka}->{kb}"),
                        &ka,
                        &kb,
                        label,
                        Properties::from([(EDGE_COUNT.to_string(), PropertyValue::Int(n))]),
                    )?;
                }
            }
        }
        ViewDef::EdgeAggregator { label, aggregates } => {
            for v in g.vertex_ids() {
                out.add_vertex(g.vertex_key(v), g.vertex_type(v), g.vertex_props(v).clone())?;
            }
            let mut bundles: BTreeMap<(&str, &str), Vec<EdgeId>> = BTreeMap::new();
            for e in g.edge_ids() {
                let (s, d) = (g.vertex_key(g.edge_src(e)), g.vertex_key(g.edge_dst(e)));
                if g.edge_label(e) == label {
                    bundles.entry((s, d)).or_default().push(e);
                } else {
                    out.add_edge(g.edge_key(e), s, d, g.edge_label(e), g.edge_props(e).clone())?;
                }
            }
            for ((s, d), mut edges) in bundles {
                edges.sort_by(|a, b| g.edge_key(*a).cmp(g.edge_key(*b)));
                let mut props = Properties::from([(EDGE_COUNT.to_string(), PropertyValue::Int(edges.len() as i64))]);
                let member_props: Vec<&Properties> = edges.iter().map(|&e| g.edge_props(e)).collect();
                aggregate_props(aggregates, &member_props, &mut props)?;
                out.add_edge(format!("{label}:{s}->{d}"), s, d, label, props)?;
            }
        }
        _ => unreachable!("not a sparsifier"),
    }
    Ok(out)
}

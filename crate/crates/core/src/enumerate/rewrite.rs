//! Rewriting a query to run over a single materialized view.
//!
//! Connector views replace the chain between two endpoints by view edges.
//! A raw connector trail of length l in [lo, hi] and a view trail must
//! imply each other, which is checked on the schema:
//! * with one view hop (hi < 2K) every feasible raw walk is exactly one
//!   view walk and vice versa;
//! * with J = floor(hi/K) >= 2 hops, every feasible raw walk splits into
//!   view walks at multiples of K, and every walk over the view's edge
//!   universe of length <= J*K is itself a feasible raw walk. The second
//!   condition covers view trails whose expansions share raw edges: such a
//!   walk shortens to a raw trail that the raw query accepts.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use super::walks::{intersect, only, with_labels, Allowed, WalkSpec};
use crate::constraints::query_hop_bounds;
use crate::graph::{EdgeTriple, GraphSchema};
use crate::query::{AggFunc, Expr, Operand, PatternEdge, QueryGraph, ReturnExpr, ValueExpr, VarLengthPath};
use crate::views::{AggSpec, ViewDef, ViewInstance, EDGE_COUNT, MEMBER_COUNT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("view does not apply: {0}")]
    NotApplicable(String),
    #[error("'{0}' is contracted by the view but referenced by the query")]
    NameEliminatedButReferenced(String),
    #[error("pattern element outside the view's connector: {0}")]
    UncoveredPattern(String),
    #[error("hop mapping is not result-preserving: {0}")]
    Unsound(String),
}

use RewriteError::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HopMapping {
    /// Raw connector range, folded edges included.
    pub raw: (u32, u32),
    /// Bounds on the number of view edges.
    pub view: (u32, u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewritePlan {
    pub view_id: String,
    pub rewritten: QueryGraph,
    pub hop_mapping: Option<HopMapping>,
    /// Column names of the original query; the rewritten text may differ.
    pub output_columns: Vec<String>,
}

impl Serialize for RewritePlan {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RewritePlan", 4)?;
        st.serialize_field("view_id", &self.view_id)?;
        st.serialize_field("rewritten", &self.rewritten.to_string())?;
        st.serialize_field("hop_mapping", &self.hop_mapping)?;
        st.serialize_field("output_columns", &self.output_columns)?;
        st.end()
    }
}

#[derive(Debug, Clone)]
enum Elem {
    Fixed(usize),
    Path,
}

/// The pattern read as one chain from x to y.
#[derive(Debug)]
struct Chain {
    elems: Vec<Elem>,
    /// Vertex names along the chain, endpoints included.
    vertices: Vec<String>,
}

fn chain_between(q: &QueryGraph, x: &str, y: &str) -> Result<Chain, RewriteError> {
    let total = q.edges.len() + usize::from(q.path.is_some());
    let mut chain = Chain {
        elems: Vec::new(),
        vertices: vec![x.to_string()],
    };
    let mut cur = x.to_string();
    while chain.elems.is_empty() || cur != y {
        let mut outs: Vec<(Elem, String)> = q
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.src == cur)
            .map(|(i, e)| (Elem::Fixed(i), e.dst.clone()))
            .collect();
        if let Some(p) = q.path.as_ref().filter(|p| p.src == cur) {
            outs.push((Elem::Path, p.dst.clone()));
        }
        if outs.len() != 1 || chain.elems.len() == total {
            return Err(UncoveredPattern(format!("no single chain from '{x}' to '{y}'")));
        }
        let (elem, next) = outs.pop().unwrap();
        if next != y && chain.vertices.contains(&next) {
            return Err(UncoveredPattern(format!("'{next}' is revisited")));
        }
        chain.elems.push(elem);
        chain.vertices.push(next.clone());
        cur = next;
    }
    let covered: BTreeSet<&String> = chain.vertices.iter().collect();
    if chain.elems.len() != total {
        return Err(UncoveredPattern("edges outside the chain".into()));
    }
    if let Some(v) = q.vertices.keys().find(|v| !covered.contains(v)) {
        return Err(UncoveredPattern(format!("vertex '{v}'")));
    }
    Ok(chain)
}

impl Chain {
    fn fixed_count(&self) -> u32 {
        self.elems.iter().filter(|e| matches!(e, Elem::Fixed(_))).count() as u32
    }

    fn range(&self, q: &QueryGraph) -> (u32, u32) {
        let f = self.fixed_count();
        match &q.path {
            Some(p) => (p.min + f, p.max + f),
            None => (f, f),
        }
    }

    /// Names the rewrite removes: interior vertices and every chain edge
    /// variable.
    fn contracted<'a>(&'a self, q: &'a QueryGraph) -> Vec<&'a str> {
        let mut out: Vec<&str> = self.vertices[1..self.vertices.len() - 1]
            .iter()
            .map(String::as_str)
            .collect();
        for e in &self.elems {
            match e {
                Elem::Fixed(i) => out.extend(q.edges[*i].var.as_deref()),
                Elem::Path => out.extend(q.path.as_ref().and_then(|p| p.var.as_deref())),
            }
        }
        out
    }

    /// Raw walks of exactly `len` steps that the chain accepts, or `None`
    /// when `len` is outside its range.
    fn walks(&self, q: &QueryGraph, schema: &GraphSchema, len: u32) -> Option<WalkSpec> {
        let (lo, hi) = self.range(q);
        if len < lo || len > hi {
            return None;
        }
        let f = self.fixed_count();
        let path_len = (len - f) as usize;
        let ty = |name: &str| q.vertex_type(name).map(only).unwrap_or(None);
        let mut spec = WalkSpec::any(len as usize);
        let mut pos = 0usize;
        spec.positions[0] = ty(&self.vertices[0]);
        for (i, elem) in self.elems.iter().enumerate() {
            let step_len = match elem {
                Elem::Fixed(j) => {
                    let labels = q.edges[*j].label.iter().cloned().collect();
                    spec.steps[pos] = with_labels(schema, &labels);
                    1
                }
                Elem::Path => {
                    let p = q.path.as_ref().unwrap();
                    let allowed = with_labels(schema, &p.labels);
                    for s in &mut spec.steps[pos..pos + path_len] {
                        *s = allowed.clone();
                    }
                    path_len
                }
            };
            pos += step_len;
            spec.positions[pos] = intersect(&spec.positions[pos], &ty(&self.vertices[i + 1]));
        }
        Some(spec)
    }
}

fn endpoint_type<'a>(q: &'a QueryGraph, name: &str) -> Result<&'a str, RewriteError> {
    q.vertex_type(name)
        .ok_or_else(|| NotApplicable(format!("endpoint '{name}' has no type")))
}

/// The connector endpoints to rewrite: the instance's own names when the
/// query has them, otherwise the query's connector.
fn endpoints(q: &QueryGraph, v: &ViewInstance) -> Result<(String, String), RewriteError> {
    if let (Some(x), Some(y)) = (&v.x, &v.y) {
        if q.vertices.contains_key(x) && q.vertices.contains_key(y) {
            return Ok((x.clone(), y.clone()));
        }
    }
    query_hop_bounds(q)
        .into_iter()
        .next()
        .map(|c| (c.src, c.dst))
        .ok_or_else(|| NotApplicable("query has no connector".into()))
}

/// Lengths of `vtype`-to-`vtype` schema walks with no `vtype` vertex in
/// between, up to `max_len`.
pub fn first_return_lengths(schema: &GraphSchema, vtype: &str, max_len: u32) -> Vec<u32> {
    (1..=max_len)
        .filter(|&l| first_return_walks(schema, vtype, l).exists(schema))
        .collect()
}

fn first_return_walks(schema: &GraphSchema, vtype: &str, len: u32) -> WalkSpec {
    let others: BTreeSet<String> = schema.vertex_types().iter().filter(|t| *t != vtype).cloned().collect();
    let mut w = WalkSpec::any(len as usize).endpoints(only(vtype), only(vtype));
    for p in &mut w.positions[1..len as usize] {
        *p = Some(others.clone());
    }
    w
}

/// View walks of length k: one contracted trail's type sequence.
fn segment(xtype: &str, ytype: &str, k: u32, steps: &Allowed<EdgeTriple>, interior: &Allowed<String>) -> WalkSpec {
    let mut w = WalkSpec::any(k as usize).endpoints(only(xtype), only(ytype));
    for s in &mut w.steps {
        *s = steps.clone();
    }
    for p in &mut w.positions[1..k as usize] {
        *p = intersect(p, interior);
    }
    w
}

/// `j` view walks end to end.
fn segments(one: &WalkSpec, j: u32) -> WalkSpec {
    let k = one.len();
    let mut w = WalkSpec::any(k * j as usize);
    for s in 0..j as usize {
        for i in 0..k {
            w.steps[s * k + i] = one.steps[i].clone();
            w.positions[s * k + i] = intersect(&w.positions[s * k + i], &one.positions[i]);
        }
        w.positions[(s + 1) * k] = intersect(&w.positions[(s + 1) * k], &one.positions[k]);
    }
    w
}

/// Decides the view-hop bounds for a view whose edges contract trails of
/// exactly `k` edges shaped like `one`.
fn segmented_bounds(
    q: &QueryGraph,
    chain: &Chain,
    schema: &GraphSchema,
    one: &WalkSpec,
) -> Result<(u32, u32), RewriteError> {
    let k = one.len() as u32;
    let (lo, hi) = chain.range(q);
    if lo == 0 {
        return Err(Unsound("connector admits zero-length matches".into()));
    }
    if k == 0 || k > hi {
        return Err(Unsound(format!("K={k} exceeds the connector's {hi} hops")));
    }
    let j = hi / k;
    let xt = &one.positions[0];
    let yt = &one.positions[k as usize];
    if j >= 2 && xt != yt {
        return Err(Unsound("multi-hop view paths need equal endpoint types".into()));
    }
    for len in lo..=hi {
        let raw = chain.walks(q, schema, len).unwrap();
        if !raw.exists(schema) {
            continue;
        }
        if len % k != 0 || len / k > j {
            return Err(Unsound(format!("raw walks of length {len} are not multiples of K={k}")));
        }
        if !raw.implies(&segments(one, len / k), schema) {
            return Err(Unsound(format!(
                "some raw walk of length {len} is not a chain of view walks"
            )));
        }
    }
    if j == 1 {
        // K may fall outside the raw range (e.g. a fixed 5-hop chain).
        return match chain.walks(q, schema, k) {
            Some(raw) if one.implies(&raw, schema) => Ok((1, 1)),
            None if !one.exists(schema) => Ok((1, 1)),
            _ => Err(Unsound("a view walk is not a raw match".into())),
        };
    }
    let universe: BTreeSet<EdgeTriple> = one.layers(schema).into_iter().flatten().collect();
    for len in 1..=j * k {
        let mut w = WalkSpec::any(len as usize).endpoints(xt.clone(), yt.clone());
        for s in &mut w.steps {
            *s = Some(universe.clone());
        }
        if !w.exists(schema) {
            continue;
        }
        match chain.walks(q, schema, len) {
            Some(raw) if w.implies(&raw, schema) => {}
            _ => {
                return Err(Unsound(format!(
                    "a {len}-edge walk over the view's edges is not a raw match"
                )))
            }
        }
    }
    Ok((1, j))
}

fn range_bounds(
    q: &QueryGraph,
    chain: &Chain,
    schema: &GraphSchema,
    view: impl Fn(u32) -> Option<WalkSpec>,
    view_range: (u32, u32),
) -> Result<(), RewriteError> {
    let (lo, hi) = chain.range(q);
    if lo == 0 {
        return Err(Unsound("connector admits zero-length matches".into()));
    }
    for len in lo.min(view_range.0)..=hi.max(view_range.1) {
        let raw = chain.walks(q, schema, len).filter(|w| w.exists(schema));
        let v = view(len).filter(|w| w.exists(schema));
        match (raw, v) {
            (None, None) => {}
            (Some(r), Some(v)) if r.implies(&v, schema) && v.implies(&r, schema) => {}
            _ => return Err(Unsound(format!("raw and view walks of length {len} differ"))),
        }
    }
    Ok(())
}

fn rewrite_connector(q: &QueryGraph, v: &ViewInstance, schema: &GraphSchema) -> Result<RewritePlan, RewriteError> {
    let (x, y) = endpoints(q, v)?;
    let chain = chain_between(q, &x, &y)?;
    let referenced = q.referenced_names();
    if let Some(n) = chain.contracted(q).into_iter().find(|n| referenced.contains(n)) {
        return Err(NameEliminatedButReferenced(n.to_string()));
    }
    let (xt, yt) = (endpoint_type(q, &x)?, endpoint_type(q, &y)?);
    let (vx, vy) = match &v.def {
        ViewDef::KHop { xtype, ytype, .. }
        | ViewDef::SameEdgeType { xtype, ytype, .. }
        | ViewDef::SourceToSink { xtype, ytype, .. } => (xtype.as_str(), ytype.as_str()),
        ViewDef::SameVertexType { vtype, .. } => (vtype.as_str(), vtype.as_str()),
        _ => unreachable!("not a connector view"),
    };
    if (xt, yt) != (vx, vy) {
        return Err(NotApplicable(format!(
            "endpoint types ({xt}, {yt}) differ from the view's ({vx}, {vy})"
        )));
    }
    let view_hops = match &v.def {
        ViewDef::KHop { k, allowed_types, .. } => {
            segmented_bounds(q, &chain, schema, &segment(vx, vy, *k, &None, allowed_types))?
        }
        ViewDef::SameEdgeType { label, k, .. } => {
            let steps = with_labels(schema, &BTreeSet::from([label.clone()]));
            segmented_bounds(q, &chain, schema, &segment(vx, vy, *k, &steps, &None))?
        }
        ViewDef::SameVertexType { vtype, max_len } => {
            let lens = first_return_lengths(schema, vtype, *max_len);
            let [k] = lens.as_slice() else {
                return Err(NotApplicable(format!("view edges span lengths {lens:?}")));
            };
            segmented_bounds(q, &chain, schema, &first_return_walks(schema, vtype, *k))?
        }
        ViewDef::SourceToSink {
            min_len,
            max_len,
            labels,
            ..
        } => {
            let steps = with_labels(schema, labels);
            let view = |len: u32| {
                (*min_len..=*max_len)
                    .contains(&len)
                    .then(|| segment(vx, vy, len, &steps, &None))
            };
            range_bounds(q, &chain, schema, view, (*min_len, *max_len))?;
            (1, 1)
        }
        _ => unreachable!(),
    };
    let label = v.def.spanner_label().unwrap();
    let mut rewritten = QueryGraph {
        filter: q.filter.clone(),
        distinct: q.distinct,
        items: q.items.clone(),
        order_by: q.order_by,
        limit: q.limit,
        ..QueryGraph::default()
    };
    rewritten.vertices.insert(x.clone(), Some(xt.to_string()));
    rewritten.vertices.insert(y.clone(), Some(yt.to_string()));
    let path_var = q.path.as_ref().and_then(|p| p.var.clone());
    if view_hops == (1, 1) {
        let var = match chain.elems.as_slice() {
            [Elem::Fixed(i)] => q.edges[*i].var.clone(),
            _ => path_var,
        };
        rewritten.edges.push(PatternEdge {
            var,
            src: x,
            dst: y,
            label: Some(label),
        });
    } else {
        rewritten.path = Some(VarLengthPath {
            var: path_var,
            src: x,
            dst: y,
            min: view_hops.0,
            max: view_hops.1,
            labels: BTreeSet::from([label]),
        });
    }
    Ok(RewritePlan {
        view_id: v.id(),
        rewritten,
        hop_mapping: Some(HopMapping {
            raw: chain.range(q),
            view: view_hops,
        }),
        output_columns: q.column_names(),
    })
}

/// Types and schema triples any match of `q` can touch.
pub fn query_footprint(q: &QueryGraph, schema: &GraphSchema) -> (BTreeSet<String>, BTreeSet<EdgeTriple>) {
    let all = schema.vertex_types();
    let tset = |name: &str| -> BTreeSet<String> {
        match q.vertex_type(name) {
            Some(t) => BTreeSet::from([t.to_string()]),
            None => all.clone(),
        }
    };
    let mut types: BTreeSet<String> = q.vertices.keys().flat_map(|v| tset(v)).collect();
    let mut triples = BTreeSet::new();
    for e in &q.edges {
        let (s, d) = (tset(&e.src), tset(&e.dst));
        triples.extend(
            schema
                .edge_types()
                .iter()
                .filter(|t| s.contains(&t.src) && d.contains(&t.dst) && e.label.as_ref().is_none_or(|l| *l == t.label))
                .cloned(),
        );
    }
    if let Some(p) = &q.path {
        let steps = with_labels(schema, &p.labels);
        for len in p.min.max(1)..=p.max {
            let mut w = WalkSpec::any(len as usize).endpoints(Some(tset(&p.src)), Some(tset(&p.dst)));
            for s in &mut w.steps {
                *s = steps.clone();
            }
            triples.extend(w.layers(schema).into_iter().flatten());
        }
    }
    for t in &triples {
        types.insert(t.src.clone());
        types.insert(t.dst.clone());
    }
    (types, triples)
}

fn rewrite_sparsifier(q: &QueryGraph, v: &ViewInstance, schema: &GraphSchema) -> Result<RewritePlan, RewriteError> {
    let (types, triples) = query_footprint(q, schema);
    let labels: BTreeSet<String> = triples.iter().map(|t| t.label.clone()).collect();
    let ok = match &v.def {
        ViewDef::VertexInclusion { types: keep } => types.is_subset(keep),
        ViewDef::VertexRemoval { types: drop } => types.is_disjoint(drop),
        ViewDef::EdgeInclusion { labels: keep } => labels.is_subset(keep),
        ViewDef::EdgeRemoval { labels: drop } => labels.is_disjoint(drop),
        _ => unreachable!(),
    };
    if !ok {
        return Err(NotApplicable("the query touches filtered elements".into()));
    }
    Ok(RewritePlan {
        view_id: v.id(),
        rewritten: q.clone(),
        hop_mapping: None,
        output_columns: q.column_names(),
    })
}

fn expr_values(e: &Expr, out: &mut Vec<ValueExpr>) {
    match e {
        Expr::Or(a, b) | Expr::And(a, b) => {
            expr_values(a, out);
            expr_values(b, out);
        }
        Expr::Not(a) => expr_values(a, out),
        Expr::Cmp(l, _, r) => {
            for o in [l, r] {
                if let Operand::Value(v) = o {
                    out.push(v.clone());
                }
            }
        }
    }
}

fn filter_values(q: &QueryGraph) -> Vec<ValueExpr> {
    let mut out = Vec::new();
    if let Some(f) = &q.filter {
        expr_values(f, &mut out);
    }
    out
}

fn agg_over(func: AggFunc, var: &str, prop: String) -> ReturnExpr {
    ReturnExpr::Agg {
        func,
        arg: Some(ValueExpr::Prop(var.to_string(), prop)),
    }
}

/// Maps an aggregate over group members to one over the stored summary.
fn summary_agg(func: AggFunc, var: &str, prop: &str, kept: &[AggSpec]) -> Result<ReturnExpr, RewriteError> {
    let spec = AggSpec {
        func,
        property: prop.to_string(),
    };
    if func == AggFunc::Avg || !kept.contains(&spec) {
        return Err(NotApplicable(format!(
            "{}({var}.{prop}) is not kept by the view",
            func.name()
        )));
    }
    let outer = if func == AggFunc::Count { AggFunc::Sum } else { func };
    Ok(agg_over(outer, var, spec.output_property()))
}

fn rewrite_vertex_groups(
    q: &QueryGraph,
    vtype: &str,
    group_by: &str,
    kept: &[AggSpec],
) -> Result<QueryGraph, RewriteError> {
    let verts: Vec<_> = q.vertices.iter().collect();
    let [(a, Some(t))] = verts.as_slice() else {
        return Err(NotApplicable("pattern is not a single typed vertex".into()));
    };
    if t.as_str() != vtype || !q.edges.is_empty() || q.path.is_some() {
        return Err(NotApplicable("pattern does not scan the aggregated type".into()));
    }
    let key = ValueExpr::Prop(a.to_string(), group_by.to_string());
    if filter_values(q).iter().any(|v| *v != key) {
        return Err(NotApplicable("filter reads more than the group key".into()));
    }
    let mut out = q.clone();
    let mut grouped = false;
    for item in &mut out.items {
        item.expr = match &item.expr {
            ReturnExpr::Value(v) if *v == key => {
                grouped = true;
                continue;
            }
            ReturnExpr::Value(_) => return Err(NotApplicable("returns a member property".into())),
            ReturnExpr::Agg {
                func: AggFunc::Count,
                arg,
            } if arg.as_ref().is_none_or(|v| *v == ValueExpr::Var(a.to_string())) => {
                agg_over(AggFunc::Sum, a, MEMBER_COUNT.to_string())
            }
            ReturnExpr::Agg {
                func,
                arg: Some(ValueExpr::Prop(_, p)),
            } if *p != group_by => summary_agg(*func, a, p, kept)?,
            ReturnExpr::Agg { .. } => return Err(NotApplicable("aggregate not kept by the view".into())),
        };
    }
    if !grouped {
        return Err(NotApplicable("query does not group by the view's key".into()));
    }
    Ok(out)
}

fn single_edge(q: &QueryGraph) -> Result<&PatternEdge, RewriteError> {
    match q.edges.as_slice() {
        [e] if q.path.is_none() && e.src != e.dst && q.vertices.len() == 2 => Ok(e),
        _ => Err(NotApplicable("pattern is not a single edge".into())),
    }
}

fn rewrite_subgraph_edges(q: &QueryGraph, vtype: &str, group_by: &str) -> Result<QueryGraph, RewriteError> {
    let e = single_edge(q)?;
    let (Some(ev), Some(_)) = (&e.var, &e.label) else {
        return Err(NotApplicable("edge needs a variable and a label".into()));
    };
    if q.vertex_type(&e.src) != Some(vtype) || q.vertex_type(&e.dst) != Some(vtype) {
        return Err(NotApplicable("edge endpoints are not the aggregated type".into()));
    }
    let keys = [
        ValueExpr::Prop(e.src.clone(), group_by.to_string()),
        ValueExpr::Prop(e.dst.clone(), group_by.to_string()),
    ];
    if filter_values(q).iter().any(|v| !keys.contains(v)) {
        return Err(NotApplicable("filter reads more than the group keys".into()));
    }
    let mut out = q.clone();
    let mut counted = false;
    for item in &mut out.items {
        item.expr = match &item.expr {
            ReturnExpr::Value(v) if keys.contains(v) => continue,
            ReturnExpr::Agg {
                func: AggFunc::Count,
                arg,
            } if arg.as_ref().is_none_or(|v| *v == ValueExpr::Var(ev.clone())) => {
                counted = true;
                agg_over(AggFunc::Sum, ev, EDGE_COUNT.to_string())
            }
            _ => {
                return Err(NotApplicable(
                    "only group keys and edge counts survive aggregation".into(),
                ))
            }
        };
    }
    if !counted {
        return Err(NotApplicable("edge variable is not counted".into()));
    }
    Ok(out)
}

fn rewrite_edge_groups(q: &QueryGraph, label: &str, kept: &[AggSpec]) -> Result<QueryGraph, RewriteError> {
    let e = single_edge(q)?;
    if e.label.as_deref() != Some(label) {
        return Err(NotApplicable("edge label differs".into()));
    }
    let ends = [e.src.as_str(), e.dst.as_str()];
    if filter_values(q).iter().any(|v| !ends.contains(&v.var())) {
        return Err(NotApplicable("filter reads the aggregated edge".into()));
    }
    let ev = e.var.as_deref().filter(|v| q.referenced_names().contains(v));
    let mut out = q.clone();
    for item in &mut out.items {
        item.expr = match (&item.expr, ev) {
            (ReturnExpr::Value(v), _) if ends.contains(&v.var()) => continue,
            (ReturnExpr::Agg { arg: Some(v), .. }, _) if ends.contains(&v.var()) && ev.is_none() => continue,
            (
                ReturnExpr::Agg {
                    func: AggFunc::Count,
                    arg: None,
                },
                None,
            ) => continue,
            (
                ReturnExpr::Agg {
                    func: AggFunc::Count,
                    arg,
                },
                Some(ev),
            ) if arg.as_ref().is_none_or(|v| *v == ValueExpr::Var(ev.to_string())) => {
                agg_over(AggFunc::Sum, ev, EDGE_COUNT.to_string())
            }
            (
                ReturnExpr::Agg {
                    func,
                    arg: Some(ValueExpr::Prop(var, p)),
                },
                Some(ev),
            ) if var == ev && p != "id" => summary_agg(*func, ev, p, kept)?,
            _ => return Err(NotApplicable("return item does not survive edge aggregation".into())),
        };
    }
    Ok(out)
}

fn rewrite_aggregator(q: &QueryGraph, v: &ViewInstance) -> Result<RewritePlan, RewriteError> {
    let rewritten = match &v.def {
        ViewDef::VertexAggregator {
            vtype,
            group_by,
            aggregates,
        } => rewrite_vertex_groups(q, vtype, group_by, aggregates)?,
        ViewDef::SubgraphAggregator {
            vtype,
            group_by,
            aggregates,
        } => {
            if q.edges.is_empty() {
                rewrite_vertex_groups(q, vtype, group_by, aggregates)?
            } else {
                rewrite_subgraph_edges(q, vtype, group_by)?
            }
        }
        ViewDef::EdgeAggregator { label, aggregates } => rewrite_edge_groups(q, label, aggregates)?,
        _ => unreachable!(),
    };
    Ok(RewritePlan {
        view_id: v.id(),
        rewritten,
        hop_mapping: None,
        output_columns: q.column_names(),
    })
}

/// Rewrites `q` to run over the materialization of `v`. `schema` is the
/// schema of the graph `q` targets.
pub fn rewrite_with_view(q: &QueryGraph, v: &ViewInstance, schema: &GraphSchema) -> Result<RewritePlan, RewriteError> {
    let plan = match &v.def {
        ViewDef::KHop { .. }
        | ViewDef::SameVertexType { .. }
        | ViewDef::SameEdgeType { .. }
        | ViewDef::SourceToSink { .. } => rewrite_connector(q, v, schema)?,
        ViewDef::VertexInclusion { .. }
        | ViewDef::VertexRemoval { .. }
        | ViewDef::EdgeInclusion { .. }
        | ViewDef::EdgeRemoval { .. } => rewrite_sparsifier(q, v, schema)?,
        _ => rewrite_aggregator(q, v)?,
    };
    debug_assert!(plan.rewritten.validate().is_ok(), "{}", plan.rewritten);
    Ok(plan)
}

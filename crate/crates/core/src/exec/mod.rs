//! Query evaluation over an in-memory property graph.
//!
//! Matching follows relationship isomorphism: all edges bound by one match,
//! fixed edges and path edges alike, are pairwise distinct, so a
//! variable-length path binds a trail. Matches are then projected onto the
//! names the query references and deduplicated, which makes the result
//! independent of how many unreferenced bindings witness a row.

pub mod algo;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::enumerate::RewritePlan;
use crate::graph::{EdgeId, PropertyGraph, PropertyValue, VertexId};
use crate::query::{AggFunc, CmpOp, Expr, Operand, QueryError, QueryGraph, ReturnExpr, ValueExpr};

pub use algo::{
    k_hop_neighborhood, label_propagation, largest_community, path_lengths, path_lengths_by_type, Direction,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("vertex type '{0}' is not in the graph schema")]
    TypeNotInSchema(String),
    #[error("{func} over {found} value")]
    PropertyTypeMismatch { func: String, found: String },
    #[error("more than {limit} edge expansions")]
    BudgetExceeded { limit: u64 },
}

pub type Cell = Option<PropertyValue>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    /// Row-by-row equality with numeric cells compared to a relative
    /// tolerance. Rows are already in canonical order.
    pub fn approx_eq(&self, other: &ResultTable, rel_tol: f64) -> bool {
        self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.len() == b.len()
                    && a.iter().zip(b).all(|(x, y)| match (x, y) {
                        (Some(x), Some(y)) if x.is_numeric() && y.is_numeric() => {
                            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
                            (x - y).abs() <= rel_tol * x.abs().max(y.abs()).max(1.0)
                        }
                        _ => x == y,
                    })
            })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExecStats {
    pub edges_expanded: u64,
    pub vertices_touched: u64,
    /// Distinct projected matches before filtering.
    pub matches: u64,
    pub ms: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ExecOptions {
    pub max_expansions: u64,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            max_expansions: 2_000_000_000,
        }
    }
}

pub fn execute(q: &QueryGraph, g: &PropertyGraph) -> Result<(ResultTable, ExecStats), ExecError> {
    execute_with(q, g, ExecOptions::default())
}

/// Runs a rewritten query and restores the original column names.
pub fn execute_plan(plan: &RewritePlan, view: &PropertyGraph) -> Result<(ResultTable, ExecStats), ExecError> {
    let (mut table, stats) = execute(&plan.rewritten, view)?;
    table.columns = plan.output_columns.clone();
    Ok((table, stats))
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Scan(usize),
    /// Fixed edge index; `forward` when its source is already bound.
    Edge {
        idx: usize,
        forward: bool,
    },
    Path {
        forward: bool,
    },
}

struct Plan<'q> {
    names: Vec<&'q str>,
    /// Vertex type index per pattern vertex; `None` for untyped.
    types: Vec<Option<u32>>,
    /// A pattern type absent from the graph: nothing matches.
    empty: bool,
    src: Vec<usize>,
    dst: Vec<usize>,
    labels: Vec<Option<u32>>,
    path: Option<PathPlan>,
    steps: Vec<Step>,
    /// For each step, whether a fixed edge is bound after it.
    edges_later: Vec<bool>,
    /// Labels later fixed edges may carry; `None` when one is unlabeled.
    later_labels: Option<BTreeSet<u32>>,
    visible_vertices: Vec<usize>,
    visible_edges: Vec<usize>,
}

struct PathPlan {
    src: usize,
    dst: usize,
    min: u32,
    max: u32,
    /// `None` admits any label; labels missing from the graph are dropped.
    labels: Option<BTreeSet<u32>>,
}

impl<'q> Plan<'q> {
    fn new(q: &'q QueryGraph, g: &PropertyGraph) -> Result<Self, ExecError> {
        q.validate()?;
        let names: Vec<&str> = q.vertices.keys().map(String::as_str).collect();
        let slot = |n: &str| names.iter().position(|m| *m == n).unwrap();
        let mut types = Vec::new();
        for t in q.vertices.values() {
            match t {
                Some(t) if !g.schema().has_vertex_type(t) => return Err(ExecError::TypeNotInSchema(t.clone())),
                Some(t) => types.push(g.type_index(t)),
                None => types.push(None),
            }
        }
        let empty = types
            .iter()
            .zip(q.vertices.values())
            .any(|(i, t)| t.is_some() && i.is_none());
        let labels = q
            .edges
            .iter()
            .map(|e| e.label.as_ref().map(|l| g.label_index(l).unwrap_or(u32::MAX)))
            .collect();
        let path = q.path.as_ref().map(|p| PathPlan {
            src: slot(&p.src),
            dst: slot(&p.dst),
            min: p.min,
            max: p.max,
            labels: (!p.labels.is_empty()).then(|| p.labels.iter().filter_map(|l| g.label_index(l)).collect()),
        });
        let referenced = q.referenced_names();
        let mut plan = Plan {
            types,
            empty,
            src: q.edges.iter().map(|e| slot(&e.src)).collect(),
            dst: q.edges.iter().map(|e| slot(&e.dst)).collect(),
            labels,
            path,
            steps: Vec::new(),
            edges_later: Vec::new(),
            later_labels: None,
            visible_vertices: (0..names.len()).filter(|&i| referenced.contains(names[i])).collect(),
            visible_edges: (0..q.edges.len())
                .filter(|&i| q.edges[i].var.as_deref().is_some_and(|v| referenced.contains(v)))
                .collect(),
            names,
        };
        plan.order(g);
        Ok(plan)
    }

    fn candidates(&self, g: &PropertyGraph, v: usize) -> usize {
        match self.types[v] {
            Some(t) => g.vertices_of_type(g.type_name(t)).len(),
            None => g.vertex_count(),
        }
    }

    /// Greedy step order: scan the cheapest unbound vertex, then expand
    /// fixed edges before the path while anything touches a bound vertex.
    fn order(&mut self, g: &PropertyGraph) {
        let n = self.names.len();
        let mut bound = vec![false; n];
        let mut edge_done = vec![false; self.src.len()];
        let mut path_done = self.path.is_none();
        loop {
            let next_edge = (0..self.src.len()).find(|&i| !edge_done[i] && (bound[self.src[i]] || bound[self.dst[i]]));
            if let Some(i) = next_edge {
                edge_done[i] = true;
                let forward = bound[self.src[i]];
                bound[self.src[i]] = true;
                bound[self.dst[i]] = true;
                self.steps.push(Step::Edge { idx: i, forward });
                continue;
            }
            if !path_done {
                let p = self.path.as_ref().unwrap();
                if bound[p.src] || bound[p.dst] {
                    path_done = true;
                    let forward = bound[p.src];
                    bound[p.src] = true;
                    bound[p.dst] = true;
                    self.steps.push(Step::Path { forward });
                    continue;
                }
            }
            let Some(v) = (0..n)
                .filter(|&v| !bound[v])
                .min_by_key(|&v| (self.candidates(g, v), self.names[v]))
            else {
                break;
            };
            bound[v] = true;
            self.steps.push(Step::Scan(v));
        }
        self.edges_later = (0..self.steps.len())
            .map(|i| self.steps[i + 1..].iter().any(|s| matches!(s, Step::Edge { .. })))
            .collect();
        let mut later = BTreeSet::new();
        let mut any = false;
        if let Some(pos) = self.steps.iter().position(|s| matches!(s, Step::Path { .. })) {
            for s in &self.steps[pos + 1..] {
                if let Step::Edge { idx, .. } = s {
                    match self.labels[*idx] {
                        Some(l) => {
                            later.insert(l);
                        }
                        None => any = true,
                    }
                }
            }
        }
        self.later_labels = (!any).then_some(later);
    }
}

/// Mutable state of one depth-first match.
struct State {
    verts: Vec<Option<VertexId>>,
    edges: Vec<Option<EdgeId>>,
    used: Vec<EdgeId>,
    stats: ExecStats,
}

type Tuple = Vec<u32>;

struct Matcher<'a> {
    plan: &'a Plan<'a>,
    g: &'a PropertyGraph,
    limit: u64,
    spent: &'a AtomicU64,
}

impl<'a> Matcher<'a> {
    fn type_ok(&self, slot: usize, v: VertexId) -> bool {
        self.plan.types[slot].is_none_or(|t| self.g.vertex_type_index(v) == t)
    }

    fn can_bind(&self, st: &State, slot: usize, v: VertexId) -> bool {
        match st.verts[slot] {
            Some(b) => b == v,
            None => self.type_ok(slot, v),
        }
    }

    fn expand(&self, st: &mut State) -> Result<(), ExecError> {
        st.stats.edges_expanded += 1;
        if st.stats.edges_expanded.is_multiple_of(4096) {
            let total = self.spent.fetch_add(4096, AtomicOrdering::Relaxed) + 4096;
            if total > self.limit {
                return Err(ExecError::BudgetExceeded { limit: self.limit });
            }
        }
        Ok(())
    }

    fn run(&self, step: usize, st: &mut State, out: &mut Vec<Tuple>) -> Result<(), ExecError> {
        let plan = self.plan;
        let Some(&s) = plan.steps.get(step) else {
            let mut t: Tuple = plan.visible_vertices.iter().map(|&v| st.verts[v].unwrap().0).collect();
            t.extend(plan.visible_edges.iter().map(|&e| st.edges[e].unwrap().0));
            out.push(t);
            return Ok(());
        };
        match s {
            Step::Scan(v) => {
                let all: Vec<VertexId>;
                let cands: &[VertexId] = match plan.types[v] {
                    Some(t) => self.g.vertices_of_type(self.g.type_name(t)),
                    None => {
                        all = self.g.vertex_ids().collect();
                        &all
                    }
                };
                for &c in cands {
                    st.stats.vertices_touched += 1;
                    st.verts[v] = Some(c);
                    self.run(step + 1, st, out)?;
                }
                st.verts[v] = None;
            }
            Step::Edge { idx, forward } => {
                let (from, to) = if forward {
                    (plan.src[idx], plan.dst[idx])
                } else {
                    (plan.dst[idx], plan.src[idx])
                };
                let at = st.verts[from].unwrap();
                let was_bound = st.verts[to].is_some();
                let adj = if forward {
                    self.g.out_edges(at)
                } else {
                    self.g.in_edges(at)
                };
                for &e in adj {
                    self.expand(st)?;
                    if plan.labels[idx].is_some_and(|l| self.g.edge_label_index(e) != l) || st.used.contains(&e) {
                        continue;
                    }
                    let w = if forward {
                        self.g.edge_dst(e)
                    } else {
                        self.g.edge_src(e)
                    };
                    if !self.can_bind(st, to, w) {
                        continue;
                    }
                    st.stats.vertices_touched += 1;
                    st.verts[to] = Some(w);
                    st.edges[idx] = Some(e);
                    st.used.push(e);
                    self.run(step + 1, st, out)?;
                    st.used.pop();
                    if !was_bound {
                        st.verts[to] = None;
                    }
                }
                st.edges[idx] = None;
            }
            Step::Path { forward } => {
                let p = plan.path.as_ref().unwrap();
                let (from, to) = if forward { (p.src, p.dst) } else { (p.dst, p.src) };
                let start = st.verts[from].unwrap();
                let was_bound = st.verts[to].is_some();
                let keep_trails = plan.edges_later[step];
                let mut ends: BTreeMap<(VertexId, Vec<EdgeId>), Vec<EdgeId>> = BTreeMap::new();
                let mut trail = Vec::new();
                self.trails(st, p, forward, to, start, &mut trail, keep_trails, &mut ends)?;
                for ((w, _), edges) in ends {
                    st.verts[to] = Some(w);
                    let base = st.used.len();
                    st.used.extend(edges);
                    self.run(step + 1, st, out)?;
                    st.used.truncate(base);
                }
                if !was_bound {
                    st.verts[to] = None;
                }
            }
        }
        Ok(())
    }

    /// Depth-first trail enumeration. Each admissible endpoint is recorded
    /// once, or once per distinct set of edges later fixed edges could
    /// collide with when `keep_trails`.
    #[allow(clippy::too_many_arguments)]
    fn trails(
        &self,
        st: &mut State,
        p: &PathPlan,
        forward: bool,
        to: usize,
        at: VertexId,
        trail: &mut Vec<EdgeId>,
        keep_trails: bool,
        ends: &mut BTreeMap<(VertexId, Vec<EdgeId>), Vec<EdgeId>>,
    ) -> Result<(), ExecError> {
        let depth = trail.len() as u32;
        if depth >= p.min && self.can_bind(st, to, at) {
            let key = if keep_trails {
                let mut k: Vec<EdgeId> = trail
                    .iter()
                    .copied()
                    .filter(|&e| {
                        self.plan
                            .later_labels
                            .as_ref()
                            .is_none_or(|ls| ls.contains(&self.g.edge_label_index(e)))
                    })
                    .collect();
                k.sort_unstable();
                k
            } else {
                Vec::new()
            };
            ends.entry((at, key))
                .or_insert_with(|| if keep_trails { trail.clone() } else { Vec::new() });
        }
        if depth == p.max {
            return Ok(());
        }
        let adj = if forward {
            self.g.out_edges(at)
        } else {
            self.g.in_edges(at)
        };
        for &e in adj {
            self.expand(st)?;
            if p.labels
                .as_ref()
                .is_some_and(|ls| !ls.contains(&self.g.edge_label_index(e)))
                || trail.contains(&e)
                || st.used.contains(&e)
            {
                continue;
            }
            let w = if forward {
                self.g.edge_dst(e)
            } else {
                self.g.edge_src(e)
            };
            st.stats.vertices_touched += 1;
            trail.push(e);
            self.trails(st, p, forward, to, w, trail, keep_trails, ends)?;
            trail.pop();
        }
        debug_assert!(trail.iter().collect::<BTreeSet<_>>().len() == trail.len());
        Ok(())
    }
}

/// Distinct projected matches in canonical order, with match statistics.
fn matches(plan: &Plan, g: &PropertyGraph, opts: ExecOptions) -> Result<(Vec<Tuple>, ExecStats), ExecError> {
    let mut stats = ExecStats::default();
    if plan.empty {
        return Ok((Vec::new(), stats));
    }
    let Some(Step::Scan(anchor)) = plan.steps.first().copied() else {
        unreachable!("plans start with a scan");
    };
    let anchors: Vec<VertexId> = match plan.types[anchor] {
        Some(t) => g.vertices_of_type(g.type_name(t)).to_vec(),
        None => g.vertex_ids().collect(),
    };
    let spent = AtomicU64::new(0);
    let matcher = Matcher {
        plan,
        g,
        limit: opts.max_expansions,
        spent: &spent,
    };
    let per_anchor: Vec<Result<(Vec<Tuple>, ExecStats), ExecError>> = anchors
        .par_iter()
        .map(|&a| {
            let mut st = State {
                verts: vec![None; plan.names.len()],
                edges: vec![None; plan.src.len()],
                used: Vec::new(),
                stats: ExecStats::default(),
            };
            st.verts[anchor] = Some(a);
            st.stats.vertices_touched += 1;
            let mut out = Vec::new();
            matcher.run(1, &mut st, &mut out)?;
            out.sort_unstable();
            out.dedup();
            Ok((out, st.stats))
        })
        .collect();
    let mut all = Vec::new();
    for r in per_anchor {
        let (t, s) = r?;
        stats.edges_expanded += s.edges_expanded;
        stats.vertices_touched += s.vertices_touched;
        all.extend(t);
    }
    if stats.edges_expanded > opts.max_expansions {
        return Err(ExecError::BudgetExceeded {
            limit: opts.max_expansions,
        });
    }
    all.sort_unstable();
    all.dedup();
    let nv = plan.visible_vertices.len();
    let key = |t: &Tuple| -> Vec<&str> {
        t.iter()
            .enumerate()
            .map(|(i, &x)| {
                if i < nv {
                    g.vertex_key(VertexId(x))
                } else {
                    g.edge_key(EdgeId(x))
                }
            })
            .collect()
    };
    all.sort_by_cached_key(|t| key(t).into_iter().map(str::to_string).collect::<Vec<_>>());
    stats.matches = all.len() as u64;
    Ok((all, stats))
}

enum Bound {
    V(VertexId),
    E(EdgeId),
}

struct Row<'a> {
    g: &'a PropertyGraph,
    names: &'a BTreeMap<&'a str, Bound>,
}

impl Row<'_> {
    fn value(&self, v: &ValueExpr) -> Cell {
        let b = &self.names[v.var()];
        let (key, props) = match b {
            Bound::V(x) => (self.g.vertex_key(*x), self.g.vertex_props(*x)),
            Bound::E(e) => (self.g.edge_key(*e), self.g.edge_props(*e)),
        };
        match v {
            ValueExpr::Var(_) => Some(PropertyValue::Str(key.to_string())),
            ValueExpr::Prop(_, k) if k == "id" => Some(PropertyValue::Str(key.to_string())),
            ValueExpr::Prop(_, k) => props.get(k).cloned(),
        }
    }

    fn operand(&self, o: &Operand) -> Cell {
        match o {
            Operand::Value(v) => self.value(v),
            Operand::Lit(l) => Some(l.clone()),
        }
    }

    /// Three-valued: `None` when a side is missing or kinds differ.
    fn test(&self, e: &Expr) -> Option<bool> {
        match e {
            Expr::Or(a, b) => match (self.test(a), self.test(b)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
            Expr::And(a, b) => match (self.test(a), self.test(b)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Expr::Not(a) => self.test(a).map(|b| !b),
            Expr::Cmp(l, op, r) => {
                let ord = self.operand(l)?.partial_compare(&self.operand(r)?)?;
                Some(match op {
                    CmpOp::Eq => ord == Ordering::Equal,
                    CmpOp::Neq => ord != Ordering::Equal,
                    CmpOp::Lt => ord == Ordering::Less,
                    CmpOp::Le => ord != Ordering::Greater,
                    CmpOp::Gt => ord == Ordering::Greater,
                    CmpOp::Ge => ord != Ordering::Less,
                })
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Acc {
    Count(i64),
    Sum { int: i128, float: f64, is_float: bool },
    Avg { sum: f64, n: u64 },
    Min(Cell),
    Max(Cell),
}

impl Acc {
    fn new(f: AggFunc) -> Acc {
        match f {
            AggFunc::Count => Acc::Count(0),
            AggFunc::Sum => Acc::Sum {
                int: 0,
                float: 0.0,
                is_float: false,
            },
            AggFunc::Avg => Acc::Avg { sum: 0.0, n: 0 },
            AggFunc::Min => Acc::Min(None),
            AggFunc::Max => Acc::Max(None),
        }
    }

    fn push(&mut self, func: AggFunc, v: Cell) -> Result<(), ExecError> {
        let Some(v) = v else { return Ok(()) };
        if !matches!(self, Acc::Count(_)) && !v.is_numeric() {
            return Err(ExecError::PropertyTypeMismatch {
                func: func.name().to_string(),
                found: v.type_name().to_string(),
            });
        }
        match self {
            Acc::Count(n) => *n += 1,
            Acc::Sum { int, float, is_float } => {
                *float += v.as_f64().unwrap();
                match v {
                    PropertyValue::Int(i) => *int += i as i128,
                    _ => *is_float = true,
                }
            }
            Acc::Avg { sum, n } => {
                *sum += v.as_f64().unwrap();
                *n += 1;
            }
            Acc::Min(m) => {
                if m.as_ref().is_none_or(|m| v < *m) {
                    *m = Some(v);
                }
            }
            Acc::Max(m) => {
                if m.as_ref().is_none_or(|m| v > *m) {
                    *m = Some(v);
                }
            }
        }
        Ok(())
    }

    fn finish(self) -> Cell {
        match self {
            Acc::Count(n) => Some(PropertyValue::Int(n)),
            Acc::Sum { int, float, is_float } => Some(match i64::try_from(int) {
                Ok(i) if !is_float => PropertyValue::Int(i),
                _ => PropertyValue::Float(float),
            }),
            Acc::Avg { sum, n } => (n > 0).then(|| PropertyValue::Float(sum / n as f64)),
            Acc::Min(m) | Acc::Max(m) => m,
        }
    }
}

/// Folds `values` the way a RETURN aggregate would; missing values are skipped.
pub fn aggregate(func: AggFunc, values: impl IntoIterator<Item = Cell>) -> Result<Cell, ExecError> {
    let mut acc = Acc::new(func);
    for v in values {
        acc.push(func, v)?;
    }
    Ok(acc.finish())
}

/// Ascending with missing values last; descending reverses both.
fn order_cells(a: &Cell, b: &Cell) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, _) => Ordering::Greater,
        (_, None) => Ordering::Less,
        (Some(a), Some(b)) => a.cmp(b),
    }
}

pub fn execute_with(
    q: &QueryGraph,
    g: &PropertyGraph,
    opts: ExecOptions,
) -> Result<(ResultTable, ExecStats), ExecError> {
    let t0 = Instant::now();
    let plan = Plan::new(q, g)?;
    let (tuples, mut stats) = matches(&plan, g, opts)?;
    let mut bound_names: Vec<&str> = plan.visible_vertices.iter().map(|&v| plan.names[v]).collect();
    bound_names.extend(plan.visible_edges.iter().map(|&e| q.edges[e].var.as_deref().unwrap()));
    let nv = plan.visible_vertices.len();

    let mut groups: BTreeMap<Vec<Cell>, Vec<Acc>> = BTreeMap::new();
    let mut rows: Vec<Vec<Cell>> = Vec::new();
    let aggregated = q.has_aggregates();
    for t in &tuples {
        let names: BTreeMap<&str, Bound> = bound_names
            .iter()
            .zip(t)
            .enumerate()
            .map(|(i, (n, &x))| {
                (
                    *n,
                    if i < nv {
                        Bound::V(VertexId(x))
                    } else {
                        Bound::E(EdgeId(x))
                    },
                )
            })
            .collect();
        let row = Row { g, names: &names };
        if let Some(f) = &q.filter {
            if row.test(f) != Some(true) {
                continue;
            }
        }
        if !aggregated {
            rows.push(
                q.items
                    .iter()
                    .map(|i| match &i.expr {
                        ReturnExpr::Value(v) => row.value(v),
                        ReturnExpr::Agg { .. } => unreachable!(),
                    })
                    .collect(),
            );
            continue;
        }
        let key: Vec<Cell> = q
            .items
            .iter()
            .filter_map(|i| match &i.expr {
                ReturnExpr::Value(v) => Some(row.value(v)),
                ReturnExpr::Agg { .. } => None,
            })
            .collect();
        let accs = groups.entry(key).or_insert_with(|| {
            q.items
                .iter()
                .filter_map(|i| match &i.expr {
                    ReturnExpr::Agg { func, .. } => Some(Acc::new(*func)),
                    ReturnExpr::Value(_) => None,
                })
                .collect()
        });
        let mut j = 0;
        for item in &q.items {
            if let ReturnExpr::Agg { func, arg } = &item.expr {
                let v = match arg {
                    Some(a) => row.value(a),
                    None => Some(PropertyValue::Bool(true)),
                };
                accs[j].push(*func, v)?;
                j += 1;
            }
        }
    }
    if aggregated {
        let grouped = q.items.iter().any(|i| !i.expr.is_aggregate());
        if groups.is_empty() && !grouped {
            groups.insert(
                Vec::new(),
                q.items
                    .iter()
                    .filter_map(|i| match &i.expr {
                        ReturnExpr::Agg { func, .. } => Some(Acc::new(*func)),
                        ReturnExpr::Value(_) => None,
                    })
                    .collect(),
            );
        }
        for (key, accs) in groups {
            let mut key = key.into_iter();
            let mut accs = accs.into_iter();
            rows.push(
                q.items
                    .iter()
                    .map(|i| match &i.expr {
                        ReturnExpr::Value(_) => key.next().unwrap(),
                        ReturnExpr::Agg { .. } => accs.next().unwrap().finish(),
                    })
                    .collect(),
            );
        }
    }
    match q.order_by {
        Some(o) => rows.sort_by(|a, b| {
            let c = order_cells(&a[o.column], &b[o.column]);
            (if o.descending { c.reverse() } else { c }).then_with(|| a.cmp(b))
        }),
        None => rows.sort(),
    }
    if q.distinct {
        rows.dedup();
    }
    if let Some(l) = q.limit {
        rows.truncate(l as usize);
    }
    stats.ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok((
        ResultTable {
            columns: q.column_names(),
            rows,
        },
        stats,
    ))
}

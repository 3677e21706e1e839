//! Query AST for the supported subset: one MATCH clause of forward-directed
//! patterns with at most one bounded variable-length path, an optional WHERE
//! predicate, and a RETURN clause with optional aggregates, DISTINCT,
//! single-key ORDER BY and LIMIT.

mod lexer;
mod parser;
mod render;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::graph::PropertyValue;

pub use parser::parse_query;
pub use render::render_query;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("name '{0}' is not bound in the pattern")]
    UnboundName(String),
    #[error("unsupported construct: {0}")]
    UnsupportedConstruct(String),
    #[error("RETURN needs at least one item")]
    EmptyProjection,
    #[error("invalid query: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternEdge {
    pub var: Option<String>,
    pub src: String,
    pub dst: String,
    pub label: Option<String>,
}

/// `(src)-[var:L1|L2*min..max]->(dst)`; an empty label set matches any label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarLengthPath {
    pub var: Option<String>,
    pub src: String,
    pub dst: String,
    pub min: u32,
    pub max: u32,
    pub labels: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueExpr {
    /// A bound vertex or edge; evaluates to its external id.
    Var(String),
    Prop(String, String),
}

impl ValueExpr {
    pub fn var(&self) -> &str {
        match self {
            ValueExpr::Var(v) | ValueExpr::Prop(v, _) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Value(ValueExpr),
    Lit(PropertyValue),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Neq => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Or(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Cmp(Operand, CmpOp, Operand),
}

impl Expr {
    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Or(a, b) | Expr::And(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Not(a) => a.collect_vars(out),
            Expr::Cmp(l, _, r) => {
                for o in [l, r] {
                    if let Operand::Value(v) = o {
                        out.push(v.var());
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AggFunc {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl AggFunc {
    pub fn name(self) -> &'static str {
        match self {
            AggFunc::Count => "count",
            AggFunc::Sum => "sum",
            AggFunc::Avg => "avg",
            AggFunc::Min => "min",
            AggFunc::Max => "max",
        }
    }

    pub fn from_name(s: &str) -> Option<AggFunc> {
        Some(match s.to_ascii_lowercase().as_str() {
            "count" => AggFunc::Count,
            "sum" => AggFunc::Sum,
            "avg" => AggFunc::Avg,
            "min" => AggFunc::Min,
            "max" => AggFunc::Max,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReturnExpr {
    Value(ValueExpr),
    /// `arg == None` is `count(*)`.
    Agg {
        func: AggFunc,
        arg: Option<ValueExpr>,
    },
}

impl ReturnExpr {
    pub fn is_aggregate(&self) -> bool {
        matches!(self, ReturnExpr::Agg { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnItem {
    pub expr: ReturnExpr,
    pub alias: Option<String>,
}

impl ReturnItem {
    pub fn new(expr: ReturnExpr) -> Self {
        ReturnItem { expr, alias: None }
    }

    /// The result column name: the alias, or the expression text.
    pub fn column_name(&self) -> String {
        self.alias.clone().unwrap_or_else(|| render::return_expr(&self.expr))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderBy {
    /// Index into the RETURN items.
    pub column: usize,
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueryGraph {
    /// Pattern vertex name → optional type.
    pub vertices: BTreeMap<String, Option<String>>,
    pub edges: Vec<PatternEdge>,
    pub path: Option<VarLengthPath>,
    pub filter: Option<Expr>,
    pub distinct: bool,
    pub items: Vec<ReturnItem>,
    pub order_by: Option<OrderBy>,
    pub limit: Option<u64>,
}

impl QueryGraph {
    /// Check every structural invariant of a query built by hand or by a
    /// rewrite.
    pub fn validate(&self) -> Result<(), QueryError> {
        if self.items.is_empty() {
            return Err(QueryError::EmptyProjection);
        }
        let names = self.column_names();
        if names.iter().collect::<BTreeSet<_>>().len() != names.len() {
            return Err(QueryError::Invalid("duplicate result column names".into()));
        }
        if self.vertices.is_empty() {
            return Err(QueryError::Invalid("pattern has no vertices".into()));
        }
        let mut edge_vars = BTreeSet::new();
        for e in &self.edges {
            for end in [&e.src, &e.dst] {
                if !self.vertices.contains_key(end) {
                    return Err(QueryError::UnboundName(end.clone()));
                }
            }
            if let Some(v) = &e.var {
                if self.vertices.contains_key(v) || !edge_vars.insert(v.as_str()) {
                    return Err(QueryError::Invalid(format!("name '{v}' bound twice")));
                }
            }
        }
        if let Some(p) = &self.path {
            for end in [&p.src, &p.dst] {
                if !self.vertices.contains_key(end) {
                    return Err(QueryError::UnboundName(end.clone()));
                }
            }
            if p.min > p.max {
                return Err(QueryError::Invalid(format!("path bounds {}..{}", p.min, p.max)));
            }
            if let Some(v) = &p.var {
                if self.vertices.contains_key(v) || edge_vars.contains(v.as_str()) {
                    return Err(QueryError::Invalid(format!("name '{v}' bound twice")));
                }
            }
        }
        for name in self.referenced_names() {
            if self.path.as_ref().and_then(|p| p.var.as_deref()) == Some(name) {
                return Err(QueryError::UnsupportedConstruct(format!(
                    "reference to path variable '{name}'"
                )));
            }
            if !self.vertices.contains_key(name) && !edge_vars.contains(name) {
                return Err(QueryError::UnboundName(name.to_string()));
            }
        }
        if let Some(o) = self.order_by {
            if o.column >= self.items.len() {
                return Err(QueryError::Invalid("ORDER BY column out of range".into()));
            }
        }
        if self.limit == Some(0) {
            return Err(QueryError::Invalid("LIMIT must be positive".into()));
        }
        Ok(())
    }

    /// Names referenced from WHERE and RETURN, deduplicated and sorted.
    pub fn referenced_names(&self) -> BTreeSet<&str> {
        let mut out = Vec::new();
        if let Some(f) = &self.filter {
            f.collect_vars(&mut out);
        }
        for item in &self.items {
            match &item.expr {
                ReturnExpr::Value(v) => out.push(v.var()),
                ReturnExpr::Agg { arg: Some(v), .. } => out.push(v.var()),
                ReturnExpr::Agg { arg: None, .. } => {}
            }
        }
        out.into_iter().collect()
    }

    pub fn has_aggregates(&self) -> bool {
        self.items.iter().any(|i| i.expr.is_aggregate())
    }

    pub fn column_names(&self) -> Vec<String> {
        self.items.iter().map(ReturnItem::column_name).collect()
    }

    pub fn vertex_type(&self, name: &str) -> Option<&str> {
        self.vertices.get(name).and_then(|t| t.as_deref())
    }

    /// Fixed edges incident to `name` as (outgoing, incoming) indices.
    pub fn incident_edges(&self, name: &str) -> (Vec<usize>, Vec<usize>) {
        let out = (0..self.edges.len()).filter(|&i| self.edges[i].src == name).collect();
        let inc = (0..self.edges.len()).filter(|&i| self.edges[i].dst == name).collect();
        (out, inc)
    }

    /// Edge variable names bound by fixed edges.
    pub fn edge_vars(&self) -> BTreeSet<&str> {
        self.edges.iter().filter_map(|e| e.var.as_deref()).collect()
    }
}

impl fmt::Display for QueryGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_query(self))
    }
}

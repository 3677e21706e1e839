use std::collections::BTreeSet;
use std::fmt::Write;

use super::{Expr, Operand, QueryGraph, ReturnExpr, ValueExpr};
use crate::graph::PropertyValue;

pub(crate) fn value_expr(v: &ValueExpr) -> String {
    match v {
        ValueExpr::Var(n) => n.clone(),
        ValueExpr::Prop(n, k) => format!("{n}.{k}"),
    }
}

pub(crate) fn return_expr(e: &ReturnExpr) -> String {
    match e {
        ReturnExpr::Value(v) => value_expr(v),
        ReturnExpr::Agg { func, arg } => match arg {
            Some(a) => format!("{}({})", func.name(), value_expr(a)),
            None => format!("{}(*)", func.name()),
        },
    }
}

pub(crate) fn literal(v: &PropertyValue) -> String {
    match v {
        PropertyValue::Str(s) => {
            let mut out = String::from("'");
            for c in s.chars() {
                match c {
                    '\'' => out.push_str("\\'"),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('\'');
            out
        }
        other => other.to_string(),
    }
}

fn operand(o: &Operand) -> String {
    match o {
        Operand::Value(v) => value_expr(v),
        Operand::Lit(l) => literal(l),
    }
}

// Binding strength: OR < AND < NOT < comparison.
fn level(e: &Expr) -> u8 {
    match e {
        Expr::Or(..) => 0,
        Expr::And(..) => 1,
        Expr::Not(..) => 2,
        Expr::Cmp(..) => 3,
    }
}

fn expr_at(e: &Expr, min_level: u8) -> String {
    let s = match e {
        Expr::Or(a, b) => format!("{} OR {}", expr_at(a, 0), expr_at(b, 1)),
        Expr::And(a, b) => format!("{} AND {}", expr_at(a, 1), expr_at(b, 2)),
        Expr::Not(a) => format!("NOT {}", expr_at(a, 2)),
        Expr::Cmp(l, op, r) => format!("{} {} {}", operand(l), op.symbol(), operand(r)),
    };
    if level(e) < min_level {
        format!("({s})")
    } else {
        s
    }
}

pub(crate) fn expr(e: &Expr) -> String {
    expr_at(e, 0)
}

/// Render a query as text that parses back to an equal AST.
pub fn render_query(q: &QueryGraph) -> String {
    let mut typed = BTreeSet::new();
    let mut vertex = |name: &str| -> String {
        match q.vertex_type(name) {
            Some(t) if typed.insert(name.to_string()) => format!("({name}:{t})"),
            _ => format!("({name})"),
        }
    };
    let mut parts = Vec::new();
    let mut seen = BTreeSet::new();
    for e in &q.edges {
        let mut inner = e.var.clone().unwrap_or_default();
        if let Some(l) = &e.label {
            write!(inner, ":{l}").unwrap();
        }
        parts.push(format!("{}-[{inner}]->{}", vertex(&e.src), vertex(&e.dst)));
        seen.insert(e.src.as_str());
        seen.insert(e.dst.as_str());
    }
    if let Some(p) = &q.path {
        let mut inner = p.var.clone().unwrap_or_default();
        if !p.labels.is_empty() {
            inner.push(':');
            inner.push_str(&p.labels.iter().cloned().collect::<Vec<_>>().join("|"));
        }
        write!(inner, "*{}..{}", p.min, p.max).unwrap();
        parts.push(format!("{}-[{inner}]->{}", vertex(&p.src), vertex(&p.dst)));
        seen.insert(p.src.as_str());
        seen.insert(p.dst.as_str());
    }
    for name in q.vertices.keys() {
        if !seen.contains(name.as_str()) {
            parts.push(vertex(name));
        }
    }

    let mut out = format!("MATCH {}", parts.join(", "));
    if let Some(f) = &q.filter {
        write!(out, " WHERE {}", expr(f)).unwrap();
    }
    out.push_str(" RETURN ");
    if q.distinct {
        out.push_str("DISTINCT ");
    }
    let items: Vec<String> = q
        .items
        .iter()
        .map(|i| match &i.alias {
            Some(a) => format!("{} AS {a}", return_expr(&i.expr)),
            None => return_expr(&i.expr),
        })
        .collect();
    out.push_str(&items.join(", "));
    if let Some(o) = q.order_by {
        write!(
            out,
            " ORDER BY {}{}",
            q.items[o.column].column_name(),
            if o.descending { " DESC" } else { "" }
        )
        .unwrap();
    }
    if let Some(n) = q.limit {
        write!(out, " LIMIT {n}").unwrap();
    }
    out
}

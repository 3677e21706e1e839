use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{tokenize, Tok, Token};
use super::{
    AggFunc, CmpOp, Expr, Operand, OrderBy, PatternEdge, QueryError, QueryGraph, ReturnExpr, ReturnItem, ValueExpr,
    VarLengthPath,
};
use crate::graph::PropertyValue;

const RESERVED: &[&str] = &[
    "MATCH", "WHERE", "RETURN", "ORDER", "BY", "ASC", "DESC", "LIMIT", "AND", "OR", "NOT", "AS", "DISTINCT", "TRUE",
    "FALSE",
];

const UNSUPPORTED: &[&str] = &[
    "OPTIONAL",
    "WITH",
    "CREATE",
    "MERGE",
    "DELETE",
    "DETACH",
    "SET",
    "REMOVE",
    "UNWIND",
    "CALL",
    "UNION",
    "SKIP",
    "NULL",
    "XOR",
    "IS",
    "IN",
    "STARTS",
    "ENDS",
    "CONTAINS",
    "EXISTS",
    "CASE",
    "ASCENDING",
    "DESCENDING",
    "YIELD",
    "FOREACH",
    "LOAD",
];

/// Parse query text into a validated [`QueryGraph`].
pub fn parse_query(text: &str) -> Result<QueryGraph, QueryError> {
    let tokens = tokenize(text)?;
    let taken: BTreeSet<String> = tokens
        .iter()
        .filter_map(|t| match &t.tok {
            Tok::Ident(s) => Some(s.clone()),
            _ => None,
        })
        .collect();
    let mut p = Parser {
        toks: tokens,
        i: 0,
        taken,
        next_anon: 0,
        q: QueryGraph::default(),
        bound_edge_vars: BTreeSet::new(),
    };
    p.query()?;
    p.q.validate()?;
    Ok(p.q)
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    /// Every identifier in the text; generated names avoid these.
    taken: BTreeSet<String>,
    next_anon: usize,
    q: QueryGraph,
    bound_edge_vars: BTreeSet<String>,
}

fn syntax(pos: usize, message: impl Into<String>) -> QueryError {
    QueryError::Syntax {
        pos,
        message: message.into(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, off: usize) -> &Tok {
        &self.toks[(self.i + off).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> usize {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), QueryError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected {what}")))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), QueryError> {
        self.check_unsupported()?;
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected {kw}")))
        }
    }

    fn check_unsupported(&self) -> Result<(), QueryError> {
        match self.peek() {
            Tok::Ident(s) if UNSUPPORTED.iter().any(|k| s.eq_ignore_ascii_case(k)) => {
                Err(QueryError::UnsupportedConstruct(s.to_ascii_uppercase()))
            }
            Tok::LeftArrow => Err(QueryError::UnsupportedConstruct("right-to-left edge '<-'".into())),
            Tok::LBrace => Err(QueryError::UnsupportedConstruct("inline property map".into())),
            _ => Ok(()),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, QueryError> {
        self.check_unsupported()?;
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.iter().any(|k| s.eq_ignore_ascii_case(k)) => {
                self.bump();
                Ok(s)
            }
            _ => Err(syntax(self.pos(), format!("expected {what}"))),
        }
    }

    fn fresh_name(&mut self) -> String {
        loop {
            let name = format!("_{}", self.next_anon);
            self.next_anon += 1;
            if !self.taken.contains(&name) {
                return name;
            }
        }
    }

    fn query(&mut self) -> Result<(), QueryError> {
        self.expect_kw("MATCH")?;
        self.pattern()?;
        while *self.peek() == Tok::Comma {
            self.bump();
            self.pattern()?;
        }
        if self.is_kw("MATCH") {
            return Err(QueryError::UnsupportedConstruct("multiple MATCH clauses".into()));
        }
        self.check_unsupported()?;
        if self.eat_kw("WHERE") {
            self.q.filter = Some(self.or_expr()?);
        }
        self.expect_kw("RETURN")?;
        self.returns()?;
        self.check_unsupported()?;
        if self.eat_kw("ORDER") {
            self.expect_kw("BY")?;
            self.order_by()?;
        }
        self.check_unsupported()?;
        if self.eat_kw("LIMIT") {
            let pos = self.pos();
            match self.bump() {
                Tok::Int(n) if n > 0 => self.q.limit = Some(n as u64),
                _ => return Err(syntax(pos, "LIMIT needs a positive integer")),
            }
        }
        self.check_unsupported()?;
        if *self.peek() != Tok::Eof {
            return Err(syntax(self.pos(), "unexpected trailing input"));
        }
        Ok(())
    }

    fn pattern(&mut self) -> Result<(), QueryError> {
        let mut left = self.node()?;
        loop {
            match self.peek() {
                Tok::Dash => {}
                Tok::LeftArrow => return Err(QueryError::UnsupportedConstruct("right-to-left edge '<-'".into())),
                _ => return Ok(()),
            }
            self.bump();
            let rel_pos = self.pos();
            let rel = self.relationship()?;
            match self.peek() {
                Tok::Arrow => {
                    self.bump();
                }
                Tok::Dash => return Err(QueryError::UnsupportedConstruct("undirected edge".into())),
                _ => return Err(syntax(self.pos(), "expected '->'")),
            }
            let right = self.node()?;
            match rel {
                Rel::Fixed { var, label } => self.q.edges.push(PatternEdge {
                    var,
                    src: left.clone(),
                    dst: right.clone(),
                    label,
                }),
                Rel::Path { var, labels, min, max } => {
                    if self.q.path.is_some() {
                        return Err(QueryError::UnsupportedConstruct(
                            "more than one variable-length path".into(),
                        ));
                    }
                    if min > max {
                        return Err(syntax(rel_pos, format!("path bounds {min}..{max} have lower > upper")));
                    }
                    self.q.path = Some(VarLengthPath {
                        var,
                        src: left.clone(),
                        dst: right.clone(),
                        min,
                        max,
                        labels,
                    });
                }
            }
            left = right;
        }
    }

    fn node(&mut self) -> Result<String, QueryError> {
        self.check_unsupported()?;
        self.expect(Tok::LParen, "'('")?;
        let name = match self.peek() {
            Tok::Ident(_) => self.ident("vertex name")?,
            _ => self.fresh_name(),
        };
        let mut vtype = None;
        if *self.peek() == Tok::Colon {
            self.bump();
            vtype = Some(self.ident("vertex type")?);
            if *self.peek() == Tok::Colon {
                return Err(QueryError::UnsupportedConstruct("multiple vertex labels".into()));
            }
        }
        self.check_unsupported()?;
        let pos = self.pos();
        self.expect(Tok::RParen, "')'")?;
        if self.bound_edge_vars.contains(&name) {
            return Err(syntax(pos, format!("'{name}' is already bound to an edge")));
        }
        let slot = self.q.vertices.entry(name.clone()).or_insert(None);
        match (slot.as_ref(), vtype) {
            (Some(old), Some(new)) if *old != new => {
                return Err(syntax(pos, format!("'{name}' has conflicting types {old} and {new}")))
            }
            (None, Some(new)) => *slot = Some(new),
            _ => {}
        }
        Ok(name)
    }

    fn relationship(&mut self) -> Result<Rel, QueryError> {
        self.expect(Tok::LBracket, "'['")?;
        let var_pos = self.pos();
        let var = match self.peek() {
            Tok::Ident(_) => Some(self.ident("edge variable")?),
            _ => None,
        };
        if let Some(v) = &var {
            if self.q.vertices.contains_key(v) || !self.bound_edge_vars.insert(v.clone()) {
                return Err(syntax(var_pos, format!("'{v}' is already bound")));
            }
        }
        let mut labels = Vec::new();
        if *self.peek() == Tok::Colon {
            self.bump();
            labels.push(self.ident("edge label")?);
            while *self.peek() == Tok::Pipe {
                self.bump();
                if *self.peek() == Tok::Colon {
                    self.bump();
                }
                labels.push(self.ident("edge label")?);
            }
        }
        self.check_unsupported()?;
        let rel = if *self.peek() == Tok::Star {
            let star = self.pos();
            self.bump();
            let (min, max) = self.bounds(star)?;
            Rel::Path {
                var,
                labels: labels.into_iter().collect(),
                min,
                max,
            }
        } else {
            if labels.len() > 1 {
                return Err(QueryError::UnsupportedConstruct(
                    "label alternatives on a fixed-length edge".into(),
                ));
            }
            Rel::Fixed {
                var,
                label: labels.pop(),
            }
        };
        self.check_unsupported()?;
        self.expect(Tok::RBracket, "']'")?;
        Ok(rel)
    }

    fn bound(&mut self) -> Result<u32, QueryError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) if (0..=u32::MAX as i64).contains(&n) => Ok(n as u32),
            _ => Err(syntax(pos, "expected a hop count")),
        }
    }

    fn bounds(&mut self, star: usize) -> Result<(u32, u32), QueryError> {
        match self.peek() {
            Tok::Int(_) => {
                let lo = self.bound()?;
                if *self.peek() != Tok::DotDot {
                    return Ok((lo, lo));
                }
                self.bump();
                match self.peek() {
                    Tok::Int(_) => Ok((lo, self.bound()?)),
                    _ => Err(QueryError::UnsupportedConstruct(
                        "unbounded variable-length path".into(),
                    )),
                }
            }
            Tok::DotDot => {
                self.bump();
                match self.peek() {
                    Tok::Int(_) => Ok((1, self.bound()?)),
                    _ => Err(syntax(star, "expected an upper hop bound")),
                }
            }
            _ => Err(QueryError::UnsupportedConstruct(
                "unbounded variable-length path".into(),
            )),
        }
    }

    fn or_expr(&mut self) -> Result<Expr, QueryError> {
        let mut e = self.and_expr()?;
        while self.eat_kw("OR") {
            e = Expr::Or(Box::new(e), Box::new(self.and_expr()?));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr, QueryError> {
        let mut e = self.not_expr()?;
        while self.eat_kw("AND") {
            e = Expr::And(Box::new(e), Box::new(self.not_expr()?));
        }
        Ok(e)
    }

    fn not_expr(&mut self) -> Result<Expr, QueryError> {
        if self.eat_kw("NOT") {
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let e = self.or_expr()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(e);
        }
        let l = self.operand()?;
        let pos = self.pos();
        let op = match self.bump() {
            Tok::Eq => CmpOp::Eq,
            Tok::Neq => CmpOp::Neq,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => {
                self.i -= 1;
                self.check_unsupported()?;
                return Err(syntax(pos, "expected a comparison operator"));
            }
        };
        let r = self.operand()?;
        Ok(Expr::Cmp(l, op, r))
    }

    fn operand(&mut self) -> Result<Operand, QueryError> {
        let pos = self.pos();
        let lit = match self.peek().clone() {
            Tok::Int(n) => PropertyValue::Int(n),
            Tok::Float(x) => PropertyValue::Float(x),
            Tok::Str(s) => PropertyValue::Str(s),
            Tok::Dash => {
                self.bump();
                return match self.bump() {
                    Tok::Int(n) => Ok(Operand::Lit(PropertyValue::Int(-n))),
                    Tok::Float(x) => Ok(Operand::Lit(PropertyValue::Float(-x))),
                    _ => Err(syntax(pos, "expected a number after '-'")),
                };
            }
            Tok::Ident(s) if s.eq_ignore_ascii_case("true") => PropertyValue::Bool(true),
            Tok::Ident(s) if s.eq_ignore_ascii_case("false") => PropertyValue::Bool(false),
            Tok::Ident(_) => {
                if *self.peek_at(1) == Tok::LParen {
                    let Tok::Ident(f) = self.bump() else { unreachable!() };
                    return Err(QueryError::UnsupportedConstruct(format!(
                        "function call '{f}' in WHERE"
                    )));
                }
                return Ok(Operand::Value(self.value_expr()?));
            }
            _ => {
                self.check_unsupported()?;
                return Err(syntax(pos, "expected a property, variable or literal"));
            }
        };
        self.bump();
        Ok(Operand::Lit(lit))
    }

    fn value_expr(&mut self) -> Result<ValueExpr, QueryError> {
        let var = self.ident("variable")?;
        if *self.peek() == Tok::Dot {
            self.bump();
            let key = match self.bump() {
                Tok::Ident(k) => k,
                _ => return Err(syntax(self.pos(), "expected a property key")),
            };
            if *self.peek() == Tok::Dot {
                return Err(QueryError::UnsupportedConstruct("nested property access".into()));
            }
            Ok(ValueExpr::Prop(var, key))
        } else {
            Ok(ValueExpr::Var(var))
        }
    }

    fn return_expr(&mut self) -> Result<ReturnExpr, QueryError> {
        self.check_unsupported()?;
        if let (Tok::Ident(name), Tok::LParen) = (self.peek().clone(), self.peek_at(1).clone()) {
            let pos = self.pos();
            let Some(func) = AggFunc::from_name(&name) else {
                return Err(QueryError::UnsupportedConstruct(format!("function '{name}'")));
            };
            self.bump();
            self.bump();
            if self.is_kw("DISTINCT") {
                return Err(QueryError::UnsupportedConstruct("DISTINCT inside an aggregate".into()));
            }
            let arg = if *self.peek() == Tok::Star {
                if func != AggFunc::Count {
                    return Err(syntax(pos, format!("{}(*) is not defined", func.name())));
                }
                self.bump();
                None
            } else {
                Some(self.value_expr()?)
            };
            self.expect(Tok::RParen, "')'")?;
            return Ok(ReturnExpr::Agg { func, arg });
        }
        Ok(ReturnExpr::Value(self.value_expr()?))
    }

    fn returns(&mut self) -> Result<(), QueryError> {
        if self.eat_kw("DISTINCT") {
            self.q.distinct = true;
        }
        if *self.peek() == Tok::Star {
            return Err(QueryError::UnsupportedConstruct("RETURN *".into()));
        }
        loop {
            let expr = self.return_expr()?;
            let alias = if self.eat_kw("AS") {
                Some(self.ident("alias")?)
            } else {
                None
            };
            self.q.items.push(ReturnItem { expr, alias });
            if *self.peek() != Tok::Comma {
                break;
            }
            self.bump();
        }
        let mut names = BTreeMap::new();
        for (i, item) in self.q.items.iter().enumerate() {
            if names.insert(item.column_name(), i).is_some() {
                return Err(syntax(
                    self.pos(),
                    format!("duplicate result column '{}'", item.column_name()),
                ));
            }
        }
        Ok(())
    }

    fn order_by(&mut self) -> Result<(), QueryError> {
        let key = super::render::return_expr(&self.return_expr()?);
        let column = self
            .q
            .items
            .iter()
            .position(|it| it.column_name() == key)
            .ok_or_else(|| QueryError::UnsupportedConstruct(format!("ORDER BY '{key}' is not a returned column")))?;
        let descending = if self.eat_kw("DESC") {
            true
        } else {
            self.eat_kw("ASC");
            false
        };
        if *self.peek() == Tok::Comma {
            return Err(QueryError::UnsupportedConstruct("multiple ORDER BY keys".into()));
        }
        self.q.order_by = Some(OrderBy { column, descending });
        Ok(())
    }
}

enum Rel {
    Fixed {
        var: Option<String>,
        label: Option<String>,
    },
    Path {
        var: Option<String>,
        labels: BTreeSet<String>,
        min: u32,
        max: u32,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::render_query;

    const LISTING1: &str = "MATCH (q_j1:Job)-[:WRITES_TO]->(q_f1:File), (q_f1)-[r*0..8]->(q_f2:File), \
        (q_f2)-[:IS_READ_BY]->(q_j2:Job) RETURN q_j1.id, avg(q_j2.cpu_hours)";

    #[test]
    fn blast_radius_shape() {
        let q = parse_query(LISTING1).unwrap();
        assert_eq!(q.vertices.len(), 4);
        assert_eq!(q.edges.len(), 2);
        let p = q.path.as_ref().unwrap();
        assert_eq!((p.src.as_str(), p.dst.as_str(), p.min, p.max), ("q_f1", "q_f2", 0, 8));
        assert_eq!(q.items.len(), 2);
        assert!(q.items[1].expr.is_aggregate());
    }

    #[test]
    fn vertex_count() {
        let q = parse_query("MATCH (a:Job) RETURN count(a)").unwrap();
        assert_eq!(q.vertices.len(), 1);
        assert!(q.edges.is_empty() && q.path.is_none());
        assert_eq!(
            q.items[0].expr,
            ReturnExpr::Agg {
                func: AggFunc::Count,
                arg: Some(ValueExpr::Var("a".into()))
            }
        );
    }

    #[test]
    fn inverted_bounds_are_syntax_errors() {
        let err = parse_query("MATCH (a)-[*2..1]->(b) RETURN a").unwrap_err();
        assert!(matches!(err, QueryError::Syntax { pos: 10, .. }), "{err:?}");
    }

    #[test]
    fn bounds_forms() {
        let b = |s: &str| {
            let q = parse_query(&format!("MATCH (a)-[{s}]->(b) RETURN a")).unwrap();
            let p = q.path.unwrap();
            (p.min, p.max)
        };
        assert_eq!(b("*3"), (3, 3));
        assert_eq!(b("*..4"), (1, 4));
        assert_eq!(b("r:A|B*0..2"), (0, 2));
        for bad in ["*", "*2.."] {
            let err = parse_query(&format!("MATCH (a)-[{bad}]->(b) RETURN a")).unwrap_err();
            assert!(matches!(err, QueryError::UnsupportedConstruct(_)), "{bad}");
        }
    }

    #[test]
    fn rejects_unsupported_and_unbound() {
        for (q, want_unsupported) in [
            ("OPTIONAL MATCH (a) RETURN a", true),
            ("MATCH (a)<-[:L]-(b) RETURN a", true),
            ("MATCH (a) WITH a RETURN a", true),
            ("MATCH (a)-[p*1..2]->(b) RETURN p", true),
            ("MATCH (a)-[*1..2]->(b), (b)-[*1..2]->(c) RETURN a", true),
            ("MATCH (a) RETURN a ORDER BY b", true),
            ("MATCH (a {x: 1}) RETURN a", true),
            ("MATCH (a) RETURN b", false),
            ("MATCH (a) WHERE z.k = 1 RETURN a", false),
        ] {
            let err = parse_query(q).unwrap_err();
            match err {
                QueryError::UnsupportedConstruct(_) => assert!(want_unsupported, "{q}"),
                QueryError::UnboundName(_) => assert!(!want_unsupported, "{q}"),
                other => panic!("{q}: {other:?}"),
            }
        }
    }

    #[test]
    fn anonymous_vertices_avoid_user_names() {
        let q = parse_query("MATCH (_0)-[r]->() RETURN count(r)").unwrap();
        assert!(q.vertices.contains_key("_0") && q.vertices.contains_key("_1"));
        assert_eq!(parse_query(&render_query(&q)).unwrap(), q);
    }

    #[test]
    fn round_trips() {
        for s in [
            LISTING1,
            "MATCH (a:Job) RETURN count(a)",
            "MATCH (a:Job)-[e:WRITES_TO]->(f:File) WHERE NOT (e.ts > -3 OR f.name = 'x\\'y') AND a.cpu_hours <= 2.5 \
             RETURN DISTINCT a.id AS job, sum(f.bytes) ORDER BY job DESC LIMIT 10",
            "MATCH (a)-[:A|B*0..4]->(b), (c:T) WHERE a.x = 1 OR b.y = 2 OR c.z <> true RETURN a, b, c",
        ] {
            let q = parse_query(s).unwrap();
            let again = parse_query(&render_query(&q)).unwrap();
            assert_eq!(again, q, "{}", render_query(&q));
        }
    }

    #[test]
    fn renders_zero_lower_bound() {
        let q = parse_query("MATCH (a)-[*0..4]->(b) RETURN a").unwrap();
        assert!(render_query(&q).contains("[*0..4]"));
    }
}

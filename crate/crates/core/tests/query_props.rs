use std::collections::BTreeSet;

use graph_views::graph::PropertyValue;
use graph_views::query::{
    parse_query, render_query, AggFunc, CmpOp, Expr, Operand, OrderBy, PatternEdge, QueryError, QueryGraph, ReturnExpr,
    ReturnItem, ValueExpr, VarLengthPath,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NAMES: &[&str] = &["a", "b", "c", "q_j1", "_0", "x9"];
const TYPES: &[&str] = &["Job", "File", "Task"];
const LABELS: &[&str] = &["WRITES_TO", "IS_READ_BY", "L"];
const KEYS: &[&str] = &["id", "cpu_hours", "name", "ts", "order"];

fn value_expr(rng: &mut ChaCha8Rng, names: &[String]) -> ValueExpr {
    let v = names.choose(rng).unwrap().clone();
    if rng.gen_bool(0.7) {
        ValueExpr::Prop(v, KEYS.choose(rng).unwrap().to_string())
    } else {
        ValueExpr::Var(v)
    }
}

fn literal(rng: &mut ChaCha8Rng) -> PropertyValue {
    match rng.gen_range(0..4) {
        0 => PropertyValue::Int(rng.gen_range(-1000..1000)),
        1 => PropertyValue::Float(rng.gen_range(-1e6..1e6)),
        2 => PropertyValue::Bool(rng.gen()),
        _ => {
            let pool = ['a', 'Z', ' ', '\'', '"', '\\', '\n', 'é', '7'];
            PropertyValue::Str((0..rng.gen_range(0..6)).map(|_| *pool.choose(rng).unwrap()).collect())
        }
    }
}

fn expr(rng: &mut ChaCha8Rng, names: &[String], depth: u32) -> Expr {
    let pick = if depth == 0 { 3 } else { rng.gen_range(0..4) };
    match pick {
        0 => Expr::Or(
            Box::new(expr(rng, names, depth - 1)),
            Box::new(expr(rng, names, depth - 1)),
        ),
        1 => Expr::And(
            Box::new(expr(rng, names, depth - 1)),
            Box::new(expr(rng, names, depth - 1)),
        ),
        2 => Expr::Not(Box::new(expr(rng, names, depth - 1))),
        _ => {
            let ops = [CmpOp::Eq, CmpOp::Neq, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
            let l = Operand::Value(value_expr(rng, names));
            let r = if rng.gen_bool(0.8) {
                Operand::Lit(literal(rng))
            } else {
                Operand::Value(value_expr(rng, names))
            };
            Expr::Cmp(l, *ops.choose(rng).unwrap(), r)
        }
    }
}

fn random_query(seed: u64) -> QueryGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = QueryGraph::default();
    let nv = rng.gen_range(1..=NAMES.len());
    let verts: Vec<String> = NAMES[..nv].iter().map(|s| s.to_string()).collect();
    for v in &verts {
        let t = rng.gen_bool(0.7).then(|| TYPES.choose(&mut rng).unwrap().to_string());
        q.vertices.insert(v.clone(), t);
    }
    let mut bindable = verts.clone();
    for i in 0..rng.gen_range(0..4) {
        let var = rng.gen_bool(0.4).then(|| format!("e{i}"));
        if let Some(v) = &var {
            bindable.push(v.clone());
        }
        q.edges.push(PatternEdge {
            var,
            src: verts.choose(&mut rng).unwrap().clone(),
            dst: verts.choose(&mut rng).unwrap().clone(),
            label: rng.gen_bool(0.7).then(|| LABELS.choose(&mut rng).unwrap().to_string()),
        });
    }
    if rng.gen_bool(0.5) {
        let min = rng.gen_range(0..4);
        let labels: BTreeSet<String> = LABELS
            .iter()
            .filter(|_| rng.gen_bool(0.3))
            .map(|s| s.to_string())
            .collect();
        q.path = Some(VarLengthPath {
            var: rng.gen_bool(0.3).then(|| "p".to_string()),
            src: verts.choose(&mut rng).unwrap().clone(),
            dst: verts.choose(&mut rng).unwrap().clone(),
            min,
            max: min + rng.gen_range(0..5),
            labels,
        });
    }
    if rng.gen_bool(0.6) {
        q.filter = Some(expr(&mut rng, &bindable, 3));
    }
    q.distinct = rng.gen_bool(0.2);
    for i in 0..rng.gen_range(1..4) {
        let e = if rng.gen_bool(0.4) {
            let funcs = [AggFunc::Count, AggFunc::Sum, AggFunc::Avg, AggFunc::Min, AggFunc::Max];
            let func = *funcs.choose(&mut rng).unwrap();
            let arg = if func == AggFunc::Count && rng.gen_bool(0.3) {
                None
            } else {
                Some(value_expr(&mut rng, &bindable))
            };
            ReturnExpr::Agg { func, arg }
        } else {
            ReturnExpr::Value(value_expr(&mut rng, &bindable))
        };
        let mut item = ReturnItem::new(e);
        if rng.gen_bool(0.3) {
            item.alias = Some(format!("col{i}"));
        }
        q.items.push(item);
    }
    if rng.gen_bool(0.4) {
        q.order_by = Some(OrderBy {
            column: rng.gen_range(0..q.items.len()),
            descending: rng.gen(),
        });
    }
    if rng.gen_bool(0.3) {
        q.limit = Some(rng.gen_range(1..100));
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn render_parse_round_trip(seed in any::<u64>()) {
        let q = random_query(seed);
        prop_assume!(q.validate().is_ok());
        let text = render_query(&q);
        let back = parse_query(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(&back, &q, "{}", text);
        prop_assert_eq!(render_query(&back), text);
    }

    #[test]
    fn unbound_names_are_rejected(seed in any::<u64>(), in_filter in any::<bool>()) {
        let mut q = random_query(seed);
        prop_assume!(q.validate().is_ok());
        let ghost = ValueExpr::Prop("ghost".into(), "k".into());
        if in_filter {
            let cmp = Expr::Cmp(Operand::Value(ghost), CmpOp::Eq, Operand::Lit(PropertyValue::Int(1)));
            q.filter = Some(match q.filter.take() {
                Some(f) => Expr::And(Box::new(f), Box::new(cmp)),
                None => cmp,
            });
        } else {
            q.items.push(ReturnItem::new(ReturnExpr::Value(ghost)));
        }
        let text = render_query(&q);
        prop_assert_eq!(parse_query(&text), Err(QueryError::UnboundName("ghost".into())));
    }
}

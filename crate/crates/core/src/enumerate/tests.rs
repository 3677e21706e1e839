use super::*;
use crate::constraints::mine_constraints;
use crate::graph::{EdgeTriple, GraphSchema};
use crate::query::parse_query;
use crate::views::ViewKind;

const LISTING1: &str = "MATCH (q_j1:Job)-[:WRITES_TO]->(q_f1:File), (q_f1)-[r*0..8]->(q_f2:File), \
    (q_f2)-[:IS_READ_BY]->(q_j2:Job) RETURN q_j1.id, avg(q_j2.cpu_hours)";

fn instances(text: &str, schema: &GraphSchema) -> (QueryGraph, Vec<ViewInstance>) {
    let q = parse_query(text).unwrap();
    let cs = mine_constraints(&q, schema, 10);
    let (views, stats) = enumerate_views(&q, &cs, &ViewKind::ALL, "t");
    assert_eq!(stats.instances, views.len());
    (q, views)
}

fn khop(views: &[ViewInstance]) -> Vec<String> {
    views
        .iter()
        .filter(|v| v.def.kind() == ViewKind::KHopConnector)
        .map(|v| v.to_string())
        .collect()
}

fn provenance_schema() -> GraphSchema {
    GraphSchema::new(
        ["Job", "File", "Task", "Machine"],
        [
            EdgeTriple::new("Job", "File", "WRITES_TO"),
            EdgeTriple::new("File", "Job", "IS_READ_BY"),
            EdgeTriple::new("Job", "Task", "HAS_TASK"),
            EdgeTriple::new("Task", "Machine", "RUNS_ON"),
            EdgeTriple::new("Task", "Task", "TRANSFERS_TO"),
        ],
    )
    .unwrap()
}

#[test]
fn listing_one_unification() {
    let (_, views) = instances(LISTING1, &GraphSchema::lineage());
    let want: Vec<String> = [2, 4, 6, 8, 10]
        .iter()
        .map(|k| format!("(X='q_j1', Y='q_j2', XTYPE='Job', YTYPE='Job', K={k})"))
        .collect();
    assert_eq!(khop(&views), want);
    assert!(views.iter().any(|v| v.def
        == ViewDef::VertexInclusion {
            types: BTreeSet::from(["Job".into(), "File".into()])
        }));
}

#[test]
fn only_two_hops_rewrite_listing_one() {
    let s = GraphSchema::lineage();
    let (q, views) = instances(LISTING1, &s);
    for v in views.iter().filter(|v| v.def.kind() == ViewKind::KHopConnector) {
        let res = rewrite_with_view(&q, v, &s);
        if v.def == ViewDef::khop("Job", "Job", 2) {
            let plan = res.unwrap();
            assert_eq!(
                plan.rewritten.to_string(),
                "MATCH (q_j1:Job)-[r:JOB_TO_JOB_2HOP*1..5]->(q_j2:Job) RETURN q_j1.id, avg(q_j2.cpu_hours)"
            );
            assert_eq!(plan.hop_mapping.unwrap().view, (1, 5));
        } else {
            assert!(matches!(res, Err(RewriteError::Unsound(_))), "{v}: {res:?}");
        }
    }
}

#[test]
fn job_paths_halve() {
    let s = GraphSchema::lineage();
    for text in [
        "MATCH (a:Job)-[*1..4]->(b:Job) RETURN b.id, a.id",
        "MATCH (a:Job)-[*1..4]->(b:Job) RETURN a.id, b.id",
    ] {
        let (q, views) = instances(text, &s);
        assert_eq!(khop(&views).len(), 2, "K=2 and K=4");
        let v = views.iter().find(|v| v.def == ViewDef::khop("Job", "Job", 2)).unwrap();
        let plan = rewrite_with_view(&q, v, &s).unwrap();
        assert_eq!(plan.hop_mapping.unwrap().view, (1, 2));
    }
}

#[test]
fn raw_provenance_schema_still_rewrites() {
    let s = provenance_schema();
    let (q, views) = instances(LISTING1, &s);
    let v = views.iter().find(|v| v.def == ViewDef::khop("Job", "Job", 2)).unwrap();
    assert_eq!(rewrite_with_view(&q, v, &s).unwrap().hop_mapping.unwrap().view, (1, 5));
}

#[test]
fn referenced_interior_is_rejected() {
    let s = GraphSchema::lineage();
    let (_, views) = instances(LISTING1, &s);
    let v = views.iter().find(|v| v.def == ViewDef::khop("Job", "Job", 2)).unwrap();
    let q = parse_query(&LISTING1.replace("RETURN q_j1.id", "RETURN q_f1.name, q_j1.id")).unwrap();
    assert_eq!(
        rewrite_with_view(&q, v, &s),
        Err(RewriteError::NameEliminatedButReferenced("q_f1".into()))
    );
}

#[test]
fn fixed_single_edge() {
    let s = GraphSchema::lineage();
    let (q, views) = instances("MATCH (a:Job)-[:WRITES_TO]->(b:File) RETURN a, b", &s);
    assert!(views.iter().all(|v| !v.def.kind().is_spanner()));
    assert!(!views.is_empty());
    let one = ViewInstance::new(ViewDef::khop("Job", "File", 1), None, None, &s, "t");
    let plan = rewrite_with_view(&q, &one, &s).unwrap();
    assert_eq!(
        plan.rewritten.to_string(),
        "MATCH (a:Job)-[:JOB_TO_FILE_1HOP]->(b:File) RETURN a, b"
    );
}

#[test]
fn zero_length_connectors_are_not_rewritten() {
    let s = GraphSchema::lineage();
    let q = parse_query("MATCH (a:Job)-[*0..4]->(b:Job) RETURN a, b").unwrap();
    let v = ViewInstance::new(ViewDef::khop("Job", "Job", 2), None, None, &s, "t");
    assert!(matches!(rewrite_with_view(&q, &v, &s), Err(RewriteError::Unsound(_))));
}

#[test]
fn uncovered_pattern() {
    let s = GraphSchema::lineage();
    let q = parse_query("MATCH (a:Job)-[*1..4]->(b:Job), (b)-[:WRITES_TO]->(f:File) RETURN a, f").unwrap();
    let v = ViewInstance::new(
        ViewDef::khop("Job", "Job", 2),
        Some("a".into()),
        Some("b".into()),
        &s,
        "t",
    );
    assert!(matches!(
        rewrite_with_view(&q, &v, &s),
        Err(RewriteError::UncoveredPattern(_))
    ));
}

#[test]
fn same_vertex_type_acts_as_two_hops() {
    let s = GraphSchema::lineage();
    let (q, views) = instances("MATCH (a:Job)-[*1..6]->(b:Job) RETURN a, b", &s);
    let v = views
        .iter()
        .find(|v| v.def.kind() == ViewKind::SameVertexTypeConnector)
        .unwrap();
    assert_eq!(rewrite_with_view(&q, v, &s).unwrap().hop_mapping.unwrap().view, (1, 3));
}

#[test]
fn source_to_sink_exact_range() {
    let s = GraphSchema::new(
        ["A", "B", "C"],
        [
            EdgeTriple::new("A", "B", "x"),
            EdgeTriple::new("B", "B", "y"),
            EdgeTriple::new("B", "C", "z"),
        ],
    )
    .unwrap();
    let (q, views) = instances("MATCH (a:A)-[*2..4]->(c:C) RETURN a, c", &s);
    let v = views
        .iter()
        .find(|v| v.def.kind() == ViewKind::SourceToSinkConnector)
        .unwrap();
    let plan = rewrite_with_view(&q, v, &s).unwrap();
    assert_eq!(
        plan.rewritten.to_string(),
        "MATCH (a:A)-[:A_TO_C_2_4HOP]->(c:C) RETURN a, c"
    );
}

#[test]
fn aggregators() {
    let s = GraphSchema::lineage();
    let (q, views) = instances("MATCH (f:File) RETURN f.dir, sum(f.bytes), count(f)", &s);
    let v = views
        .iter()
        .find(|v| v.def.kind() == ViewKind::VertexAggregator)
        .unwrap();
    let plan = rewrite_with_view(&q, v, &s).unwrap();
    assert_eq!(
        plan.rewritten.to_string(),
        "MATCH (f:File) RETURN f.dir, sum(f.sum_bytes), sum(f.member_count)"
    );
    assert_eq!(plan.output_columns, vec!["f.dir", "sum(f.bytes)", "count(f)"]);

    let (q, views) = instances(
        "MATCH (a:Job)-[e:WRITES_TO]->(f:File) RETURN a.id, count(e), max(e.ts)",
        &s,
    );
    let v = views.iter().find(|v| v.def.kind() == ViewKind::EdgeAggregator).unwrap();
    let plan = rewrite_with_view(&q, v, &s).unwrap();
    assert_eq!(
        plan.rewritten.to_string(),
        "MATCH (a:Job)-[e:WRITES_TO]->(f:File) RETURN a.id, sum(e.edge_count), max(e.max_ts)"
    );
}

#[test]
fn examined_bindings_stay_below_schema_paths() {
    let s = GraphSchema::lineage();
    let q = parse_query(LISTING1).unwrap();
    let cs = mine_constraints(&q, &s, 10);
    let (_, stats) = enumerate_views(&q, &cs, &[ViewKind::KHopConnector], "t");
    let bound: usize = cs.schema_paths.values().map(|p| p.len()).sum();
    assert!(stats.bindings_examined as usize <= bound);
}

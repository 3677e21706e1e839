mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use graph_views::cost::{estimate_er, estimate_heterogeneous, estimate_homogeneous, eval_cost};
use graph_views::enumerate::rewrite_with_view;
use graph_views::exec::{execute, execute_plan};
use graph_views::generate::{lineage, LineageParams};
use graph_views::graph::{degree_summary, Alpha, PropertyGraph, PropertyValue};
use graph_views::query::parse_query;
use graph_views::views::{knapsack, materialize, MaterializeOptions, ViewDef, ViewInstance};

fn khop_pairs(v: &PropertyGraph) -> BTreeMap<(String, String), u64> {
    v.edge_ids()
        .map(|e| {
            let Some(PropertyValue::Int(n)) = v.edge_props(e).get("path_count") else {
                panic!("no path_count")
            };
            (
                (v.vertex_key(v.edge_src(e)).into(), v.vertex_key(v.edge_dst(e)).into()),
                *n as u64,
            )
        })
        .collect()
}

fn small_lineage(seed: u64, jobs: usize) -> PropertyGraph {
    lineage(&LineageParams {
        jobs,
        files: 2 * jobs,
        reads_per_file: 1.5,
        read_window: 8,
        seed,
        ..LineageParams::default()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn knapsack_matches_exhaustive(
        items in prop::collection::vec((1u64..40, 0u32..30), 0..=12),
        slack in 0u64..200,
    ) {
        let items: Vec<(u64, f64)> = items.into_iter().map(|(w, v)| (w, f64::from(v))).collect();
        let budget = slack.min(items.iter().map(|i| i.0).sum::<u64>() + 1);
        let named: Vec<(String, u64, f64)> =
            items.iter().enumerate().map(|(i, &(w, v))| (format!("c{i:02}"), w, v)).collect();
        let got = knapsack(&named, budget);
        let (value, weight, chosen) = common::knapsack_exhaustive(&items, budget);
        prop_assert_eq!(got.chosen, chosen);
        prop_assert_eq!(got.total_value, value);
        prop_assert_eq!(got.total_weight, weight);
        prop_assert!(got.total_weight <= budget);
    }

    #[test]
    fn khop_views_match_trail_enumeration(seed in any::<u64>(), k in 1u32..=4, homogeneous in any::<bool>()) {
        let g = common::random_graph(seed, 40, homogeneous);
        for x in g.schema().vertex_types() {
            for y in g.schema().vertex_types() {
                let view = materialize(&g, &ViewDef::khop(x, y, k), MaterializeOptions::default()).unwrap();
                prop_assert_eq!(khop_pairs(&view), common::brute_trail_pairs(&g, k as usize, x, y));
            }
        }
    }

    #[test]
    fn estimates_grow_with_alpha(seed in any::<u64>(), k in 0u32..=4, homogeneous in any::<bool>()) {
        let g = common::random_graph(seed, 60, homogeneous);
        let d = degree_summary(&g);
        let ests: Vec<f64> = Alpha::ALL.iter().map(|&a| estimate_heterogeneous(&d, k, a).estimated_edges).collect();
        prop_assert!(ests.windows(2).all(|w| w[0] <= w[1]));
        if homogeneous {
            for a in Alpha::ALL {
                prop_assert_eq!(
                    estimate_homogeneous(&d, k, a).unwrap().estimated_edges,
                    estimate_heterogeneous(&d, k, a).estimated_edges
                );
            }
        }
    }

    #[test]
    fn er_one_hop_is_edge_count(n in 2u64..10_000, m in 0u64..100_000) {
        let m = m.min(n * (n - 1) / 2);
        let e = estimate_er(n, m, 1).unwrap().estimated_edges;
        prop_assert!((e - m as f64).abs() <= 1e-9 * (m as f64).max(1.0));
    }

    #[test]
    fn eval_cost_grows_with_hop_bound(seed in any::<u64>(), hi in 1u32..8) {
        let g = small_lineage(seed, 30);
        let d = degree_summary(&g);
        let q = |h: u32| parse_query(&format!("MATCH (a:Job)-[*1..{h}]->(b:Job) RETURN a, b")).unwrap();
        prop_assert!(eval_cost(&q(hi), &d) <= eval_cost(&q(hi + 1), &d));
    }

    /// Any rewrite the rewriter accepts gives the raw answer.
    #[test]
    fn accepted_rewrites_are_sound(
        seed in any::<u64>(),
        jobs in 5usize..40,
        lo in 0u32..5,
        span in 0u32..5,
        k in prop::sample::select(vec![2u32, 4]),
        shape in 0usize..3,
    ) {
        let g = small_lineage(seed, jobs);
        let hi = lo + span;
        let text = match shape {
            0 => format!("MATCH (a:Job)-[*{}..{}]->(b:Job) RETURN a.id, b.id", lo.max(1), hi.max(1)),
            1 => format!(
                "MATCH (a:Job)-[:WRITES_TO]->(f:File), (f)-[*{lo}..{hi}]->(h:File), (h)-[:IS_READ_BY]->(b:Job) \
                 RETURN a.id, count(b)"
            ),
            _ => format!("MATCH (a:Job)-[*{}..{}]->(b:Job) RETURN b.id, sum(a.cpu_hours)", lo.max(1), hi.max(1)),
        };
        let q = parse_query(&text).unwrap();
        let def = ViewDef::khop("Job", "Job", k);
        let inst = ViewInstance::new(def.clone(), None, None, g.schema(), "prop");
        if let Ok(plan) = rewrite_with_view(&q, &inst, g.schema()) {
            let view = materialize(&g, &def, MaterializeOptions::default()).unwrap();
            let (raw, _) = execute(&q, &g).unwrap();
            let (over, _) = execute_plan(&plan, &view).unwrap();
            prop_assert!(raw.approx_eq(&over, 1e-9), "{}\nraw {:?}\nview {:?}", text, raw.rows, over.rows);
        }
    }
}

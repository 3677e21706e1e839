//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Runs without the libtest harness so the lines always print.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use graph_views::constraints::schema_k_hop_paths;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use graph_views::cost::{estimate_er, estimate_heterogeneous, estimate_homogeneous, exact_path_count};
use graph_views::enumerate::rewrite_with_view;
use graph_views::exec::{execute, execute_plan, path_lengths_by_type};
use graph_views::generate::{lineage, power_law, LineageParams, PowerLawParams};
use graph_views::graph::{degree_summary, Alpha, GraphSchema, PropertyGraph, PropertyValue, VertexId};
use graph_views::query::{parse_query, QueryGraph};
use graph_views::views::{knapsack, materialize, EdgeSummary, MaterializeOptions, Reducer, ViewDef, ViewInstance};
use graph_views::workload::{Task, WorkloadSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn gview(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gview"))
        .args(args)
        .output()
        .expect("gview runs")
}

/// Listing-1 shape over the two-type lineage schema.
const BLAST_RADIUS: &str = "MATCH (q_j1:Job)-[:WRITES_TO]->(q_f1:File), (q_f1)-[r*0..8]->(q_f2:File), \
    (q_f2)-[:IS_READ_BY]->(q_j2:Job) RETURN q_j1.id, avg(q_j2.cpu_hours)";

fn enumeration_fidelity(dir: &Path) -> Outcome {
    // The published block repeats XTYPE where YTYPE is meant.
    let expected: Vec<String> = [2, 4, 6, 8, 10]
        .iter()
        .map(|k| format!("(X='q_j1', Y='q_j2', XTYPE='Job', YTYPE='Job', K={k})"))
        .collect();
    let schema = dir.join("lineage-schema.json");
    std::fs::write(&schema, graph_views::graph::GraphSchema::lineage().to_json()).unwrap();
    let query = dir.join("blast-radius.txt");
    std::fs::write(&query, BLAST_RADIUS).unwrap();
    let t0 = Instant::now();
    let out = gview(&[
        "enumerate",
        "--max-k",
        "10",
        "--schema",
        schema.to_str().unwrap(),
        "--query",
        query.to_str().unwrap(),
    ]);
    let secs = t0.elapsed().as_secs_f64();
    let text = String::from_utf8_lossy(&out.stdout);
    let got: Vec<String> = text
        .lines()
        .skip_while(|l| *l != "kHopConnector:")
        .skip(1)
        .take_while(|l| l.starts_with('('))
        .map(str::to_string)
        .collect();
    outcome(
        out.status.success() && got == expected && secs < 1.0,
        format!("{} k-hop lines, exact match {}, {secs:.2}s", got.len(), got == expected),
    )
}

fn schema_path_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut mismatches = 0;
    for seed in 0..200 {
        let s = common::random_schema(seed);
        let triples = common::triples(&s);
        for k in 1..=6 {
            let ours: BTreeSet<Vec<common::Triple>> = schema_k_hop_paths(&s, k)
                .iter()
                .map(|p| {
                    p.edges
                        .iter()
                        .map(|e| (e.src.clone(), e.dst.clone(), e.label.clone()))
                        .collect()
                })
                .collect();
            if ours != common::k_hop_schema_paths(&triples, k) {
                mismatches += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 30.0,
        format!("{mismatches} mismatches over 200 schemas x k<=6, {secs:.2}s"),
    )
}

fn parity() -> Outcome {
    let mut odd_same = 0;
    for seed in 0..100 {
        let s = common::bipartite_schema(seed);
        for k in [1, 3, 5, 7] {
            odd_same += schema_k_hop_paths(&s, k)
                .iter()
                .filter(|p| p.src_type == p.dst_type)
                .count();
        }
    }
    outcome(
        odd_same == 0,
        format!("{odd_same} odd-k same-type paths over 100 bipartite schemas"),
    )
}

fn estimator_upper_bound() -> Outcome {
    let mut violations = Vec::new();
    let mut checked = 0;
    for seed in 0..100u64 {
        let homogeneous = seed % 2 == 0;
        let g = common::random_graph(seed, 200, homogeneous);
        let d = degree_summary(&g);
        for k in [2, 3, 4] {
            let exact = exact_path_count(&g, k, None, None, u64::MAX).unwrap();
            if k == 2 {
                assert_eq!(
                    exact,
                    common::brute_simple_paths(&g, 2, None, None),
                    "exact counter disagrees"
                );
            }
            let est = if homogeneous {
                estimate_homogeneous(&d, k, Alpha::P100).unwrap().estimated_edges
            } else {
                estimate_heterogeneous(&d, k, Alpha::P100).estimated_edges
            };
            checked += 1;
            if est < exact as f64 {
                violations.push(format!("seed {seed} k={k}: {est} < {exact}"));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{} violations in {checked} checks {:?}",
            violations.len(),
            violations.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

/// Directed 2-paths u->v->w with u != w, counted per edge pair: for each
/// middle vertex, in-degree times out-degree less the edge pairs that
/// return to where they started.
fn two_paths_closed_form(g: &PropertyGraph) -> u64 {
    let mut total = 0u64;
    for v in g.vertex_ids() {
        let ins = g.in_edges(v);
        let outs = g.out_edges(v);
        let mut back: BTreeMap<VertexId, u64> = BTreeMap::new();
        for &e in outs {
            *back.entry(g.edge_dst(e)).or_default() += 1;
        }
        let returning: u64 = ins
            .iter()
            .map(|&e| back.get(&g.edge_src(e)).copied().unwrap_or(0))
            .sum();
        total += ins.len() as u64 * outs.len() as u64 - returning;
    }
    total
}

/// Exact 2-path counts and estimator values for seeds 0..100 at size n.
struct PowerLawRun {
    exact: u64,
    a50: f64,
    a95: f64,
    er: f64,
}

fn power_law_runs(n: usize) -> Vec<PowerLawRun> {
    (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let g = power_law(&PowerLawParams::new(n, seed)).unwrap();
            let d = degree_summary(&g);
            let exact = two_paths_closed_form(&g);
            if seed < 3 {
                assert_eq!(exact, exact_path_count(&g, 2, None, None, u64::MAX).unwrap());
            }
            PowerLawRun {
                exact,
                a50: estimate_homogeneous(&d, 2, Alpha::P50).unwrap().estimated_edges,
                a95: estimate_homogeneous(&d, 2, Alpha::P95).unwrap().estimated_edges,
                er: estimate_er(g.vertex_count() as u64, g.edge_count() as u64, 2)
                    .unwrap()
                    .estimated_edges,
            }
        })
        .collect()
}

fn sandwich(runs: &BTreeMap<usize, Vec<PowerLawRun>>) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, rs) in runs {
        let inside = rs
            .iter()
            .filter(|r| r.a50 <= r.exact as f64 && r.exact as f64 <= r.a95)
            .count();
        pass &= inside >= 80;
        parts.push(format!("n={n}: {inside}/100 inside"));
    }
    outcome(pass, parts.join(", "))
}

fn er_underestimates(runs: &BTreeMap<usize, Vec<PowerLawRun>>) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, rs) in runs {
        let under = rs.iter().filter(|r| r.exact as f64 >= 10.0 * r.er).count();
        let mut ratios: Vec<f64> = rs.iter().map(|r| r.exact as f64 / r.er).collect();
        ratios.sort_by(f64::total_cmp);
        pass &= under >= 90;
        parts.push(format!("n={n}: {under}/100 at >=10x (median {:.1}x)", ratios[50]));
    }
    outcome(pass, parts.join(", "))
}

fn job_spanner(g: &PropertyGraph, summary: bool) -> (ViewInstance, PropertyGraph) {
    let def = ViewDef::KHop {
        xtype: "Job".into(),
        ytype: "Job".into(),
        k: 2,
        allowed_types: None,
        edge_summary: summary.then(|| EdgeSummary {
            property: "ts".into(),
            reducer: Reducer::Max,
        }),
    };
    let view = materialize(g, &def, MaterializeOptions::default()).unwrap();
    (ViewInstance::new(def, None, None, g.schema(), "acceptance"), view)
}

fn rewrite_equivalence() -> Outcome {
    let t0 = Instant::now();
    let spec = WorkloadSpec::lineage(0);
    let text = |name: &str| -> String {
        match &spec.queries.iter().find(|q| q.name == name).unwrap().task {
            Task::Query { text, .. } => text.clone().unwrap(),
            Task::PathLengths { pattern, .. } => pattern.clone(),
            _ => unreachable!(),
        }
    };
    let queries: Vec<(String, QueryGraph)> = ["Q1", "Q2", "Q3", "Q4"]
        .iter()
        .map(|n| (n.to_string(), parse_query(&text(n)).unwrap()))
        .collect();
    let results: Vec<Vec<String>> = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let jobs = 100 + (seed as usize * 37) % 560;
            let g = lineage(&LineageParams {
                jobs,
                files: 2 * jobs,
                seed,
                ..LineageParams::default()
            })
            .unwrap();
            assert!(g.vertex_count() <= 2_000);
            let (inst, view) = job_spanner(&g, true);
            let mut bad = Vec::new();
            for (name, q) in &queries {
                let plan = match rewrite_with_view(q, &inst, g.schema()) {
                    Ok(p) => p,
                    Err(e) => {
                        bad.push(format!("seed {seed} {name}: no rewrite ({e})"));
                        continue;
                    }
                };
                let same = if name == "Q4" {
                    let hops = plan.hop_mapping.unwrap().view.1;
                    let k_max = q.path.as_ref().unwrap().max;
                    let raw = path_lengths_by_type(&g, "Job", "Job", k_max, "ts", Reducer::Max).unwrap();
                    let over = path_lengths_by_type(&view, "Job", "Job", hops, "max_ts", Reducer::Max).unwrap();
                    raw == over
                } else {
                    let (a, _) = execute(q, &g).unwrap();
                    let (b, _) = execute_plan(&plan, &view).unwrap();
                    a.approx_eq(&b, 1e-9)
                };
                if !same {
                    bad.push(format!("seed {seed} {name}: results differ"));
                }
            }
            bad
        })
        .collect();
    let bad: Vec<String> = results.into_iter().flatten().collect();
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 120.0,
        format!(
            "{} mismatches over 50 graphs x 4 queries, {secs:.1}s {:?}",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

/// The provenance-style graph, its {Job, File} sparsifier and the 2-hop
/// job spanner over that.
struct Provenance {
    full: PropertyGraph,
    filtered: PropertyGraph,
    spanner: PropertyGraph,
    instance: ViewInstance,
}

fn provenance() -> Provenance {
    let full = lineage(&LineageParams::provenance(100_000, 1)).unwrap();
    let filter = ViewDef::VertexInclusion {
        types: ["Job", "File"].iter().map(|t| t.to_string()).collect(),
    };
    let filtered = materialize(&full, &filter, MaterializeOptions::default()).unwrap();
    let (instance, spanner) = job_spanner(&filtered, false);
    Provenance {
        full,
        filtered,
        spanner,
        instance,
    }
}

fn size_reduction(p: &Provenance) -> Outcome {
    let bulk = ["Task", "Machine"]
        .iter()
        .map(|t| p.full.vertices_of_type(t).len())
        .sum::<usize>();
    let share = bulk as f64 / p.full.vertex_count() as f64;
    let first = p.full.edge_count() as f64 / p.filtered.edge_count() as f64;
    let second = p.filtered.edge_count() as f64 / p.spanner.edge_count() as f64;
    outcome(
        p.full.vertex_count() == 100_000 && share >= 0.9 && first >= 5.0 && second >= 2.0,
        format!(
            "{} vertices ({:.0}% task/machine); edges {} -> {} ({first:.1}x) -> {} ({second:.2}x)",
            p.full.vertex_count(),
            share * 100.0,
            p.full.edge_count(),
            p.filtered.edge_count(),
            p.spanner.edge_count()
        ),
    )
}

fn work_reduction(p: &Provenance) -> Outcome {
    let q = parse_query(BLAST_RADIUS).unwrap();
    let plan = rewrite_with_view(&q, &p.instance, p.filtered.schema()).unwrap();
    let (mut raw_ms, mut view_ms) = (0.0, 0.0);
    let (mut raw_edges, mut view_edges) = (0, 0);
    let mut same = true;
    for _ in 0..10 {
        let t = Instant::now();
        let (a, sa) = execute(&q, &p.filtered).unwrap();
        raw_ms += t.elapsed().as_secs_f64() * 1e3;
        let t = Instant::now();
        let (b, sb) = execute_plan(&plan, &p.spanner).unwrap();
        view_ms += t.elapsed().as_secs_f64() * 1e3;
        same &= a.approx_eq(&b, 1e-9);
        (raw_edges, view_edges) = (sa.edges_expanded, sb.edges_expanded);
    }
    let ratio = view_edges as f64 / raw_edges as f64;
    let speedup = raw_ms / view_ms;
    outcome(
        same && ratio <= 0.5 && speedup >= 2.0,
        format!(
            "edges_expanded {raw_edges} -> {view_edges} ({ratio:.2}x), mean {:.0} ms -> {:.0} ms ({speedup:.1}x), results equal {same}",
            raw_ms / 10.0,
            view_ms / 10.0
        ),
    )
}

fn knapsack_optimality() -> Outcome {
    let t0 = Instant::now();
    let bad: Vec<u64> = (0..1000u64)
        .into_par_iter()
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(0..=20);
            let items: Vec<(u64, f64)> = (0..n)
                .map(|_| (rng.gen_range(1..=60), f64::from(rng.gen_range(0..=40u32))))
                .collect();
            let budget = rng.gen_range(0..=items.iter().map(|i| i.0).sum::<u64>() + 1);
            let named: Vec<(String, u64, f64)> = items
                .iter()
                .enumerate()
                .map(|(i, &(w, v))| (format!("c{i:02}"), w, v))
                .collect();
            let got = knapsack(&named, budget);
            let (value, weight, chosen) = common::knapsack_exhaustive(&items, budget);
            got.chosen != chosen || got.total_value != value || got.total_weight != weight
        })
        .collect();
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 10.0,
        format!(
            "{} disagreements over 1000 lists of <=20 items, {secs:.2}s {:?}",
            bad.len(),
            bad.iter().take(5).collect::<Vec<_>>()
        ),
    )
}

/// View edges as (source, target) -> path_count.
fn view_edges(v: &PropertyGraph) -> BTreeMap<(String, String), u64> {
    v.edge_ids()
        .map(|e| {
            let n = match v.edge_props(e).get("path_count") {
                Some(PropertyValue::Int(n)) => *n as u64,
                other => panic!("path_count missing or mistyped: {other:?}"),
            };
            (
                (
                    v.vertex_key(v.edge_src(e)).to_string(),
                    v.vertex_key(v.edge_dst(e)).to_string(),
                ),
                n,
            )
        })
        .collect()
}

/// The lineage example with jobs j1..j3 and files f1..f4: w edges run job
/// to file, r edges file to job.
fn figure_lineage() -> PropertyGraph {
    let mut g = PropertyGraph::new(GraphSchema::lineage());
    for j in ["j1", "j2", "j3"] {
        g.add_vertex(j, "Job", Default::default()).unwrap();
    }
    for f in ["f1", "f2", "f3", "f4"] {
        g.add_vertex(f, "File", Default::default()).unwrap();
    }
    let edges = [
        ("j1", "f1", "WRITES_TO"),
        ("j1", "f2", "WRITES_TO"),
        ("f1", "j2", "IS_READ_BY"),
        ("f2", "j3", "IS_READ_BY"),
        ("j2", "f3", "WRITES_TO"),
        ("f3", "j3", "IS_READ_BY"),
        ("j3", "f4", "WRITES_TO"),
    ];
    for (i, (a, b, l)) in edges.iter().enumerate() {
        g.add_edge(format!("e{i}"), a, b, l, Default::default()).unwrap();
    }
    g
}

fn spanner_oracle() -> Outcome {
    let mut bad = Vec::new();
    for seed in 0..100u64 {
        let g = common::random_graph(1_000 + seed, 200, seed % 4 == 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let types: Vec<&String> = g.schema().vertex_types().iter().collect();
        let (x, y) = (types.choose(&mut rng).unwrap(), types.choose(&mut rng).unwrap());
        let k = rng.gen_range(1..=3);
        let view = materialize(&g, &ViewDef::khop(x, y, k), MaterializeOptions::default()).unwrap();
        let expected = common::brute_trail_pairs(&g, k as usize, x, y);
        let endpoints: BTreeSet<String> = expected.keys().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
        let kept: BTreeSet<String> = view.vertex_ids().map(|v| view.vertex_key(v).to_string()).collect();
        if view_edges(&view) != expected || kept != endpoints {
            bad.push(format!("seed {seed} {x}->{y} k={k}"));
        }
    }
    let fig = figure_lineage();
    let pairs = |ps: &[(&str, &str)]| -> BTreeMap<(String, String), u64> {
        ps.iter().map(|(a, b)| ((a.to_string(), b.to_string()), 1)).collect()
    };
    let jobs = materialize(&fig, &ViewDef::khop("Job", "Job", 2), MaterializeOptions::default()).unwrap();
    let files = materialize(&fig, &ViewDef::khop("File", "File", 2), MaterializeOptions::default()).unwrap();
    let fig_ok = view_edges(&jobs) == pairs(&[("j1", "j2"), ("j1", "j3"), ("j2", "j3")])
        && view_edges(&files) == pairs(&[("f1", "f3"), ("f2", "f4"), ("f3", "f4")]);
    outcome(
        bad.is_empty() && fig_ok,
        format!(
            "{} mismatches over 100 random graphs {:?}; lineage figure views exact {fig_ok}",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn without_timing(json: &[u8]) -> String {
    let mut v: serde_json::Value = serde_json::from_slice(json).expect("report is JSON");
    for q in v["queries"].as_array_mut().expect("queries array") {
        q.as_object_mut().unwrap().remove("timing");
    }
    serde_json::to_string_pretty(&v).unwrap()
}

fn determinism(dir: &Path) -> Outcome {
    let mut reports = Vec::new();
    for (run, threads) in [(0, "1"), (1, "8"), (2, "8"), (3, "1")] {
        let out = dir.join(format!("report-{run}.json"));
        let status = gview(&[
            "bench",
            "--seed",
            "11",
            "--jobs",
            "300",
            "--budget",
            "100000",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        if !status.status.success() {
            return outcome(
                false,
                format!("bench failed: {}", String::from_utf8_lossy(&status.stderr)),
            );
        }
        reports.push(without_timing(&std::fs::read(&out).unwrap()));
    }
    let identical = reports.windows(2).all(|w| w[0] == w[1]);
    outcome(
        identical,
        format!("4 runs at --threads 1/8: reports identical apart from timing {identical}"),
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let prov = provenance();
    // Shared by the two estimator criteria.
    let power_law: BTreeMap<usize, Vec<PowerLawRun>> =
        [1_000, 10_000].into_iter().map(|n| (n, power_law_runs(n))).collect();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("enumeration fidelity", Box::new(|| enumeration_fidelity(tmp.path()))),
        ("schema-path oracle equivalence", Box::new(schema_path_oracle)),
        ("parity", Box::new(parity)),
        ("estimator upper bound", Box::new(estimator_upper_bound)),
        ("power-law sandwich", Box::new(|| sandwich(&power_law))),
        ("ER underestimation", Box::new(|| er_underestimates(&power_law))),
        ("rewrite equivalence", Box::new(rewrite_equivalence)),
        ("size reduction", Box::new(|| size_reduction(&prov))),
        ("work reduction", Box::new(|| work_reduction(&prov))),
        ("knapsack optimality", Box::new(knapsack_optimality)),
        ("spanner construction oracle", Box::new(spanner_oracle)),
        ("determinism", Box::new(|| determinism(tmp.path()))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = run();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {:<34} {}  {} ({:.1}s)",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t0.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use graph_views::constraints::mine_constraints;
use graph_views::cost::{estimate_er, estimate_heterogeneous, exact_path_count, DEFAULT_PATH_CAP};
use graph_views::enumerate::{enumerate_views, rewrite_with_view};
use graph_views::exec::{execute, execute_plan, ResultTable};
use graph_views::generate::{lineage, power_law, road_like, LineageParams, PowerLawParams, RoadParams};
use graph_views::graph::{degree_summary, load_graph_dir, save_graph_dir, Alpha, GraphSchema, PropertyGraph};
use graph_views::query::parse_query;
use graph_views::views::{ViewCatalog, ViewKind};
use graph_views::workload::{plan_views, run_pipeline, PipelineError, WorkloadSpec};

#[derive(Parser)]
#[command(
    name = "gview",
    version,
    about = "Workload-driven graph views: enumerate, size, select, materialize and rewrite"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Degree percentile for size estimates.
    #[arg(long, global = true, value_parser = parse_alpha)]
    alpha: Option<Alpha>,
    /// Edge capacity for materialized views.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[arg(long, global = true)]
    max_k: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Lineage,
    Provenance,
    PowerLaw,
    RoadLike,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a synthetic graph directory.
    Generate {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long)]
        out: PathBuf,
        /// Vertex count for power-law and provenance graphs.
        #[arg(long, default_value_t = 10_000)]
        vertices: usize,
        #[arg(long, default_value_t = 200)]
        jobs: usize,
        #[arg(long, default_value_t = 400)]
        files: usize,
        #[arg(long, default_value_t = 1.0)]
        reads_per_file: f64,
        #[arg(long, default_value_t = 100)]
        width: usize,
        #[arg(long, default_value_t = 100)]
        height: usize,
        #[arg(long, default_value_t = 0.8)]
        keep_prob: f64,
    },
    /// Load a graph directory and print its size and degree summary.
    LoadCheck {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Print the facts and connectors mined for a query.
    Mine(QueryArgs),
    /// Print candidate views for a query, grouped by template.
    Enumerate(QueryArgs),
    /// Compare k-path size estimates with the exact count.
    Estimate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Prefix sizes (vertex counts) to evaluate; default is the whole graph.
        #[arg(long, value_delimiter = ',')]
        prefixes: Vec<usize>,
        /// Step cap for the exact count.
        #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
        exact_cap: u64,
    },
    /// Cost candidate views for a workload and pick a set under the budget.
    Select(SpecArgs),
    /// Materialize views into a catalog; the selected set when no id is given.
    Materialize {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        catalog: PathBuf,
        ids: Vec<String>,
    },
    /// Run one query, raw or over a catalog view.
    Run {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, requires = "catalog")]
        view: Option<String>,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// End-to-end: select, materialize, run every entry both ways, report.
    Bench {
        #[command(flatten)]
        spec: SpecArgs,
        /// Jobs in the generated lineage graph when no graph is given.
        #[arg(long, default_value_t = 400)]
        jobs: usize,
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        repeat: Option<u32>,
    },
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    query: PathBuf,
    /// Schema JSON; taken from the graph directory when `--graph` is given.
    #[arg(long, required_unless_present = "graph")]
    schema: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SpecArgs {
    /// Workload JSON; the built-in lineage workload when absent.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Graph directory; overrides the spec.
    #[arg(long)]
    graph: Option<PathBuf>,
}

fn parse_alpha(s: &str) -> Result<Alpha, String> {
    let n: u32 = s.parse().map_err(|e| format!("{e}"))?;
    Alpha::try_from(n).map_err(|e| e.to_string())
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

fn invalid(e: impl Display) -> Failure {
    Failure {
        code: 2,
        message: e.to_string(),
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure {
            code: if e.over_budget { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load(dir: &Path) -> Result<PropertyGraph, Failure> {
    load_graph_dir(dir).map_err(invalid)
}

fn schema_for(a: &QueryArgs) -> Result<GraphSchema, Failure> {
    match (&a.graph, &a.schema) {
        (Some(g), _) => Ok(load(g)?.schema().clone()),
        (None, Some(s)) => GraphSchema::from_json(&read(s)?).map_err(invalid),
        (None, None) => Err(invalid("need --schema or --graph")),
    }
}

fn load_spec(args: &SpecArgs, g: &Global) -> Result<WorkloadSpec, Failure> {
    let mut spec = match &args.spec {
        Some(p) => WorkloadSpec::from_json(&read(p)?, p.parent().unwrap_or(Path::new(".")))?,
        None => WorkloadSpec::lineage(1_000_000),
    };
    if let Some(b) = g.budget {
        spec.budget = b;
    }
    if let Some(a) = g.alpha {
        spec.alpha = a;
    }
    if let Some(k) = g.max_k {
        spec.max_k = k;
    }
    if let Some(dir) = &args.graph {
        spec.graph = Some(dir.to_string_lossy().into_owned());
    }
    Ok(spec)
}

fn spec_graph(spec: &WorkloadSpec, g: &Global, jobs: usize) -> Result<PropertyGraph, Failure> {
    match &spec.graph {
        Some(dir) => load(Path::new(dir)),
        None => lineage(&LineageParams {
            jobs,
            files: jobs * 2,
            seed: g.seed.unwrap_or(42),
            ..LineageParams::default()
        })
        .map_err(invalid),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn print_table(out: &mut impl Write, t: &ResultTable) -> std::io::Result<()> {
    writeln!(
        out,
        "{}",
        t.columns.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",")
    )?;
    for row in &t.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| c.as_ref().map_or(String::new(), |v| csv_field(&v.to_string())))
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    let max_k = g.max_k.unwrap_or(10);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    // A closed pipe (`| head`) is not an error.
    let io = |e: std::io::Error| Failure {
        code: if e.kind() == std::io::ErrorKind::BrokenPipe {
            0
        } else {
            2
        },
        message: e.to_string(),
    };
    match cli.cmd {
        Cmd::Generate {
            kind,
            out: dir,
            vertices,
            jobs,
            files,
            reads_per_file,
            width,
            height,
            keep_prob,
        } => {
            let seed = g.seed.unwrap_or(42);
            let graph = match kind {
                GenKind::Lineage => lineage(&LineageParams {
                    jobs,
                    files,
                    reads_per_file,
                    seed,
                    ..LineageParams::default()
                }),
                GenKind::Provenance => lineage(&LineageParams::provenance(vertices, seed)),
                GenKind::PowerLaw => power_law(&PowerLawParams::new(vertices, seed)),
                GenKind::RoadLike => road_like(&RoadParams {
                    width,
                    height,
                    keep_prob,
                    seed,
                }),
            }
            .map_err(invalid)?;
            save_graph_dir(&graph, &dir).map_err(invalid)?;
            writeln!(
                out,
                "wrote {} vertices, {} edges to {}",
                graph.vertex_count(),
                graph.edge_count(),
                dir.display()
            )
            .map_err(io)?;
        }
        Cmd::LoadCheck { graph } => {
            let graph = load(&graph)?;
            writeln!(out, "vertices={} edges={}", graph.vertex_count(), graph.edge_count()).map_err(io)?;
            let d = degree_summary(&graph);
            writeln!(out, "{}", serde_json::to_string_pretty(&d).unwrap()).map_err(io)?;
        }
        Cmd::Mine(a) => {
            let q = parse_query(&read(&a.query)?).map_err(invalid)?;
            let cs = mine_constraints(&q, &schema_for(&a)?, max_k);
            for f in &cs.facts {
                writeln!(out, "{f}").map_err(io)?;
            }
            for c in &cs.connectors {
                writeln!(
                    out,
                    "connector({}, {}, {}, {}, folded={})",
                    c.src, c.dst, c.min, c.max, c.folded
                )
                .map_err(io)?;
            }
            for (k, paths) in &cs.schema_paths {
                for p in paths {
                    let chain: Vec<String> = p
                        .edges
                        .iter()
                        .map(|e| format!("{}-{}->{}", e.src, e.label, e.dst))
                        .collect();
                    writeln!(
                        out,
                        "schemaPath({k}, '{}', '{}', [{}])",
                        p.src_type,
                        p.dst_type,
                        chain.join(", ")
                    )
                    .map_err(io)?;
                }
            }
            for t in &cs.source_types {
                writeln!(out, "sourceType('{t}')").map_err(io)?;
            }
            for t in &cs.sink_types {
                writeln!(out, "sinkType('{t}')").map_err(io)?;
            }
        }
        Cmd::Enumerate(a) => {
            let q = parse_query(&read(&a.query)?).map_err(invalid)?;
            let cs = mine_constraints(&q, &schema_for(&a)?, max_k);
            let (views, _) = enumerate_views(&q, &cs, &ViewKind::ALL, "query");
            for kind in ViewKind::ALL {
                let of_kind: Vec<_> = views.iter().filter(|v| v.def.kind() == kind).collect();
                if of_kind.is_empty() {
                    continue;
                }
                writeln!(out, "{}:", kind.template()).map_err(io)?;
                for v in of_kind {
                    writeln!(out, "{v}").map_err(io)?;
                }
            }
        }
        Cmd::Estimate {
            graph,
            k,
            prefixes,
            exact_cap,
        } => {
            let full = load(&graph)?;
            let sizes = if prefixes.is_empty() {
                vec![full.vertex_count()]
            } else {
                prefixes
            };
            writeln!(
                out,
                "{:>10} {:>10} {:>14} {:>14} {:>14} {:>14} {:>14}",
                "vertices", "edges", "er", "a50", "a95", "a100", "exact"
            )
            .map_err(io)?;
            for n in sizes {
                let part = prefix(&full, n);
                let d = degree_summary(&part);
                let er = estimate_er(part.vertex_count() as u64, part.edge_count() as u64, k)
                    .map_or("-".to_string(), |e| format!("{:.0}", e.estimated_edges));
                let est = |a| estimate_heterogeneous(&d, k, a).estimated_edges;
                let exact =
                    exact_path_count(&part, k, None, None, exact_cap).map_or("-".to_string(), |c| c.to_string());
                writeln!(
                    out,
                    "{:>10} {:>10} {:>14} {:>14.0} {:>14.0} {:>14.0} {:>14}",
                    part.vertex_count(),
                    part.edge_count(),
                    er,
                    est(Alpha::P50),
                    est(Alpha::P95),
                    est(Alpha::P100),
                    exact
                )
                .map_err(io)?;
            }
        }
        Cmd::Select(args) => {
            let spec = load_spec(&args, g)?;
            let graph = spec_graph(&spec, g, 400)?;
            let plan = plan_views(&graph, &spec)?;
            writeln!(
                out,
                "{:<40} {:>14} {:>12} {:>10}",
                "candidate", "estimate", "weight", "value"
            )
            .map_err(io)?;
            for c in plan.candidate_reports() {
                writeln!(
                    out,
                    "{:<40} {:>14.0} {:>12} {:>10.4}",
                    c.id, c.estimate.estimated_edges, c.weight, c.value
                )
                .map_err(io)?;
            }
            writeln!(
                out,
                "selected: {} (weight {} of {})",
                plan.selected_ids().join(" "),
                plan.selection.total_weight,
                spec.budget
            )
            .map_err(io)?;
        }
        Cmd::Materialize {
            spec: args,
            catalog,
            ids,
        } => {
            let spec = load_spec(&args, g)?;
            let graph = spec_graph(&spec, g, 400)?;
            let plan = plan_views(&graph, &spec)?;
            let chosen: Vec<usize> = if ids.is_empty() {
                plan.selection.chosen.clone()
            } else {
                ids.iter()
                    .map(|id| {
                        plan.position(id)
                            .ok_or_else(|| invalid(format!("no candidate view '{id}'")))
                    })
                    .collect::<Result<_, _>>()?
            };
            let mut cat = ViewCatalog::open_or_create(&catalog).map_err(invalid)?;
            for i in chosen {
                let (_, r) = plan.materialize(&graph, i, Some(&mut cat))?;
                writeln!(
                    out,
                    "{}: estimated {:.0} edges, actual {} edges / {} vertices",
                    r.id, r.estimated_edges, r.actual_edges, r.actual_vertices
                )
                .map_err(io)?;
            }
        }
        Cmd::Run {
            query,
            graph,
            view,
            catalog,
        } => {
            let q = parse_query(&read(&query)?).map_err(invalid)?;
            let base = load(&graph)?;
            let budget_err = |e: graph_views::exec::ExecError| {
                let over = matches!(e, graph_views::exec::ExecError::BudgetExceeded { .. });
                Failure {
                    code: if over { 3 } else { 2 },
                    message: e.to_string(),
                }
            };
            let (table, stats) = match (view, catalog) {
                (Some(id), Some(dir)) => {
                    let cat = ViewCatalog::open(&dir).map_err(invalid)?;
                    let entry = cat
                        .get(&id)
                        .ok_or_else(|| invalid(format!("no view '{id}' in the catalog")))?;
                    let plan = rewrite_with_view(&q, &entry.instance, base.schema()).map_err(invalid)?;
                    let v = cat.load_view(&id).map_err(invalid)?;
                    execute_plan(&plan, &v).map_err(budget_err)?
                }
                _ => execute(&q, &base).map_err(budget_err)?,
            };
            print_table(&mut out, &table).map_err(io)?;
            writeln!(
                out,
                "edges_expanded={} vertices_touched={} ms={:.3}",
                stats.edges_expanded, stats.vertices_touched, stats.ms
            )
            .map_err(io)?;
        }
        Cmd::Bench {
            spec: args,
            jobs,
            catalog,
            out: report_path,
            repeat,
        } => {
            let mut spec = load_spec(&args, g)?;
            if let Some(r) = repeat {
                spec.repeat = r;
            }
            let graph = spec_graph(&spec, g, jobs)?;
            let mut cat = match &catalog {
                Some(dir) => Some(ViewCatalog::open_or_create(dir).map_err(invalid)?),
                None => None,
            };
            let report = run_pipeline(&graph, &spec, cat.as_mut())?;
            let json = serde_json::to_string_pretty(&report).unwrap();
            match report_path {
                Some(p) => {
                    std::fs::write(&p, json + "\n").map_err(|e| invalid(format!("{}: {e}", p.display())))?;
                    write!(out, "{}", report.table()).map_err(io)?;
                }
                None => writeln!(out, "{json}").map_err(io)?,
            }
        }
    }
    Ok(())
}

/// The subgraph induced by the first `n` vertices in load order.
fn prefix(g: &PropertyGraph, n: usize) -> PropertyGraph {
    if n >= g.vertex_count() {
        return g.clone();
    }
    let mut p = PropertyGraph::new(g.schema().clone());
    for v in g.vertex_ids().take(n) {
        p.add_vertex(g.vertex_key(v), g.vertex_type(v), g.vertex_props(v).clone())
            .expect("keys unique");
    }
    for e in g.edge_ids() {
        let (s, d) = (g.edge_src(e), g.edge_dst(e));
        if s.index() < n && d.index() < n {
            p.add_edge(
                g.edge_key(e),
                g.vertex_key(s),
                g.vertex_key(d),
                g.edge_label(e),
                g.edge_props(e).clone(),
            )
            .expect("edge valid in source");
        }
    }
    p
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if f.code == 0 => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

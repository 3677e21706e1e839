//! Seeded synthetic datasets: job/file lineage (optionally with tasks and
//! machines), directed preferential attachment, and road-like grids.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeTriple, GraphSchema, Properties, PropertyGraph, PropertyValue, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid generator parameters: {0}")]
pub struct InvalidParams(pub String);

fn props<const N: usize>(kv: [(&str, PropertyValue); N]) -> Properties {
    kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn ts(t: i64) -> Properties {
    props([("ts", PropertyValue::Int(t))])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageParams {
    pub jobs: usize,
    pub files: usize,
    /// Mean number of jobs reading each file.
    pub reads_per_file: f64,
    /// Readers are drawn from the next `read_window` jobs after the writer,
    /// so lineage flows forward in time.
    pub read_window: usize,
    /// Zero for the two-type schema.
    pub tasks_per_job: usize,
    pub machines: usize,
    /// Chance that a task hands data to the job's next task.
    pub transfer_prob: f64,
    pub seed: u64,
}

impl Default for LineageParams {
    fn default() -> Self {
        LineageParams {
            jobs: 200,
            files: 400,
            reads_per_file: 1.0,
            read_window: 50,
            tasks_per_job: 0,
            machines: 0,
            transfer_prob: 0.5,
            seed: 42,
        }
    }
}

impl LineageParams {
    /// The four-type shape with 90% task and machine vertices.
    pub fn provenance(vertices: usize, seed: u64) -> Self {
        let jobs = (vertices / 50).max(1);
        LineageParams {
            jobs,
            files: jobs * 4,
            reads_per_file: 1.0,
            read_window: 50,
            tasks_per_job: 40,
            machines: jobs * 5,
            transfer_prob: 0.5,
            seed,
        }
    }
}

/// Jobs `j{i}` in time order write files `f{i}` that later jobs read.
/// Every edge carries an integer `ts`; jobs carry `cpu_hours`, files carry
/// `name`, `dir` and `bytes`.
pub fn lineage(p: &LineageParams) -> Result<PropertyGraph, InvalidParams> {
    if !(p.reads_per_file >= 0.0 && p.reads_per_file.is_finite()) {
        return Err(InvalidParams(format!("reads_per_file={}", p.reads_per_file)));
    }
    if !(0.0..=1.0).contains(&p.transfer_prob) {
        return Err(InvalidParams(format!("transfer_prob={}", p.transfer_prob)));
    }
    if p.tasks_per_job > 0 && p.machines == 0 {
        return Err(InvalidParams("tasks need at least one machine".into()));
    }
    if p.files > 0 && p.jobs == 0 {
        return Err(InvalidParams("files need at least one job to write them".into()));
    }
    let with_tasks = p.tasks_per_job > 0;
    let schema = if with_tasks {
        GraphSchema::provenance()
    } else {
        GraphSchema::lineage()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut g = PropertyGraph::new(schema);
    let jobs: Vec<VertexId> = (0..p.jobs)
        .map(|i| {
            let cpu = (rng.gen_range(0.1..100.0f64) * 100.0).round() / 100.0;
            g.add_vertex(
                format!("j{i}"),
                "Job",
                props([("cpu_hours", PropertyValue::Float(cpu))]),
            )
            .unwrap()
        })
        .collect();
    let dirs = (p.files / 20).max(1);
    let mut edge = 0usize;
    let mut next_key = |prefix: &str| {
        edge += 1;
        format!("{prefix}{edge}")
    };
    for i in 0..p.files {
        let writer = rng.gen_range(0..p.jobs);
        let dir = format!("/data/d{}", rng.gen_range(0..dirs));
        let f = g
            .add_vertex(
                format!("f{i}"),
                "File",
                props([
                    ("name", PropertyValue::Str(format!("part-{i:05}"))),
                    ("dir", PropertyValue::Str(dir)),
                    ("bytes", PropertyValue::Int(rng.gen_range(1..1_000_000))),
                ]),
            )
            .unwrap();
        let t = writer as i64 * 10;
        g.add_edge_between(next_key("w"), jobs[writer], f, "WRITES_TO", ts(t + 1))
            .unwrap();
        let later = (p.jobs - writer - 1).min(p.read_window);
        let whole = p.reads_per_file.floor() as usize;
        let readers = (whole + usize::from(rng.gen_bool(p.reads_per_file.fract()))).min(later);
        let mut picked: Vec<usize> = sample(&mut rng, later, readers).into_iter().collect();
        picked.sort_unstable();
        for r in picked {
            let reader = writer + 1 + r;
            g.add_edge_between(next_key("r"), f, jobs[reader], "IS_READ_BY", ts(reader as i64 * 10 + 2))
                .unwrap();
        }
    }
    if with_tasks {
        let machines: Vec<VertexId> = (0..p.machines)
            .map(|i| g.add_vertex(format!("m{i}"), "Machine", Properties::new()).unwrap())
            .collect();
        let mut task = 0usize;
        for (j, &job) in jobs.iter().enumerate() {
            let t0 = j as i64 * 10;
            let mut prev: Option<VertexId> = None;
            for _ in 0..p.tasks_per_job {
                let t = g.add_vertex(format!("t{task}"), "Task", Properties::new()).unwrap();
                task += 1;
                g.add_edge_between(next_key("h"), job, t, "HAS_TASK", ts(t0)).unwrap();
                let m = machines[rng.gen_range(0..machines.len())];
                g.add_edge_between(next_key("o"), t, m, "RUNS_ON", ts(t0)).unwrap();
                if let Some(prev) = prev {
                    if rng.gen_bool(p.transfer_prob) {
                        g.add_edge_between(next_key("x"), prev, t, "TRANSFERS_TO", ts(t0))
                            .unwrap();
                    }
                }
                prev = Some(t);
            }
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawParams {
    pub vertices: usize,
    /// Chance a step adds a new vertex pointing at an existing one.
    pub alpha: f64,
    /// Chance a step links two existing vertices.
    pub beta: f64,
    /// Additive smoothing on in-degree when picking targets.
    pub delta_in: f64,
    /// Additive smoothing on out-degree when picking sources.
    pub delta_out: f64,
    /// Chance each new link is answered by one in the opposite direction.
    pub reciprocity: f64,
    pub seed: u64,
}

impl PowerLawParams {
    /// Tuned so 2-path counts sit between the median and 95th-percentile
    /// degree estimates while far exceeding the uniform-random estimate.
    /// Small graphs need reciprocated links to grow hubs that large.
    pub fn new(vertices: usize, seed: u64) -> Self {
        PowerLawParams {
            vertices,
            alpha: 0.02,
            beta: 0.78,
            delta_in: 0.05,
            delta_out: 6.0,
            reciprocity: if vertices < 3_000 { 0.2 } else { 0.0 },
            seed,
        }
    }
}

/// Directed preferential attachment: each step either adds a vertex with an
/// out-edge (`alpha`), links two existing vertices (`beta`), or adds a
/// vertex with an in-edge. Endpoints are drawn in proportion to degree plus
/// smoothing, so both in- and out-degrees are heavy tailed. Single type
/// `Node`, label `LINK`, no self-loops.
pub fn power_law(p: &PowerLawParams) -> Result<PropertyGraph, InvalidParams> {
    let gamma = 1.0 - p.alpha - p.beta;
    if p.alpha < 0.0 || p.beta < 0.0 || gamma < -1e-12 || p.alpha + gamma <= 0.0 {
        return Err(InvalidParams(format!("alpha={} beta={}", p.alpha, p.beta)));
    }
    if p.delta_in < 0.0 || p.delta_out < 0.0 || (p.delta_in == 0.0 && p.delta_out == 0.0) {
        return Err(InvalidParams(
            "degree smoothing must be non-negative and not both zero".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p.reciprocity) {
        return Err(InvalidParams(format!("reciprocity={}", p.reciprocity)));
    }
    if p.vertices < 2 {
        return Err(InvalidParams(format!("vertices={}", p.vertices)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    // Degree-proportional draws use lists holding one entry per edge end.
    let mut in_ends: Vec<usize> = vec![1];
    let mut out_ends: Vec<usize> = vec![0];
    let mut edges: Vec<(usize, usize)> = vec![(0, 1)];
    let mut n = 2usize;
    let pick = |rng: &mut ChaCha8Rng, ends: &[usize], delta: f64, n: usize| -> usize {
        let total = ends.len() as f64 + delta * n as f64;
        if rng.gen::<f64>() * total < ends.len() as f64 {
            ends[rng.gen_range(0..ends.len())]
        } else {
            rng.gen_range(0..n)
        }
    };
    while n < p.vertices {
        let r: f64 = rng.gen();
        let (s, d) = if r < p.alpha {
            let d = pick(&mut rng, &in_ends, p.delta_in, n);
            n += 1;
            (n - 1, d)
        } else if r < p.alpha + p.beta {
            let s = pick(&mut rng, &out_ends, p.delta_out, n);
            let d = pick(&mut rng, &in_ends, p.delta_in, n);
            if s == d {
                continue;
            }
            (s, d)
        } else {
            let s = pick(&mut rng, &out_ends, p.delta_out, n);
            n += 1;
            (s, n - 1)
        };
        out_ends.push(s);
        in_ends.push(d);
        edges.push((s, d));
        if p.reciprocity > 0.0 && rng.gen_bool(p.reciprocity) {
            out_ends.push(d);
            in_ends.push(s);
            edges.push((d, s));
        }
    }
    let schema = GraphSchema::new(["Node"], [EdgeTriple::new("Node", "Node", "LINK")]).unwrap();
    let mut g = PropertyGraph::new(schema);
    let ids: Vec<VertexId> = (0..n)
        .map(|i| g.add_vertex(format!("n{i}"), "Node", Properties::new()).unwrap())
        .collect();
    for (i, (s, d)) in edges.into_iter().enumerate() {
        g.add_edge_between(format!("l{i}"), ids[s], ids[d], "LINK", Properties::new())
            .unwrap();
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadParams {
    pub width: usize,
    pub height: usize,
    /// Chance each street segment between grid neighbors exists.
    pub keep_prob: f64,
    pub seed: u64,
}

/// A grid of `Intersection`s joined by two-way `ROAD` edges with a random
/// `length`; missing segments keep degrees low and uneven.
pub fn road_like(p: &RoadParams) -> Result<PropertyGraph, InvalidParams> {
    if p.width == 0 || p.height == 0 {
        return Err(InvalidParams(format!("grid {}x{}", p.width, p.height)));
    }
    if !(0.0..=1.0).contains(&p.keep_prob) {
        return Err(InvalidParams(format!("keep_prob={}", p.keep_prob)));
    }
    let schema = GraphSchema::new(
        ["Intersection"],
        [EdgeTriple::new("Intersection", "Intersection", "ROAD")],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut g = PropertyGraph::new(schema);
    let at = |x: usize, y: usize| VertexId((y * p.width + x) as u32);
    for y in 0..p.height {
        for x in 0..p.width {
            g.add_vertex(format!("x{x}y{y}"), "Intersection", Properties::new())
                .unwrap();
        }
    }
    let mut e = 0usize;
    for y in 0..p.height {
        for x in 0..p.width {
            let right = (x + 1 < p.width).then(|| at(x + 1, y));
            let down = (y + 1 < p.height).then(|| at(x, y + 1));
            for w in [right, down].into_iter().flatten() {
                if !rng.gen_bool(p.keep_prob) {
                    continue;
                }
                let len = props([("length", PropertyValue::Float((rng.gen_range(50.0..500.0f64)).round()))]);
                g.add_edge_between(format!("s{e}"), at(x, y), w, "ROAD", len.clone())
                    .unwrap();
                g.add_edge_between(format!("s{}", e + 1), w, at(x, y), "ROAD", len)
                    .unwrap();
                e += 2;
            }
        }
    }
    Ok(g)
}

//! View size estimates, creation and evaluation cost, and an exact
//! simple-path oracle for small graphs.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Alpha, DegreeSummary, PropertyGraph, VertexId};
use crate::query::QueryGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("estimator domain: {0}")]
    DomainError(String),
    #[error("homogeneous estimator given {0} vertex types")]
    HeterogeneousInput(usize),
    #[error("path enumeration exceeded {limit} steps")]
    BudgetExceeded { limit: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Estimator {
    ErdosRenyi,
    HomogeneousPercentile,
    HeterogeneousPercentile,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeEstimate {
    pub estimated_edges: f64,
    pub estimator: Estimator,
    pub alpha: Option<Alpha>,
    pub k: u32,
}

impl SizeEstimate {
    pub fn exact(edges: u64, k: u32) -> Self {
        SizeEstimate {
            estimated_edges: edges as f64,
            estimator: Estimator::Exact,
            alpha: None,
            k,
        }
    }
}

fn binomial(n: u64, r: u64) -> f64 {
    let r = r.min(n - r);
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Expected k-edge simple paths in a random graph with n vertices and m
/// edges: C(n, k+1) * (m / C(n, 2))^k. `m` counts directed edges.
pub fn estimate_er(n: u64, m: u64, k: u32) -> Result<SizeEstimate, CostError> {
    if n < u64::from(k) + 1 {
        return Err(CostError::DomainError(format!("n={n} < k+1={}", k + 1)));
    }
    let pairs = binomial(n, 2);
    if m as f64 > pairs {
        return Err(CostError::DomainError(format!("m={m} exceeds C(n,2)={pairs}")));
    }
    let p = if pairs == 0.0 { 0.0 } else { m as f64 / pairs };
    Ok(SizeEstimate {
        estimated_edges: binomial(n, u64::from(k) + 1) * p.powi(k as i32),
        estimator: Estimator::ErdosRenyi,
        alpha: None,
        k,
    })
}

/// n * deg_alpha^k for a single-type graph.
pub fn estimate_homogeneous(d: &DegreeSummary, k: u32, alpha: Alpha) -> Result<SizeEstimate, CostError> {
    if d.types.len() != 1 {
        return Err(CostError::HeterogeneousInput(d.types.len()));
    }
    let s = d.types.values().next().unwrap();
    Ok(SizeEstimate {
        estimated_edges: s.count as f64 * (s.degree(alpha) as f64).powi(k as i32),
        estimator: Estimator::HomogeneousPercentile,
        alpha: Some(alpha),
        k,
    })
}

/// Sum over edge-source types t of n_t * deg_alpha(t)^k.
pub fn estimate_heterogeneous(d: &DegreeSummary, k: u32, alpha: Alpha) -> SizeEstimate {
    let total = d
        .types
        .values()
        .filter(|s| s.edge_source)
        .map(|s| s.count as f64 * (s.degree(alpha) as f64).powi(k as i32))
        .sum();
    SizeEstimate {
        estimated_edges: total,
        estimator: Estimator::HeterogeneousPercentile,
        alpha: Some(alpha),
        k,
    }
}

pub const DEFAULT_PATH_CAP: u64 = 100_000_000;

/// Directed k-edge paths with pairwise-distinct vertices, optionally with
/// typed endpoints.
pub fn exact_path_count(
    g: &PropertyGraph,
    k: u32,
    src_type: Option<&str>,
    dst_type: Option<&str>,
    cap: u64,
) -> Result<u64, CostError> {
    struct Walk<'a> {
        g: &'a PropertyGraph,
        dst_type: Option<u32>,
        any_dst: bool,
        steps: &'a AtomicU64,
        cap: u64,
    }
    impl Walk<'_> {
        fn go(&self, v: VertexId, left: u32, on_path: &mut Vec<VertexId>) -> Result<u64, CostError> {
            if left == 0 {
                let ok = self.any_dst || self.dst_type == Some(self.g.vertex_type_index(v));
                return Ok(u64::from(ok));
            }
            let mut total = 0;
            for &e in self.g.out_edges(v) {
                if self.steps.fetch_add(1, Ordering::Relaxed) >= self.cap {
                    return Err(CostError::BudgetExceeded { limit: self.cap });
                }
                let w = self.g.edge_dst(e);
                if on_path.contains(&w) {
                    continue;
                }
                on_path.push(w);
                total += self.go(w, left - 1, on_path)?;
                on_path.pop();
            }
            Ok(total)
        }
    }
    let steps = AtomicU64::new(0);
    let walk = Walk {
        g,
        dst_type: dst_type.and_then(|t| g.type_index(t)),
        any_dst: dst_type.is_none(),
        steps: &steps,
        cap,
    };
    let starts: Vec<VertexId> = match src_type {
        Some(t) => g.vertices_of_type(t).to_vec(),
        None => g.vertex_ids().collect(),
    };
    starts
        .par_iter()
        .map(|&v| walk.go(v, k, &mut vec![v]))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Stand-in for an engine cost model: anchor scans plus expected
/// expansions, using 95th-percentile out-degrees.
pub fn eval_cost(q: &QueryGraph, d: &DegreeSummary) -> f64 {
    let alpha = Alpha::P95;
    let count = |name: &str| -> f64 {
        match q.vertex_type(name) {
            Some(t) => d.get(t).map_or(0.0, |s| s.count as f64),
            None => d.total_vertices() as f64,
        }
    };
    let deg = |name: &str| -> f64 {
        match q.vertex_type(name) {
            Some(t) => d.get(t).map_or(0.0, |s| s.degree(alpha) as f64),
            None => d.types.values().map(|s| s.degree(alpha)).max().unwrap_or(0) as f64,
        }
    };
    // One anchor per connected component of the pattern.
    let names: Vec<&String> = q.vertices.keys().collect();
    let mut comp: Vec<usize> = (0..names.len()).collect();
    fn root(c: &mut [usize], i: usize) -> usize {
        if c[i] == i {
            i
        } else {
            let r = root(c, c[i]);
            c[i] = r;
            r
        }
    }
    let idx = |n: &str| names.iter().position(|m| *m == n).unwrap();
    let mut links: Vec<(usize, usize)> = q.edges.iter().map(|e| (idx(&e.src), idx(&e.dst))).collect();
    if let Some(p) = &q.path {
        links.push((idx(&p.src), idx(&p.dst)));
    }
    for (a, b) in links {
        let (ra, rb) = (root(&mut comp, a), root(&mut comp, b));
        comp[ra] = rb;
    }
    let mut anchors: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        let r = root(&mut comp, i);
        let c = count(n);
        let e = anchors.entry(r).or_insert(f64::INFINITY);
        *e = e.min(c);
    }
    let mut cost: f64 = anchors.values().sum();
    for e in &q.edges {
        cost += count(&e.src) * deg(&e.src);
    }
    if let Some(p) = &q.path {
        for len in 1..=p.max {
            cost += estimate_heterogeneous(d, len, alpha).estimated_edges;
        }
    }
    cost
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub creation_cost: f64,
    pub eval_cost_raw: f64,
    pub eval_cost_rewritten: f64,
    pub improvement: f64,
    pub value: f64,
}

impl CostReport {
    /// Creation cost is the size estimate itself (unit constant).
    pub fn new(size: &SizeEstimate, eval_cost_raw: f64, eval_cost_rewritten: f64) -> Self {
        let creation_cost = size.estimated_edges;
        let improvement = eval_cost_raw / eval_cost_rewritten.max(f64::MIN_POSITIVE);
        CostReport {
            creation_cost,
            eval_cost_raw,
            eval_cost_rewritten,
            improvement,
            value: if creation_cost > 0.0 {
                improvement / creation_cost
            } else {
                0.0
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{star, toy_lineage};
    use crate::graph::{degree_summary, EdgeTriple, GraphSchema, Properties};
    use crate::query::parse_query;

    fn cycle3() -> PropertyGraph {
        let mut g = PropertyGraph::new(GraphSchema::new(["N"], [EdgeTriple::new("N", "N", "E")]).unwrap());
        for v in ["a", "b", "c"] {
            g.add_vertex(v, "N", Properties::new()).unwrap();
        }
        for (k, x, y) in [("1", "a", "b"), ("2", "b", "c"), ("3", "c", "a")] {
            g.add_edge(k, x, y, "E", Properties::new()).unwrap();
        }
        g
    }

    #[test]
    fn erdos_renyi() {
        assert_eq!(estimate_er(3, 3, 2).unwrap().estimated_edges, 1.0);
        assert!((estimate_er(50, 120, 1).unwrap().estimated_edges - 120.0).abs() < 1e-9);
        assert_eq!(estimate_er(10, 0, 2).unwrap().estimated_edges, 0.0);
        assert!(estimate_er(2, 1, 2).is_err());
        assert!(estimate_er(3, 4, 1).is_err());
    }

    #[test]
    fn percentile_estimators() {
        let d = degree_summary(&star());
        assert_eq!(estimate_homogeneous(&d, 2, Alpha::P100).unwrap().estimated_edges, 80.0);
        assert_eq!(estimate_homogeneous(&d, 0, Alpha::P50).unwrap().estimated_edges, 5.0);
        assert_eq!(exact_path_count(&star(), 2, None, None, DEFAULT_PATH_CAP).unwrap(), 0);
        let d = degree_summary(&toy_lineage());
        assert_eq!(estimate_heterogeneous(&d, 2, Alpha::P100).estimated_edges, 3.0);
        assert!(matches!(
            estimate_homogeneous(&d, 2, Alpha::P95),
            Err(CostError::HeterogeneousInput(2))
        ));
        let single = degree_summary(&star());
        assert_eq!(
            estimate_heterogeneous(&single, 3, Alpha::P90).estimated_edges,
            estimate_homogeneous(&single, 3, Alpha::P90).unwrap().estimated_edges
        );
    }

    #[test]
    fn oracle() {
        let g = cycle3();
        assert_eq!(exact_path_count(&g, 2, None, None, DEFAULT_PATH_CAP).unwrap(), 3);
        assert_eq!(exact_path_count(&g, 1, None, None, DEFAULT_PATH_CAP).unwrap(), 3);
        assert_eq!(
            exact_path_count(&toy_lineage(), 2, Some("Job"), Some("Job"), DEFAULT_PATH_CAP).unwrap(),
            1
        );
        assert_eq!(
            exact_path_count(&g, 2, None, None, 2),
            Err(CostError::BudgetExceeded { limit: 2 })
        );
    }

    #[test]
    fn eval_cost_orders() {
        let d = degree_summary(&toy_lineage());
        let scan = parse_query("MATCH (a:Job) RETURN count(a)").unwrap();
        assert_eq!(eval_cost(&scan, &d), 2.0);
        let long = parse_query("MATCH (a:Job)-[*1..8]->(b:Job) RETURN a, b").unwrap();
        let short = parse_query("MATCH (a:Job)-[*1..4]->(b:Job) RETURN a, b").unwrap();
        assert!(eval_cost(&long, &d) > eval_cost(&short, &d));
    }
}

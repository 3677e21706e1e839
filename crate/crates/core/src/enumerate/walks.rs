//! Fixed-length walks over the schema's type graph, constrained per step
//! and per position. Rewrite soundness reduces to inclusion checks between
//! such walk sets, which a forward/backward pass decides without listing
//! the walks.

use std::collections::BTreeSet;

use crate::graph::{EdgeTriple, GraphSchema};

/// `None` admits anything.
pub type Allowed<T> = Option<BTreeSet<T>>;

#[derive(Debug, Clone, PartialEq)]
pub struct WalkSpec {
    /// Allowed triples for each step; step i joins positions i and i+1.
    pub steps: Vec<Allowed<EdgeTriple>>,
    /// Allowed vertex types at each position.
    pub positions: Vec<Allowed<String>>,
}

fn admits<T: Ord>(a: &Allowed<T>, x: &T) -> bool {
    a.as_ref().is_none_or(|s| s.contains(x))
}

/// Narrows `a` by `b`.
pub fn intersect<T: Ord + Clone>(a: &Allowed<T>, b: &Allowed<T>) -> Allowed<T> {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(x), Some(y)) => Some(x.intersection(y).cloned().collect()),
    }
}

pub fn only(t: &str) -> Allowed<String> {
    Some(BTreeSet::from([t.to_string()]))
}

/// All schema triples carrying one of `labels`; an empty set admits any.
pub fn with_labels(schema: &GraphSchema, labels: &BTreeSet<String>) -> Allowed<EdgeTriple> {
    if labels.is_empty() {
        return None;
    }
    Some(
        schema
            .edge_types()
            .iter()
            .filter(|e| labels.contains(&e.label))
            .cloned()
            .collect(),
    )
}

impl WalkSpec {
    pub fn any(len: usize) -> Self {
        WalkSpec {
            steps: vec![None; len],
            positions: vec![None; len + 1],
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn endpoints(mut self, src: Allowed<String>, dst: Allowed<String>) -> Self {
        let n = self.len();
        self.positions[0] = intersect(&self.positions[0], &src);
        self.positions[n] = intersect(&self.positions[n], &dst);
        self
    }

    fn step_ok(&self, i: usize, e: &EdgeTriple) -> bool {
        admits(&self.steps[i], e) && admits(&self.positions[i], &e.src) && admits(&self.positions[i + 1], &e.dst)
    }

    /// Triples used at each step by at least one complete walk.
    pub fn layers(&self, schema: &GraphSchema) -> Vec<BTreeSet<EdgeTriple>> {
        let n = self.len();
        let mut fwd: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); n + 1];
        fwd[0] = schema
            .vertex_types()
            .iter()
            .filter(|t| admits(&self.positions[0], *t))
            .map(String::as_str)
            .collect();
        for i in 0..n {
            fwd[i + 1] = schema
                .edge_types()
                .iter()
                .filter(|e| fwd[i].contains(e.src.as_str()) && self.step_ok(i, e))
                .map(|e| e.dst.as_str())
                .collect();
        }
        let mut bwd = fwd[n].clone();
        let mut layers = vec![BTreeSet::new(); n];
        for i in (0..n).rev() {
            layers[i] = schema
                .edge_types()
                .iter()
                .filter(|e| fwd[i].contains(e.src.as_str()) && bwd.contains(e.dst.as_str()) && self.step_ok(i, e))
                .cloned()
                .collect();
            bwd = layers[i].iter().map(|e| e.src.as_str()).collect();
        }
        layers
    }

    /// Types a zero-length walk may sit on.
    fn standing(&self, schema: &GraphSchema) -> BTreeSet<String> {
        schema
            .vertex_types()
            .iter()
            .filter(|t| admits(&self.positions[0], *t))
            .cloned()
            .collect()
    }

    pub fn exists(&self, schema: &GraphSchema) -> bool {
        if self.is_empty() {
            return !self.standing(schema).is_empty();
        }
        self.layers(schema).last().is_some_and(|l| !l.is_empty())
    }

    /// Whether every walk admitted by `self` is admitted by `other`.
    pub fn implies(&self, other: &WalkSpec, schema: &GraphSchema) -> bool {
        assert_eq!(self.len(), other.len(), "walk lengths differ");
        if self.is_empty() {
            return self.standing(schema).iter().all(|t| admits(&other.positions[0], t));
        }
        self.layers(schema)
            .iter()
            .enumerate()
            .all(|(i, layer)| layer.iter().all(|e| other.step_ok(i, e)))
    }
}

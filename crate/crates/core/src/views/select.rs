//! Budgeted view selection as a 0-1 knapsack, solved exactly by
//! branch-and-bound.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;

use super::ViewInstance;
use crate::cost::SizeEstimate;
use crate::enumerate::RewritePlan;

#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub view: ViewInstance,
    pub weight: SizeEstimate,
    pub value: f64,
    /// Rewrites this view enables, keyed by query name.
    pub per_query_plans: BTreeMap<String, RewritePlan>,
}

impl Candidate {
    /// Knapsack weight: the size estimate rounded up, at least one edge.
    pub fn int_weight(&self) -> u64 {
        int_weight(self.weight.estimated_edges)
    }
}

pub fn int_weight(edges: f64) -> u64 {
    if edges.is_finite() {
        (edges.ceil() as u64).max(1)
    } else {
        u64::MAX
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    /// Indices into the candidate slice, ascending.
    pub chosen: Vec<usize>,
    pub total_value: f64,
    pub total_weight: u64,
    pub nodes_explored: u64,
}

fn same_value(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Better of two feasible sets: more value, then less weight, then the
/// lexicographically smaller sorted id list.
fn better(a: (f64, u64, &[String]), b: (f64, u64, &[String])) -> bool {
    if !same_value(a.0, b.0) {
        return a.0 > b.0;
    }
    match a.1.cmp(&b.1) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.2 < b.2,
    }
}

/// Items as (id, weight, value); returns the optimal index set.
pub fn knapsack(items: &[(String, u64, f64)], budget: u64) -> Selection {
    // Visit in decreasing value density so the fractional bound is tight.
    let mut order: Vec<usize> = (0..items.len())
        .filter(|&i| items[i].1 <= budget && items[i].2 > 0.0)
        .collect();
    order.sort_by(|&a, &b| {
        let da = items[a].2 / items[a].1 as f64;
        let db = items[b].2 / items[b].1 as f64;
        db.total_cmp(&da).then(items[a].0.cmp(&items[b].0))
    });

    struct Search<'a> {
        items: &'a [(String, u64, f64)],
        order: Vec<usize>,
        budget: u64,
        taken: Vec<usize>,
        best: Vec<usize>,
        best_ids: Vec<String>,
        best_value: f64,
        best_weight: u64,
        nodes: u64,
    }

    impl Search<'_> {
        fn bound(&self, from: usize, room: u64, value: f64) -> f64 {
            let mut room = room as f64;
            let mut v = value;
            for &i in &self.order[from..] {
                let (_, w, val) = &self.items[i];
                if (*w as f64) <= room {
                    room -= *w as f64;
                    v += val;
                } else {
                    return v + val * room / *w as f64;
                }
            }
            v
        }

        fn offer(&mut self, value: f64, weight: u64) {
            let mut ids: Vec<String> = self.taken.iter().map(|&i| self.items[i].0.clone()).collect();
            ids.sort();
            if better(
                (value, weight, &ids),
                (self.best_value, self.best_weight, &self.best_ids),
            ) {
                self.best = self.taken.clone();
                self.best_ids = ids;
                self.best_value = value;
                self.best_weight = weight;
            }
        }

        fn go(&mut self, pos: usize, weight: u64, value: f64) {
            self.nodes += 1;
            if pos == self.order.len() {
                self.offer(value, weight);
                return;
            }
            // Ties on value are still explored so the tie rule can apply.
            let ub = self.bound(pos, self.budget - weight, value);
            if ub < self.best_value && !same_value(ub, self.best_value) {
                return;
            }
            let i = self.order[pos];
            let (_, w, v) = self.items[i];
            if weight + w <= self.budget {
                self.taken.push(i);
                self.go(pos + 1, weight + w, value + v);
                self.taken.pop();
            }
            self.go(pos + 1, weight, value);
        }
    }

    let mut s = Search {
        items,
        order,
        budget,
        taken: Vec::new(),
        best: Vec::new(),
        best_ids: Vec::new(),
        best_value: 0.0,
        best_weight: 0,
        nodes: 0,
    };
    s.go(0, 0, 0.0);
    let mut chosen = s.best;
    chosen.sort_unstable();
    Selection {
        chosen,
        total_value: s.best_value,
        total_weight: s.best_weight,
        nodes_explored: s.nodes,
    }
}

/// Picks the most valuable candidate set whose summed weight fits `budget`.
pub fn select_views(candidates: &[Candidate], budget: u64) -> Selection {
    let items: Vec<(String, u64, f64)> = candidates
        .iter()
        .map(|c| (c.view.id(), c.int_weight(), c.value))
        .collect();
    knapsack(&items, budget)
}

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PropertyGraph;

/// Out-degree percentile used by the size estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u32", try_from = "u32")]
#[derive(Default)]
pub enum Alpha {
    P50,
    P90,
    #[default]
    P95,
    P100,
}

impl Alpha {
    pub const ALL: [Alpha; 4] = [Alpha::P50, Alpha::P90, Alpha::P95, Alpha::P100];

    pub fn percent(self) -> u32 {
        match self {
            Alpha::P50 => 50,
            Alpha::P90 => 90,
            Alpha::P95 => 95,
            Alpha::P100 => 100,
        }
    }
}

impl From<Alpha> for u32 {
    fn from(a: Alpha) -> u32 {
        a.percent()
    }
}

impl TryFrom<u32> for Alpha {
    type Error = String;

    fn try_from(v: u32) -> Result<Self, Self::Error> {
        match v {
            50 => Ok(Alpha::P50),
            90 => Ok(Alpha::P90),
            95 => Ok(Alpha::P95),
            100 => Ok(Alpha::P100),
            other => Err(format!("alpha must be one of 50, 90, 95, 100 (got {other})")),
        }
    }
}

impl FromStr for Alpha {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: u32 = s.trim().parse().map_err(|_| format!("invalid alpha '{s}'"))?;
        Alpha::try_from(v)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.percent())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeDegreeStats {
    /// n_t
    pub count: u64,
    pub deg50: u64,
    pub deg90: u64,
    pub deg95: u64,
    pub deg100: u64,
    /// Whether the type is the domain of at least one schema edge.
    pub edge_source: bool,
}

impl TypeDegreeStats {
    pub fn degree(&self, alpha: Alpha) -> u64 {
        match alpha {
            Alpha::P50 => self.deg50,
            Alpha::P90 => self.deg90,
            Alpha::P95 => self.deg95,
            Alpha::P100 => self.deg100,
        }
    }
}

/// Per vertex type: cardinality and coarse out-degree percentiles.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DegreeSummary {
    pub types: BTreeMap<String, TypeDegreeStats>,
}

impl DegreeSummary {
    pub fn get(&self, t: &str) -> Option<&TypeDegreeStats> {
        self.types.get(t)
    }

    pub fn total_vertices(&self) -> u64 {
        self.types.values().map(|s| s.count).sum()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.types.len() <= 1
    }
}

/// Nearest-rank percentile over an ascending slice: the value at rank
/// ceil(p/100 * N).
pub(crate) fn nearest_rank(sorted: &[u64], percent: u32) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let n = sorted.len() as u64;
    let rank = (percent as u64 * n).div_ceil(100).max(1);
    sorted[(rank - 1) as usize]
}

/// Compute per-type out-degree percentiles, zero-degree vertices included.
pub fn degree_summary(g: &PropertyGraph) -> DegreeSummary {
    let sources = g.schema().edge_source_types();
    let types = g
        .type_names()
        .iter()
        .map(|t| {
            let mut degs: Vec<u64> = g.vertices_of_type(t).iter().map(|&v| g.out_degree(v) as u64).collect();
            degs.sort_unstable();
            let stats = TypeDegreeStats {
                count: degs.len() as u64,
                deg50: nearest_rank(&degs, 50),
                deg90: nearest_rank(&degs, 90),
                deg95: nearest_rank(&degs, 95),
                deg100: nearest_rank(&degs, 100),
                edge_source: sources.contains(t.as_str()),
            };
            (t.clone(), stats)
        })
        .collect();
    DegreeSummary { types }
}

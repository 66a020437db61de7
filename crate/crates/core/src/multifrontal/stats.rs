use serde::Serialize;

use super::front::Representation;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeStats {
    pub n_s: usize,
    pub n_u: usize,
    pub representation: Representation,
    pub max_rank: usize,
    /// Stored scalars of the node's factor.
    pub entries: usize,
}

impl Default for NodeStats {
    fn default() -> Self {
        Self {
            n_s: 0,
            n_u: 0,
            representation: Representation::Dense,
            max_rank: 0,
            entries: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timings {
    pub analysis_seconds: f64,
    pub factor_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorStats {
    pub n: usize,
    pub nnz: usize,
    /// Total stored factor entries.
    pub fill: usize,
    pub peak_front: usize,
    pub flops: f64,
    pub nodes: Vec<NodeStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl FactorStats {
    pub fn without_timings(mut self) -> Self {
        self.timings = None;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }
}

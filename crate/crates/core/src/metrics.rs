//! Similarity and happiness summaries of a network state.

use serde::{Deserialize, Serialize};

use crate::graph::{Group, GroupAssignment, Network};
use crate::model::{is_happy, ModelParams};

/// Means of the per-agent ratio `same / total`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub overall: f64,
    pub group1: f64,
    pub group2: f64,
    pub happy_count: usize,
    /// Agents with no neighbours; their ratio counts as 1.
    pub isolated: usize,
}

/// Unweighted means over agents (not a ratio of edge sums). Empty groups
/// report `NaN` for their mean.
pub fn similarity_report(
    net: &Network,
    groups: &GroupAssignment,
    params: &ModelParams,
) -> SimilarityReport {
    let mut sums = [0.0f64; 2];
    let mut counts = [0usize; 2];
    let mut happy_count = 0;
    let mut isolated = 0;
    for a in 0..net.n() {
        let g = groups.group(a);
        let s = net.neighbor_stats(groups, a);
        let ratio = if s.total == 0 {
            isolated += 1;
            1.0
        } else {
            s.same as f64 / s.total as f64
        };
        let slot = (g == Group::Two) as usize;
        sums[slot] += ratio;
        counts[slot] += 1;
        if is_happy(s.same, s.total, params.tolerance(g)) {
            happy_count += 1;
        }
    }
    let mean = |i: usize| sums[i] / counts[i] as f64;
    let total = counts[0] + counts[1];
    SimilarityReport {
        overall: if total == 0 {
            f64::NAN
        } else {
            (sums[0] + sums[1]) / total as f64
        },
        group1: mean(0),
        group2: mean(1),
        happy_count,
        isolated,
    }
}

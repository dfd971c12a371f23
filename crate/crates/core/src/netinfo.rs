//! Mutual information of link co-occurrence between two graphs on the same vertices.
//!
//! Each unordered vertex pair is a sample of two binary variables: linked in the first
//! graph, linked in the second. Probabilities are frequencies over the `N(N-1)/2` pairs.
//! All logarithms are natural, so information is in nats.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, GraphSide, Result};
use crate::filtgraph::FilteredGraph;

/// Joint distribution of the two link indicators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointProbabilities {
    pub p11: f64,
    pub p10: f64,
    pub p01: f64,
    pub p00: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkMIResult {
    pub n_vertices: usize,
    pub n1: usize,
    pub n2: usize,
    /// Links present in both graphs.
    pub n12: usize,
    pub joint: JointProbabilities,
    /// Marginal link probabilities `p1(1)` and `p2(1)`.
    pub p1: f64,
    pub p2: f64,
    pub mutual_information: f64,
    pub entropy1: f64,
    pub entropy2: f64,
    /// `I / sqrt(H1 H2)`; `None` when either entropy is zero.
    pub normalized: Option<f64>,
}

impl LinkMIResult {
    pub fn is_degenerate(&self) -> bool {
        self.normalized.is_none()
    }
}

fn xlogy_ratio(p: f64, q: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * (p / q).ln()
    }
}

fn entropy(p: f64) -> f64 {
    -xlogy_ratio(p, 1.0) - xlogy_ratio(1.0 - p, 1.0)
}

/// Closed-form result from link counts. Never fails on degenerate entropies.
pub fn link_mi_from_counts(n_vertices: usize, n1: usize, n2: usize, n12: usize) -> Result<LinkMIResult> {
    if n_vertices < 2 {
        return Err(Error::TooFewSeries {
            needed: 2,
            found: n_vertices,
        });
    }
    let pairs = n_vertices * (n_vertices - 1) / 2;
    if n1 > pairs || n2 > pairs || n12 > n1.min(n2) || n1 + n2 - n12 > pairs {
        return Err(Error::InvalidArgument(format!(
            "inconsistent link counts n1={n1} n2={n2} n12={n12} for {pairs} pairs"
        )));
    }
    let denom = (n_vertices * n_vertices - n_vertices) as f64;
    let p1 = 2.0 * n1 as f64 / denom;
    let p2 = 2.0 * n2 as f64 / denom;
    let joint = JointProbabilities {
        p11: 2.0 * n12 as f64 / denom,
        p10: 2.0 * (n1 - n12) as f64 / denom,
        p01: 2.0 * (n2 - n12) as f64 / denom,
        p00: 1.0 - 2.0 * (n1 + n2 - n12) as f64 / denom,
    };
    // Rounding near independence can leave a value of order -1e-17.
    let mi = (xlogy_ratio(joint.p11, p1 * p2)
        + xlogy_ratio(joint.p10, p1 * (1.0 - p2))
        + xlogy_ratio(joint.p01, (1.0 - p1) * p2)
        + xlogy_ratio(joint.p00, (1.0 - p1) * (1.0 - p2)))
    .max(0.0);
    let entropy1 = entropy(p1);
    let entropy2 = entropy(p2);
    let normalized = if entropy1 > 0.0 && entropy2 > 0.0 {
        Some(mi / (entropy1 * entropy2).sqrt())
    } else {
        None
    };
    Ok(LinkMIResult {
        n_vertices,
        n1,
        n2,
        n12,
        joint,
        p1,
        p2,
        mutual_information: mi,
        entropy1,
        entropy2,
        normalized,
    })
}

/// Shared-link count after matching vertices by label.
fn shared_links(g1: &FilteredGraph, g2: &FilteredGraph) -> Result<usize> {
    if g1.n_vertices() != g2.n_vertices() {
        return Err(Error::LabelMismatch);
    }
    let index: HashMap<&str, usize> = g1
        .labels()
        .iter()
        .enumerate()
        .map(|(k, l)| (l.as_str(), k))
        .collect();
    let remap = g2
        .labels()
        .iter()
        .map(|l| index.get(l.as_str()).copied().ok_or(Error::LabelMismatch))
        .collect::<Result<Vec<_>>>()?;
    let first: HashSet<(usize, usize)> = g1.edge_pairs().into_iter().collect();
    Ok(g2
        .edges()
        .iter()
        .filter(|e| {
            let (a, b) = (remap[e.i], remap[e.j]);
            first.contains(&(a.min(b), a.max(b)))
        })
        .count())
}

/// Link mutual information between two graphs with the same label set.
///
/// When either graph is empty or complete its entropy is zero; the error then carries
/// the full result including the raw mutual information.
pub fn link_mutual_information(g1: &FilteredGraph, g2: &FilteredGraph) -> Result<LinkMIResult> {
    let n12 = shared_links(g1, g2)?;
    let result = link_mi_from_counts(g1.n_vertices(), g1.n_edges(), g2.n_edges(), n12)?;
    if result.entropy1 <= 0.0 {
        return Err(Error::ZeroEntropy {
            side: GraphSide::First,
            result: Box::new(result),
        });
    }
    if result.entropy2 <= 0.0 {
        return Err(Error::ZeroEntropy {
            side: GraphSide::Second,
            result: Box::new(result),
        });
    }
    Ok(result)
}

/// One result per consecutive pair; entry `k` compares `graphs[k]` with `graphs[k + 1]`.
pub fn rolling_mi(graphs: &[FilteredGraph]) -> Result<Vec<LinkMIResult>> {
    if graphs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 graphs, got {}",
            graphs.len()
        )));
    }
    graphs
        .windows(2)
        .map(|w| link_mutual_information(&w[0], &w[1]))
        .collect()
}

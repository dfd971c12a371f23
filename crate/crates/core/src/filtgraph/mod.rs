//! Correlation-filtered graphs: minimum spanning tree and planar maximally filtered graph.

pub mod planarity;

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::corr::CorrelationMatrix;
use crate::error::{Error, Result};

pub use planarity::is_planar_edges;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    Mst,
    Pmfg,
    Other,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Mst => "MST",
            GraphKind::Pmfg => "PMFG",
            GraphKind::Other => "OTHER",
        })
    }
}

/// Undirected weighted edge with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Undirected weighted graph on a fixed labelled vertex set, edges sorted by `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredGraph {
    labels: Vec<String>,
    edges: Vec<Edge>,
    kind: GraphKind,
}

impl FilteredGraph {
    /// Builds a graph, normalising each edge to `i < j`. Rejects self-loops and duplicates.
    pub fn new(labels: Vec<String>, edges: Vec<Edge>, kind: GraphKind) -> Result<Self> {
        let n = labels.len();
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            let (i, j) = (e.i.min(e.j), e.i.max(e.j));
            if j >= n {
                return Err(Error::InvalidGraph(format!("vertex {j} out of range")));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop on {}", labels[i])));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge {}-{}",
                    labels[i], labels[j]
                )));
            }
            normalized.push(Edge { i, j, weight: e.weight });
        }
        normalized.sort_by_key(|e| (e.i, e.j));
        Ok(FilteredGraph {
            labels,
            edges: normalized,
            kind,
        })
    }

    /// Builds a graph from label pairs, e.g. parsed from an edge list.
    pub fn from_labelled_edges(
        labels: Vec<String>,
        edges: &[(String, String, f64)],
        kind: GraphKind,
    ) -> Result<Self> {
        let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(k, l)| (l.as_str(), k)).collect();
        let lookup = |l: &str| index.get(l).copied().ok_or_else(|| Error::UnknownLabel(l.to_string()));
        let resolved = edges
            .iter()
            .map(|(a, b, w)| {
                Ok(Edge {
                    i: lookup(a)?,
                    j: lookup(b)?,
                    weight: *w,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, resolved, kind)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn n_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.i, e.j)).collect()
    }

    pub fn contains_edge(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search_by_key(&key, |e| (e.i, e.j)).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices()];
        for e in &self.edges {
            deg[e.i] += 1;
            deg[e.j] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_vertices();
        if n == 0 {
            return true;
        }
        let mut dsu = DisjointSets::new(n);
        let mut components = n;
        for e in &self.edges {
            if dsu.union(e.i, e.j) {
                components -= 1;
            }
        }
        components == 1
    }
}

/// Exact planarity test.
pub fn is_planar(graph: &FilteredGraph) -> bool {
    is_planar_edges(graph.n_vertices(), &graph.edge_pairs())
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// All pairs `i < j` sorted by decreasing correlation, ties by `(i, j)`.
pub fn ranked_pairs(matrix: &CorrelationMatrix) -> Vec<Edge> {
    let n = matrix.n();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push(Edge {
                i,
                j,
                weight: matrix.get(i, j),
            });
        }
    }
    pairs.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    pairs
}

/// Maximum-correlation spanning tree by greedy scan of ranked pairs.
pub fn mst(matrix: &CorrelationMatrix) -> Result<FilteredGraph> {
    let n = matrix.n();
    if n < 2 {
        return Err(Error::TooFewSeries { needed: 2, found: n });
    }
    let mut dsu = DisjointSets::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    for e in ranked_pairs(matrix) {
        if dsu.union(e.i, e.j) {
            edges.push(e);
            if edges.len() == n - 1 {
                break;
            }
        }
    }
    FilteredGraph::new(matrix.labels().to_vec(), edges, GraphKind::Mst)
}

/// Planar maximally filtered graph: ranked pairs are kept while the graph stays planar,
/// stopping at `3(N - 2)` edges.
pub fn pmfg(matrix: &CorrelationMatrix) -> Result<FilteredGraph> {
    let n = matrix.n();
    if n < 3 {
        return Err(Error::TooFewSeries { needed: 3, found: n });
    }
    let target = 3 * (n - 2);
    let mut kept: Vec<Edge> = Vec::with_capacity(target);
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(target);
    let mut dsu = DisjointSets::new(n);
    for e in ranked_pairs(matrix) {
        if kept.len() == target {
            break;
        }
        // Joining two components can never break planarity.
        let bridges = dsu.find(e.i) != dsu.find(e.j);
        pairs.push((e.i, e.j));
        if bridges || is_planar_edges(n, &pairs) {
            dsu.union(e.i, e.j);
            kept.push(e);
        } else {
            pairs.pop();
        }
    }
    FilteredGraph::new(matrix.labels().to_vec(), kept, GraphKind::Pmfg)
}

/// Degree of every vertex per graph, columns in `ordering` (a permutation of the labels).
pub fn degree_profile(graphs: &[FilteredGraph], ordering: &[String]) -> Result<Vec<Vec<usize>>> {
    let Some(first) = graphs.first() else {
        return Ok(Vec::new());
    };
    let index: HashMap<&str, usize> = first
        .labels()
        .iter()
        .enumerate()
        .map(|(k, l)| (l.as_str(), k))
        .collect();
    if ordering.len() != index.len() {
        return Err(Error::LabelMismatch);
    }
    let mut columns = Vec::with_capacity(ordering.len());
    let mut used = HashSet::new();
    for label in ordering {
        let k = *index.get(label.as_str()).ok_or_else(|| Error::UnknownLabel(label.clone()))?;
        if !used.insert(k) {
            return Err(Error::InvalidArgument(format!("label {label} repeated in ordering")));
        }
        columns.push(k);
    }
    graphs
        .iter()
        .map(|g| {
            if g.labels() != first.labels() {
                return Err(Error::LabelMismatch);
            }
            let deg = g.degrees();
            Ok(columns.iter().map(|&k| deg[k]).collect())
        })
        .collect()
}

//! Two-level map equation and a seeded greedy optimizer for it.
//!
//! The random walk is the undirected, non-teleporting walk on the weighted graph: vertex
//! visit rates are `s / 2W` and every edge carries `w / 2W` of flow in each direction.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filtgraph::FilteredGraph;

pub const DEFAULT_WEIGHT_FLOOR: f64 = 1e-6;
pub const DEFAULT_RUNS: usize = 100;

const MIN_IMPROVEMENT: f64 = 1e-10;
const MAX_SWEEPS: usize = 1000;
const MAX_OUTER_ROUNDS: usize = 50;

/// How edge weights for the random walk are derived from the graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weighting {
    /// `max(weight, floor)`.
    Correlation { floor: f64 },
    /// Every edge has weight one.
    Unweighted,
}

impl Default for Weighting {
    fn default() -> Self {
        Weighting::Correlation {
            floor: DEFAULT_WEIGHT_FLOOR,
        }
    }
}

/// Stationary flow of the undirected random walk on a connected graph.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    node_flow: Vec<f64>,
    /// Per-direction edge flow to each neighbour.
    adj: Vec<Vec<(usize, f64)>>,
}

impl FlowNetwork {
    pub fn new(graph: &FilteredGraph, weighting: Weighting) -> Result<Self> {
        let n = graph.n_vertices();
        if graph.n_edges() == 0 {
            return Err(Error::NonPositiveWeight);
        }
        let weight = |w: f64| match weighting {
            Weighting::Correlation { floor } => w.max(floor),
            Weighting::Unweighted => 1.0,
        };
        let total: f64 = graph.edges().iter().map(|e| weight(e.weight)).sum();
        if !(total > 0.0) || graph.edges().iter().any(|e| !(weight(e.weight) >= 0.0)) {
            return Err(Error::NonPositiveWeight);
        }
        if !graph.is_connected() {
            return Err(Error::Disconnected);
        }
        let mut adj = vec![Vec::new(); n];
        let mut node_flow = vec![0.0; n];
        for e in graph.edges() {
            let f = weight(e.weight) / (2.0 * total);
            adj[e.i].push((e.j, f));
            adj[e.j].push((e.i, f));
            node_flow[e.i] += f;
            node_flow[e.j] += f;
        }
        Ok(FlowNetwork { node_flow, adj })
    }

    pub fn n(&self) -> usize {
        self.node_flow.len()
    }

    /// Stationary visit rate of each vertex.
    pub fn node_flow(&self) -> &[f64] {
        &self.node_flow
    }
}

fn plogp(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Codelength in bits of `assignment` (any module ids) on `network`:
/// `L = q H(Q) + sum_m p_m H(P_m)`.
pub fn codelength(network: &FlowNetwork, assignment: &[usize]) -> Result<f64> {
    if assignment.len() != network.n() {
        return Err(Error::InvalidPartition(format!(
            "{} assignments for {} vertices",
            assignment.len(),
            network.n()
        )));
    }
    let mut exit: BTreeMap<usize, f64> = BTreeMap::new();
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, &m) in assignment.iter().enumerate() {
        members.entry(m).or_default().push(v);
        let e = exit.entry(m).or_insert(0.0);
        for &(u, f) in &network.adj[v] {
            if assignment[u] != m {
                *e += f;
            }
        }
    }
    let q: f64 = exit.values().sum();
    let mut index_entropy = 0.0;
    if q > 0.0 {
        for &qm in exit.values() {
            if qm > 0.0 {
                index_entropy -= (qm / q) * (qm / q).log2();
            }
        }
    }
    let mut total = q * index_entropy;
    for (m, vs) in &members {
        let qm = exit[m];
        let pm = qm + vs.iter().map(|&v| network.node_flow[v]).sum::<f64>();
        let mut h = 0.0;
        for x in std::iter::once(qm).chain(vs.iter().map(|&v| network.node_flow[v])) {
            if x > 0.0 {
                h -= (x / pm) * (x / pm).log2();
            }
        }
        total += pm * h;
    }
    Ok(total)
}

/// Map-equation codelength of a vertex assignment on a filtered graph.
pub fn map_equation(graph: &FilteredGraph, assignment: &[usize], weighting: Weighting) -> Result<f64> {
    codelength(&FlowNetwork::new(graph, weighting)?, assignment)
}

/// Best partition found by [`detect_communities`].
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Module of each vertex; ids are contiguous and ordered by decreasing module flow.
    pub assignment: Vec<usize>,
    /// Codelength in bits.
    pub codelength: f64,
    pub n_modules: usize,
    /// 1-based rank of each vertex inside its module by decreasing visit rate.
    pub flow_rank: Vec<usize>,
    /// Total visit rate of each module.
    pub module_flow: Vec<f64>,
}

impl Partition {
    pub fn members(&self, module: usize) -> Vec<usize> {
        let mut vs: Vec<usize> = (0..self.assignment.len())
            .filter(|&v| self.assignment[v] == module)
            .collect();
        vs.sort_by_key(|&v| self.flow_rank[v]);
        vs
    }

    /// Vertex indices ordered by module, then by rank inside the module.
    pub fn vertex_order(&self) -> Vec<usize> {
        (0..self.n_modules).flat_map(|m| self.members(m)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommunityOptions {
    pub n_runs: usize,
    pub seed: u64,
    pub weighting: Weighting,
}

impl Default for CommunityOptions {
    fn default() -> Self {
        CommunityOptions {
            n_runs: DEFAULT_RUNS,
            seed: 42,
            weighting: Weighting::default(),
        }
    }
}

/// Minimum-codelength partition over `n_runs` seeded optimizations.
pub fn detect_communities(graph: &FilteredGraph, options: &CommunityOptions) -> Result<Partition> {
    if options.n_runs == 0 {
        return Err(Error::InvalidArgument("n_runs must be at least 1".into()));
    }
    let network = FlowNetwork::new(graph, options.weighting)?;
    let candidates = (0..options.n_runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(run as u64);
            let raw = optimize(&network, &mut rng);
            canonical_partition(&network, &raw)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (k, c) in candidates.iter().enumerate() {
        if c.codelength < candidates[best].codelength {
            best = k;
        }
    }
    Ok(candidates.into_iter().nth(best).expect("at least one run"))
}

/// Relabels modules by decreasing flow (ties: smallest vertex) and ranks vertices by flow.
pub fn canonical_partition(network: &FlowNetwork, assignment: &[usize]) -> Result<Partition> {
    let n = network.n();
    if assignment.len() != n {
        return Err(Error::InvalidPartition(format!(
            "{} assignments for {n} vertices",
            assignment.len()
        )));
    }
    let mut modules: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (v, &m) in assignment.iter().enumerate() {
        let entry = modules.entry(m).or_insert((0.0, v));
        entry.0 += network.node_flow[v];
    }
    let mut order: Vec<(usize, f64, usize)> = modules.iter().map(|(&m, &(f, v))| (m, f, v)).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.2.cmp(&b.2)));
    let relabel: BTreeMap<usize, usize> = order.iter().enumerate().map(|(k, o)| (o.0, k)).collect();
    let assignment: Vec<usize> = assignment.iter().map(|m| relabel[m]).collect();
    let module_flow: Vec<f64> = order.iter().map(|o| o.1).collect();

    let mut flow_rank = vec![0; n];
    for m in 0..order.len() {
        let mut vs: Vec<usize> = (0..n).filter(|&v| assignment[v] == m).collect();
        vs.sort_by(|&a, &b| network.node_flow[b].total_cmp(&network.node_flow[a]).then(a.cmp(&b)));
        for (rank, v) in vs.into_iter().enumerate() {
            flow_rank[v] = rank + 1;
        }
    }
    let codelength = codelength(network, &assignment)?;
    Ok(Partition {
        n_modules: order.len(),
        assignment,
        codelength,
        flow_rank,
        module_flow,
    })
}

/// One level of the optimization: leaf vertices or aggregated modules.
struct Level {
    flow: Vec<f64>,
    exit: Vec<f64>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl Level {
    fn leaf(network: &FlowNetwork) -> Self {
        let exit = network.adj.iter().map(|a| a.iter().map(|x| x.1).sum()).collect();
        Level {
            flow: network.node_flow.clone(),
            exit,
            adj: network.adj.clone(),
        }
    }

    fn n(&self) -> usize {
        self.flow.len()
    }

    /// Collapses each non-empty module into one node; returns the node index per module.
    fn aggregate(&self, state: &ModuleState) -> (Level, Vec<usize>) {
        let mut index = vec![usize::MAX; state.flow.len()];
        let mut k = 0;
        for m in 0..state.flow.len() {
            if state.members[m] > 0 {
                index[m] = k;
                k += 1;
            }
        }
        let mut links: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
        let mut flow = vec![0.0; k];
        let mut exit = vec![0.0; k];
        for m in 0..state.flow.len() {
            if index[m] != usize::MAX {
                flow[index[m]] = state.flow[m];
                exit[index[m]] = state.exit[m];
            }
        }
        for v in 0..self.n() {
            let a = index[state.module[v]];
            for &(u, f) in &self.adj[v] {
                let b = index[state.module[u]];
                if a != b {
                    *links[a].entry(b).or_insert(0.0) += f;
                }
            }
        }
        let adj = links.into_iter().map(|l| l.into_iter().collect()).collect();
        (Level { flow, exit, adj }, index)
    }
}

struct ModuleState {
    module: Vec<usize>,
    flow: Vec<f64>,
    exit: Vec<f64>,
    members: Vec<usize>,
    empty: Vec<usize>,
    sum_exit: f64,
}

impl ModuleState {
    fn from_assignment(level: &Level, assignment: &[usize]) -> Self {
        let n = level.n();
        let mut state = ModuleState {
            module: assignment.to_vec(),
            flow: vec![0.0; n],
            exit: vec![0.0; n],
            members: vec![0; n],
            empty: Vec::new(),
            sum_exit: 0.0,
        };
        for v in 0..n {
            let m = assignment[v];
            state.flow[m] += level.flow[v];
            state.members[m] += 1;
            for &(u, f) in &level.adj[v] {
                if assignment[u] != m {
                    state.exit[m] += f;
                }
            }
        }
        state.empty = (0..n).rev().filter(|&m| state.members[m] == 0).collect();
        state.sum_exit = state.exit.iter().sum();
        state
    }

    fn singletons(level: &Level) -> Self {
        Self::from_assignment(level, &(0..level.n()).collect::<Vec<_>>())
    }

    /// Codelength change of moving a node out of `from` into `to`.
    #[allow(clippy::too_many_arguments)]
    fn delta(&self, node_flow: f64, node_exit: f64, from: usize, to: usize, link_from: f64, link_to: f64) -> f64 {
        let (qa, pa) = (self.exit[from], self.flow[from]);
        let (qb, pb) = (self.exit[to], self.flow[to]);
        let qa2 = qa - node_exit + 2.0 * link_from;
        let qb2 = qb + node_exit - 2.0 * link_to;
        let pa2 = pa - node_flow;
        let pb2 = pb + node_flow;
        let sum2 = self.sum_exit - qa - qb + qa2 + qb2;
        (plogp(sum2) - plogp(self.sum_exit)) - 2.0 * (plogp(qa2) + plogp(qb2) - plogp(qa) - plogp(qb))
            + (plogp(qa2 + pa2) + plogp(qb2 + pb2) - plogp(qa + pa) - plogp(qb + pb))
    }

    fn apply(&mut self, v: usize, level: &Level, to: usize, link_from: f64, link_to: f64) {
        let from = self.module[v];
        let qa2 = self.exit[from] - level.exit[v] + 2.0 * link_from;
        let qb2 = self.exit[to] + level.exit[v] - 2.0 * link_to;
        self.sum_exit += qa2 + qb2 - self.exit[from] - self.exit[to];
        self.exit[from] = qa2.max(0.0);
        self.exit[to] = qb2.max(0.0);
        self.flow[from] -= level.flow[v];
        self.flow[to] += level.flow[v];
        self.members[from] -= 1;
        self.members[to] += 1;
        self.module[v] = to;
        if self.members[from] == 0 {
            self.flow[from] = 0.0;
            self.exit[from] = 0.0;
            self.empty.push(from);
        }
        if let Some(pos) = self.empty.iter().position(|&m| m == to) {
            self.empty.swap_remove(pos);
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Candidates {
    /// Modules of neighbouring nodes.
    Neighbours,
    /// Every non-empty module plus a fresh empty one.
    All,
}

/// Repeated sweeps of best single-node moves in random order. Returns whether any node moved.
fn move_nodes(level: &Level, state: &mut ModuleState, rng: &mut ChaCha8Rng, candidates: Candidates) -> bool {
    let n = level.n();
    let mut order: Vec<usize> = (0..n).collect();
    let mut link = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any = false;
    for _ in 0..MAX_SWEEPS {
        order.shuffle(rng);
        let mut moved = false;
        for &v in &order {
            let from = state.module[v];
            for &(u, f) in &level.adj[v] {
                let m = state.module[u];
                if link[m] == 0.0 {
                    touched.push(m);
                }
                link[m] += f;
            }
            let link_from = link[from];
            let mut best = (0.0, usize::MAX, 0.0);
            let consider = |to: usize, link_to: f64, best: &mut (f64, usize, f64)| {
                if to == from {
                    return;
                }
                let d = state.delta(level.flow[v], level.exit[v], from, to, link_from, link_to);
                if d < best.0 {
                    *best = (d, to, link_to);
                }
            };
            match candidates {
                Candidates::Neighbours => {
                    for &m in &touched {
                        consider(m, link[m], &mut best);
                    }
                }
                Candidates::All => {
                    for m in 0..n {
                        if state.members[m] > 0 {
                            consider(m, link[m], &mut best);
                        }
                    }
                    if state.members[from] > 1 {
                        if let Some(&m) = state.empty.last() {
                            consider(m, 0.0, &mut best);
                        }
                    }
                }
            }
            for &m in &touched {
                link[m] = 0.0;
            }
            touched.clear();
            if best.1 != usize::MAX && best.0 < -MIN_IMPROVEMENT {
                state.apply(v, level, best.1, link_from, best.2);
                moved = true;
                any = true;
            }
        }
        if !moved {
            break;
        }
    }
    any
}

/// Merges modules by moving aggregated module-nodes until no merge lowers the codelength.
/// `assignment` maps leaf vertices to compact module ids. Returns whether anything merged.
fn agglomerate(leaf: &Level, assignment: &mut Vec<usize>, rng: &mut ChaCha8Rng) -> bool {
    let mut merged = false;
    loop {
        let state = ModuleState::from_assignment(leaf, assignment);
        let (level, index) = leaf.aggregate(&state);
        let mut coarse = ModuleState::singletons(&level);
        move_nodes(&level, &mut coarse, rng, Candidates::Neighbours);
        if coarse.members.iter().filter(|&&c| c > 0).count() == level.n() {
            return merged;
        }
        merged = true;
        let next: Vec<usize> = assignment.iter().map(|&m| coarse.module[index[m]]).collect();
        *assignment = compact(&next);
    }
}

fn compact(assignment: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    assignment
        .iter()
        .map(|&m| {
            let next = map.len();
            *map.entry(m).or_insert(next)
        })
        .collect()
}

/// One optimization run: greedy agglomeration from singletons, then alternating
/// vertex-level refinement and further merging until neither improves.
fn optimize(network: &FlowNetwork, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let leaf = Level::leaf(network);
    let mut state = ModuleState::singletons(&leaf);
    move_nodes(&leaf, &mut state, rng, Candidates::Neighbours);
    let mut assignment = compact(&state.module);
    agglomerate(&leaf, &mut assignment, rng);

    for _ in 0..MAX_OUTER_ROUNDS {
        let mut refined = ModuleState::from_assignment(&leaf, &assignment);
        move_nodes(&leaf, &mut refined, rng, Candidates::All);
        assignment = compact(&refined.module);
        if !agglomerate(&leaf, &mut assignment, rng) {
            return assignment;
        }
    }
    let mut refined = ModuleState::from_assignment(&leaf, &assignment);
    move_nodes(&leaf, &mut refined, rng, Candidates::All);
    compact(&refined.module)
}

//! Left-right planarity test (de Fraysseix–Rosenstiehl criterion, Brandes' formulation).
//!
//! Runs in linear time. Only the test is implemented; no embedding is produced.

const NONE: usize = usize::MAX;

/// Exact planarity test for a simple undirected graph on `n` vertices.
///
/// Self-loops and duplicate edges are ignored.
pub fn is_planar_edges(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut seen = std::collections::HashSet::with_capacity(edges.len());
    let mut m = 0;
    for &(a, b) in edges {
        assert!(a < n && b < n, "edge ({a},{b}) out of range for {n} vertices");
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            continue;
        }
        adj[a].push((b, m));
        adj[b].push((a, m));
        m += 1;
    }
    if n > 2 && m > 3 * n - 6 {
        return false;
    }
    LrState::new(adj, m).run()
}

#[derive(Clone, Copy)]
struct Interval {
    low: usize,
    high: usize,
}

impl Interval {
    const EMPTY: Interval = Interval { low: NONE, high: NONE };

    fn is_empty(&self) -> bool {
        self.low == NONE && self.high == NONE
    }
}

struct ConflictPair {
    id: usize,
    left: Interval,
    right: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.left, &mut self.right);
    }
}

struct LrState {
    adj: Vec<Vec<(usize, usize)>>,
    height: Vec<usize>,
    parent_edge: Vec<usize>,
    oriented: Vec<bool>,
    // Per oriented edge, indexed by edge id.
    src: Vec<usize>,
    dst: Vec<usize>,
    lowpt: Vec<usize>,
    lowpt2: Vec<usize>,
    nesting_depth: Vec<usize>,
    lowpt_edge: Vec<usize>,
    reference: Vec<usize>,
    stack_bottom: Vec<usize>,
    ordered_out: Vec<Vec<usize>>,
    stack: Vec<ConflictPair>,
    next_pair_id: usize,
}

impl LrState {
    fn new(adj: Vec<Vec<(usize, usize)>>, m: usize) -> Self {
        let n = adj.len();
        LrState {
            adj,
            height: vec![NONE; n],
            parent_edge: vec![NONE; n],
            oriented: vec![false; m],
            src: vec![NONE; m],
            dst: vec![NONE; m],
            lowpt: vec![0; m],
            lowpt2: vec![0; m],
            nesting_depth: vec![0; m],
            lowpt_edge: vec![NONE; m],
            reference: vec![NONE; m],
            stack_bottom: vec![NONE; m],
            ordered_out: vec![Vec::new(); n],
            stack: Vec::new(),
            next_pair_id: 0,
        }
    }

    fn run(mut self) -> bool {
        let n = self.adj.len();
        let mut roots = Vec::new();
        for v in 0..n {
            if self.height[v] == NONE {
                self.height[v] = 0;
                roots.push(v);
                self.orient(v);
            }
        }
        for v in 0..n {
            let mut out = std::mem::take(&mut self.ordered_out[v]);
            out.sort_by_key(|&e| self.nesting_depth[e]);
            self.ordered_out[v] = out;
        }
        roots.into_iter().all(|r| self.test(r))
    }

    fn orient(&mut self, v: usize) {
        let e = self.parent_edge[v];
        for k in 0..self.adj[v].len() {
            let (w, vw) = self.adj[v][k];
            if self.oriented[vw] {
                continue;
            }
            self.oriented[vw] = true;
            self.src[vw] = v;
            self.dst[vw] = w;
            self.ordered_out[v].push(vw);
            self.lowpt[vw] = self.height[v];
            self.lowpt2[vw] = self.height[v];
            if self.height[w] == NONE {
                self.parent_edge[w] = vw;
                self.height[w] = self.height[v] + 1;
                self.orient(w);
            } else {
                self.lowpt[vw] = self.height[w];
            }

            self.nesting_depth[vw] = 2 * self.lowpt[vw];
            if self.lowpt2[vw] < self.height[v] {
                self.nesting_depth[vw] += 1;
            }

            if e != NONE {
                if self.lowpt[vw] < self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt[e].min(self.lowpt2[vw]);
                    self.lowpt[e] = self.lowpt[vw];
                } else if self.lowpt[vw] > self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt[vw]);
                } else {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt2[vw]);
                }
            }
        }
    }

    fn top_id(&self) -> usize {
        self.stack.last().map_or(NONE, |p| p.id)
    }

    fn conflicting(&self, interval: &Interval, edge: usize) -> bool {
        !interval.is_empty() && self.lowpt[interval.high] > self.lowpt[edge]
    }

    fn lowest(&self, pair: &ConflictPair) -> usize {
        if pair.left.is_empty() {
            return self.lowpt[pair.right.low];
        }
        if pair.right.is_empty() {
            return self.lowpt[pair.left.low];
        }
        self.lowpt[pair.left.low].min(self.lowpt[pair.right.low])
    }

    fn new_pair(&mut self, left: Interval, right: Interval) -> ConflictPair {
        self.next_pair_id += 1;
        ConflictPair {
            id: self.next_pair_id,
            left,
            right,
        }
    }

    fn test(&mut self, v: usize) -> bool {
        let e = self.parent_edge[v];
        let out = std::mem::take(&mut self.ordered_out[v]);
        let ok = self.test_edges(v, e, &out);
        self.ordered_out[v] = out;
        if !ok {
            return false;
        }
        if e != NONE {
            self.remove_back_edges(e);
        }
        true
    }

    fn test_edges(&mut self, v: usize, e: usize, out: &[usize]) -> bool {
        for (k, &ei) in out.iter().enumerate() {
            let w = self.dst[ei];
            self.stack_bottom[ei] = self.top_id();
            if ei == self.parent_edge[w] {
                if !self.test(w) {
                    return false;
                }
            } else {
                self.lowpt_edge[ei] = ei;
                let pair = self.new_pair(Interval::EMPTY, Interval { low: ei, high: ei });
                self.stack.push(pair);
            }
            if self.lowpt[ei] < self.height[v] {
                if k == 0 {
                    self.lowpt_edge[e] = self.lowpt_edge[ei];
                } else if !self.add_constraints(ei, e) {
                    return false;
                }
            }
        }
        true
    }

    fn add_constraints(&mut self, ei: usize, e: usize) -> bool {
        let mut p = self.new_pair(Interval::EMPTY, Interval::EMPTY);
        // Merge return edges of ei into p.right.
        loop {
            let Some(mut q) = self.stack.pop() else {
                break;
            };
            if !q.left.is_empty() {
                q.swap();
            }
            if !q.left.is_empty() {
                return false;
            }
            if self.lowpt[q.right.low] > self.lowpt[e] {
                if p.right.is_empty() {
                    p.right = q.right;
                } else {
                    self.reference[p.right.low] = q.right.high;
                }
                p.right.low = q.right.low;
            } else {
                self.reference[q.right.low] = self.lowpt_edge[e];
            }
            if self.top_id() == self.stack_bottom[ei] {
                break;
            }
        }
        // Merge conflicting return edges of earlier siblings into p.left.
        while let Some(top) = self.stack.last() {
            if !(self.conflicting(&top.left, ei) || self.conflicting(&top.right, ei)) {
                break;
            }
            let mut q = self.stack.pop().expect("non-empty");
            if self.conflicting(&q.right, ei) {
                q.swap();
            }
            if self.conflicting(&q.right, ei) {
                return false;
            }
            if p.right.low != NONE {
                self.reference[p.right.low] = q.right.high;
            }
            if q.right.low != NONE {
                p.right.low = q.right.low;
            }
            if p.left.is_empty() {
                p.left = q.left;
            } else if p.left.low != NONE {
                self.reference[p.left.low] = q.left.high;
            }
            p.left.low = q.left.low;
        }
        if !(p.left.is_empty() && p.right.is_empty()) {
            self.stack.push(p);
        }
        true
    }

    fn remove_back_edges(&mut self, e: usize) {
        let u = self.src[e];
        while let Some(top) = self.stack.last() {
            if self.lowest(top) != self.height[u] {
                break;
            }
            self.stack.pop();
        }
        if let Some(mut p) = self.stack.pop() {
            while p.left.high != NONE && self.dst[p.left.high] == u {
                p.left.high = self.reference[p.left.high];
            }
            if p.left.high == NONE && p.left.low != NONE {
                self.reference[p.left.low] = p.right.low;
                p.left.low = NONE;
            }
            while p.right.high != NONE && self.dst[p.right.high] == u {
                p.right.high = self.reference[p.right.high];
            }
            if p.right.high == NONE && p.right.low != NONE {
                self.reference[p.right.low] = p.left.low;
                p.right.low = NONE;
            }
            self.stack.push(p);
        }
        if self.lowpt[e] < self.height[u] {
            if let Some(top) = self.stack.last() {
                let (hl, hr) = (top.left.high, top.right.high);
                self.reference[e] =
                    if hl != NONE && (hr == NONE || self.lowpt[hl] > self.lowpt[hr]) {
                        hl
                    } else {
                        hr
                    };
            }
        }
    }
}

//! Demoucron-Malgrange-Pertuiset planarity test.
//!
//! Each biconnected block is embedded incrementally: start from a cycle, then repeatedly
//! pick a fragment (a chord, or a component of the rest with its attachment edges), find
//! the faces that contain all of its attachment vertices, and embed one path of it.
//! A fragment with no admissible face means the block is not planar.

use std::collections::{BTreeSet, HashSet, VecDeque};

pub fn is_planar(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut set = BTreeSet::new();
    for &(a, b) in edges {
        if a != b {
            set.insert((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<(usize, usize)> = set.into_iter().collect();
    if n >= 3 && edges.len() > 3 * n - 6 {
        return false;
    }
    blocks(n, &edges).iter().all(|b| block_is_planar(b))
}

/// Edge sets of the biconnected components.
fn blocks(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut time = 0;
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut out = Vec::new();

    fn dfs(
        u: usize,
        parent: usize,
        adj: &[Vec<usize>],
        disc: &mut [usize],
        low: &mut [usize],
        time: &mut usize,
        stack: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        disc[u] = *time;
        low[u] = *time;
        *time += 1;
        for &v in &adj[u] {
            if disc[v] == usize::MAX {
                stack.push((u, v));
                dfs(v, u, adj, disc, low, time, stack, out);
                low[u] = low[u].min(low[v]);
                if low[v] >= disc[u] {
                    let mut block = Vec::new();
                    while let Some(e) = stack.pop() {
                        block.push((e.0.min(e.1), e.0.max(e.1)));
                        if e == (u, v) {
                            break;
                        }
                    }
                    out.push(block);
                }
            } else if v != parent && disc[v] < disc[u] {
                stack.push((u, v));
                low[u] = low[u].min(disc[v]);
            }
        }
    }

    for s in 0..n {
        if disc[s] == usize::MAX {
            dfs(s, usize::MAX, &adj, &mut disc, &mut low, &mut time, &mut stack, &mut out);
        }
    }
    out
}

fn block_is_planar(edges: &[(usize, usize)]) -> bool {
    // K5 and K3,3 have 10 and 9 edges.
    if edges.len() < 9 {
        return true;
    }
    let verts: BTreeSet<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    let n = *verts.iter().max().unwrap() + 1;
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let key = |a: usize, b: usize| (a.min(b), a.max(b));

    let cycle = find_cycle(&adj, *verts.iter().next().unwrap());
    let mut in_h = vec![false; n];
    let mut h_edges: HashSet<(usize, usize)> = HashSet::new();
    for k in 0..cycle.len() {
        in_h[cycle[k]] = true;
        h_edges.insert(key(cycle[k], cycle[(k + 1) % cycle.len()]));
    }
    let mut faces: Vec<Vec<usize>> = vec![cycle.clone(), cycle];

    loop {
        let fragments = fragments(&adj, edges, &in_h, &h_edges);
        if fragments.is_empty() {
            return true;
        }
        let mut chosen: Option<(usize, usize)> = None;
        for (fi, frag) in fragments.iter().enumerate() {
            let admissible: Vec<usize> = (0..faces.len())
                .filter(|&f| frag.attachments.iter().all(|a| faces[f].contains(a)))
                .collect();
            match admissible.len() {
                0 => return false,
                1 => {
                    chosen = Some((fi, admissible[0]));
                    break;
                }
                _ => {
                    if chosen.is_none() {
                        chosen = Some((fi, admissible[0]));
                    }
                }
            }
        }
        let (fi, face_idx) = chosen.unwrap();
        let path = fragment_path(&adj, &fragments[fi], &in_h);
        for w in path.windows(2) {
            h_edges.insert(key(w[0], w[1]));
        }
        for &v in &path {
            in_h[v] = true;
        }
        let face = faces.swap_remove(face_idx);
        let (f1, f2) = split_face(&face, &path);
        faces.push(f1);
        faces.push(f2);
    }
}

/// Simple cycle through a non-tree edge of a BFS tree.
fn find_cycle(adj: &[Vec<usize>], root: usize) -> Vec<usize> {
    let n = adj.len();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![usize::MAX; n];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                parent[v] = u;
                queue.push_back(v);
            } else if parent[u] != v {
                // u-v closes a cycle through the lowest common ancestor.
                let (mut a, mut b) = (u, v);
                let mut left = vec![a];
                let mut right = vec![b];
                while a != b {
                    if depth[a] >= depth[b] {
                        a = parent[a];
                        left.push(a);
                    } else {
                        b = parent[b];
                        right.push(b);
                    }
                }
                right.pop();
                right.reverse();
                left.extend(right);
                return left;
            }
        }
    }
    unreachable!("biconnected block with at least 9 edges has a cycle")
}

struct Fragment {
    /// Non-H vertices of the fragment; empty for a chord.
    inner: Vec<usize>,
    attachments: BTreeSet<usize>,
    chord: Option<(usize, usize)>,
}

fn fragments(
    adj: &[Vec<usize>],
    edges: &[(usize, usize)],
    in_h: &[bool],
    h_edges: &HashSet<(usize, usize)>,
) -> Vec<Fragment> {
    let mut out = Vec::new();
    for &(a, b) in edges {
        if in_h[a] && in_h[b] && !h_edges.contains(&(a, b)) {
            out.push(Fragment {
                inner: Vec::new(),
                attachments: [a, b].into_iter().collect(),
                chord: Some((a, b)),
            });
        }
    }
    let n = adj.len();
    let mut seen = vec![false; n];
    for s in 0..n {
        if in_h[s] || seen[s] || adj[s].is_empty() {
            continue;
        }
        let mut inner = vec![s];
        let mut attachments = BTreeSet::new();
        seen[s] = true;
        let mut k = 0;
        while k < inner.len() {
            let u = inner[k];
            k += 1;
            for &v in &adj[u] {
                if in_h[v] {
                    attachments.insert(v);
                } else if !seen[v] {
                    seen[v] = true;
                    inner.push(v);
                }
            }
        }
        out.push(Fragment {
            inner,
            attachments,
            chord: None,
        });
    }
    out
}

/// A path through the fragment joining two distinct attachment vertices.
fn fragment_path(adj: &[Vec<usize>], frag: &Fragment, in_h: &[bool]) -> Vec<usize> {
    if let Some((a, b)) = frag.chord {
        return vec![a, b];
    }
    let inner: HashSet<usize> = frag.inner.iter().copied().collect();
    let start = *frag.attachments.iter().next().unwrap();
    let mut prev = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::new();
    for &v in &adj[start] {
        if inner.contains(&v) && prev[v] == usize::MAX {
            prev[v] = start;
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if in_h[v] && v != start {
                let mut path = vec![v, u];
                let mut x = u;
                while prev[x] != start {
                    x = prev[x];
                    path.push(x);
                }
                path.push(start);
                path.reverse();
                return path;
            }
            if inner.contains(&v) && prev[v] == usize::MAX {
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    unreachable!("fragment of a biconnected block has two attachments")
}

/// Splits a face cycle along a path whose ends lie on it.
fn split_face(face: &[usize], path: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let a = path[0];
    let b = *path.last().unwrap();
    let len = face.len();
    let ia = face.iter().position(|&v| v == a).unwrap();
    let ib = face.iter().position(|&v| v == b).unwrap();
    let arc = |from: usize, to: usize| {
        let mut out = vec![face[from]];
        let mut k = from;
        while k != to {
            k = (k + 1) % len;
            out.push(face[k]);
        }
        out
    };
    let interior = &path[1..path.len() - 1];
    let mut f1 = arc(ia, ib);
    f1.extend(interior.iter().rev());
    let mut f2 = arc(ib, ia);
    f2.extend(interior.iter());
    (f1, f2)
}

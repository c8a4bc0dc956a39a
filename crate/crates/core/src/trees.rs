//! Spanning trees of the undirected kinetic graph: exhaustive enumeration,
//! counting through the unweighted Laplacian, and orientation toward a root.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::Network;

/// Size guards for the exponential enumerations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    /// Largest state count accepted by spanning-tree enumeration.
    pub max_tree_states: usize,
    /// Largest state count accepted by self-avoiding path enumeration.
    pub max_path_states: usize,
    /// Refuse tree enumeration when the graph has more spanning trees than this.
    pub max_trees: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_tree_states: 10,
            max_path_states: 12,
            max_trees: 20_000_000,
        }
    }
}

/// A spanning tree as a sorted list of edge indices into the network.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanningTree {
    pub edges: Vec<usize>,
}

/// Number of spanning trees, from the determinant of the reduced unweighted Laplacian.
pub fn count_spanning_trees(network: &Network) -> f64 {
    let n = network.n_states();
    let mut lap = DMatrix::<f64>::zeros(n - 1, n - 1);
    for k in 0..network.n_edges() {
        let (a, b) = network.endpoints(k);
        for (u, v) in [(a, b), (b, a)] {
            if u + 1 < n {
                lap[(u, u)] += 1.0;
                if v + 1 < n {
                    lap[(u, v)] -= 1.0;
                }
            }
        }
    }
    lap.determinant().round()
}

fn check_caps(network: &Network, limits: &Limits) -> Result<()> {
    let n = network.n_states();
    if n > limits.max_tree_states {
        return Err(Error::CapExceeded {
            what: "spanning-tree enumeration",
            needed: n as u64,
            cap: limits.max_tree_states as u64,
            advice: "use the matrix-tree method instead",
        });
    }
    let count = count_spanning_trees(network);
    if count > limits.max_trees as f64 {
        return Err(Error::CapExceeded {
            what: "spanning-tree enumeration (tree count)",
            needed: count as u64,
            cap: limits.max_trees,
            advice: "use the matrix-tree method instead",
        });
    }
    Ok(())
}

/// Calls `visit` once per spanning tree, in a deterministic order.
///
/// Include/exclude recursion over the edge list: including an edge contracts
/// it, excluding deletes it, and a branch is entered only if it can still be
/// completed, so every leaf is a spanning tree.
pub fn for_each_spanning_tree<F>(network: &Network, limits: &Limits, mut visit: F) -> Result<()>
where
    F: FnMut(&[usize]),
{
    check_caps(network, limits)?;
    let n = network.n_states();
    let ends: Vec<(usize, usize)> = (0..network.n_edges()).map(|k| network.endpoints(k)).collect();
    let comp: Vec<usize> = (0..n).collect();
    let mut chosen = Vec::with_capacity(n - 1);
    recurse(&ends, n, 0, &comp, &mut chosen, &mut visit);
    Ok(())
}

fn recurse<F: FnMut(&[usize])>(
    ends: &[(usize, usize)],
    n: usize,
    k: usize,
    comp: &[usize],
    chosen: &mut Vec<usize>,
    visit: &mut F,
) {
    if chosen.len() == n - 1 {
        visit(chosen);
        return;
    }
    if k == ends.len() {
        return;
    }
    let (a, b) = ends[k];
    let (ca, cb) = (comp[a], comp[b]);
    if ca != cb {
        let (keep, drop) = (ca.min(cb), ca.max(cb));
        let merged: Vec<usize> = comp.iter().map(|&c| if c == drop { keep } else { c }).collect();
        chosen.push(k);
        recurse(ends, n, k + 1, &merged, chosen, visit);
        chosen.pop();
    }
    if completable(ends, n, k + 1, comp) {
        recurse(ends, n, k + 1, comp, chosen, visit);
    }
}

/// Whether the current components plus edges `from..` still connect everything.
fn completable(ends: &[(usize, usize)], n: usize, from: usize, comp: &[usize]) -> bool {
    let mut label: Vec<usize> = comp.to_vec();
    let mut groups = {
        let mut seen = vec![false; n];
        comp.iter().filter(|&&c| !std::mem::replace(&mut seen[c], true)).count()
    };
    for &(a, b) in &ends[from..] {
        let (la, lb) = (label[a], label[b]);
        if la != lb {
            for l in label.iter_mut() {
                if *l == lb {
                    *l = la;
                }
            }
            groups -= 1;
            if groups == 1 {
                return true;
            }
        }
    }
    groups == 1
}

/// Materializes every spanning tree.
pub fn enumerate_spanning_trees(network: &Network, limits: &Limits) -> Result<Vec<SpanningTree>> {
    let mut out = Vec::new();
    for_each_spanning_tree(network, limits, |edges| {
        out.push(SpanningTree {
            edges: edges.to_vec(),
        })
    })?;
    Ok(out)
}

/// Orients a spanning tree toward `root`: `next[v]` is the state `v` jumps to
/// in the in-tree, `None` for the root.
pub fn orient_toward(network: &Network, tree_edges: &[usize], root: usize) -> Vec<Option<usize>> {
    let n = network.n_states();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &k in tree_edges {
        let (a, b) = network.endpoints(k);
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut next = vec![None; n];
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                next[v] = Some(u);
                stack.push(v);
            }
        }
    }
    next
}

/// The unique path `from -> to` inside a spanning tree, as a vertex list.
pub fn tree_path(network: &Network, tree_edges: &[usize], from: usize, to: usize) -> Vec<usize> {
    let next = orient_toward(network, tree_edges, to);
    let mut path = vec![from];
    let mut v = from;
    while let Some(u) = next[v] {
        path.push(u);
        v = u;
    }
    path
}

/// True iff `edges` is a spanning tree of the network's state set.
pub fn is_spanning_tree(network: &Network, edges: &[usize]) -> bool {
    let n = network.n_states();
    if edges.len() != n - 1 {
        return false;
    }
    let mut uf = crate::model::UnionFind::new(n);
    edges.iter().all(|&k| {
        let (a, b) = network.endpoints(k);
        uf.union(a, b)
    })
}

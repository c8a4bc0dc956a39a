//! Zero-temperature asymptotics.
//!
//! With rates `k(x,y) ≍ exp(beta phi(x,y))`, the escape rate of `x` scales
//! as `exp(-beta Gamma(x))` with `Gamma(x) = -max_y phi(x,y)`, and each jump
//! carries a suppression exponent `U(x,y) = -phi(x,y) - Gamma(x) >= 0`. The
//! stationary occupations satisfy `(1/beta) ln rho(x) -> Psi(x)` where
//! `Psi = Psi~ - max Psi~` and `Psi~(x) = Gamma(x) - min_T U(T_x)`, the
//! minimum running over in-trees to `x`. That minimum is a minimum-weight
//! arborescence, found exactly with Chu-Liu/Edmonds.

use std::collections::HashMap;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{Network, PhiEntry};
use crate::stationary::{stationary_by_matrix_tree, RateMatrix};
use crate::trees::{for_each_spanning_tree, orient_toward, Limits};

/// `phi(x,y) - phi(y,x)` must match `q(x,y)` to this tolerance.
pub const PHI_CONSISTENCY_TOL: f64 = 1e-10;
/// Arcs with `U` below this are preferred successors.
pub const ZERO_U_TOL: f64 = 1e-9;
/// States within this distance of an extremum belong to the extremal set.
pub const TIE_TOL: f64 = 1e-9;

/// Zero-temperature rate exponents on both orientations of every edge.
#[derive(Debug, Clone)]
pub struct PhiTable {
    network: Network,
    /// `(phi(a,b), phi(b,a))` per edge, in the edge's stored orientation.
    values: Vec<(f64, f64)>,
}

impl PhiTable {
    pub fn network(&self) -> &Network {
        &self.network
    }

    /// `phi` on edge `k` traversed from `from`.
    pub fn on_edge_from(&self, k: usize, from: usize) -> f64 {
        let (a, _) = self.network.endpoints(k);
        if from == a {
            self.values[k].0
        } else {
            self.values[k].1
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        self.network.edge_between(x, y).map(|k| self.on_edge_from(k, x))
    }

    pub fn to_entries(&self) -> Vec<PhiEntry> {
        let net = &self.network;
        let mut out = Vec::with_capacity(2 * net.n_edges());
        for (k, &(ab, ba)) in self.values.iter().enumerate() {
            let (a, b) = net.endpoints(k);
            out.push(PhiEntry {
                from: net.label(a).into(),
                to: net.label(b).into(),
                value: ab,
            });
            out.push(PhiEntry {
                from: net.label(b).into(),
                to: net.label(a).into(),
                value: ba,
            });
        }
        out
    }

    /// Rates `k = exp(beta phi)` with unit prefactors.
    pub fn rates_at(&self, beta: f64) -> Result<RateMatrix> {
        RateMatrix::from_arc_log_rates(&self.network, beta, |k, from| beta * self.on_edge_from(k, from))
    }
}

/// `phi = q / 2` on every oriented edge: the limit for temperature-independent activations.
pub fn phi_from_network(network: &Network) -> PhiTable {
    let values = network
        .edges()
        .iter()
        .map(|e| (0.5 * e.heat_ab, -(0.5 * e.heat_ab)))
        .collect();
    PhiTable {
        network: network.clone(),
        values,
    }
}

/// Validates an explicit exponent table against the network's heat.
pub fn load_phi(network: &Network, entries: &[PhiEntry]) -> Result<PhiTable> {
    let mut values: Vec<(Option<f64>, Option<f64>)> = vec![(None, None); network.n_edges()];
    for e in entries {
        let from = network.index_of(&e.from)?;
        let to = network.index_of(&e.to)?;
        let k = network.edge_between(from, to).ok_or_else(|| {
            Error::Schema(format!("phi entry {}->{} is not an edge", e.from, e.to))
        })?;
        if !e.value.is_finite() {
            return Err(Error::Schema(format!("phi entry {}->{} is not finite", e.from, e.to)));
        }
        let slot = if network.endpoints(k).0 == from {
            &mut values[k].0
        } else {
            &mut values[k].1
        };
        if slot.replace(e.value).is_some() {
            return Err(Error::Schema(format!("phi entry {}->{} given twice", e.from, e.to)));
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (k, v) in values.into_iter().enumerate() {
        let (a, b) = network.endpoints(k);
        let (Some(ab), Some(ba)) = v else {
            return Err(Error::PhiIncomplete(format!(
                "edge {}-{} lacks an orientation",
                network.label(a),
                network.label(b)
            )));
        };
        let heat = network.edges()[k].heat_ab;
        if (ab - ba - heat).abs() > PHI_CONSISTENCY_TOL {
            return Err(Error::PhiInconsistent {
                a: network.label(a).into(),
                b: network.label(b).into(),
                diff: ab - ba,
                heat,
            });
        }
        out.push((ab, ba));
    }
    Ok(PhiTable {
        network: network.clone(),
        values: out,
    })
}

/// The network's own `phi` block if present, otherwise `phi = q / 2`.
pub fn phi_for(network: &Network) -> Result<PhiTable> {
    match network.phi_entries() {
        Some(entries) => load_phi(network, entries),
        None => Ok(phi_from_network(network)),
    }
}

/// A weighted arc `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Minimum-weight spanning arborescence directed away from `root`
/// (every other vertex has exactly one incoming arc), by Chu-Liu/Edmonds.
///
/// Returns the indices of the chosen arcs, or `None` if some vertex cannot
/// be reached from `root`. Ties go to the lower arc index.
pub fn min_out_arborescence(n: usize, arcs: &[Arc], root: usize) -> Option<Vec<usize>> {
    let mut best: Vec<Option<usize>> = vec![None; n];
    for (i, a) in arcs.iter().enumerate() {
        if a.from == a.to || a.to == root {
            continue;
        }
        match best[a.to] {
            Some(j) if arcs[j].weight <= a.weight => {}
            _ => best[a.to] = Some(i),
        }
    }
    if (0..n).any(|v| v != root && best[v].is_none()) {
        return None;
    }

    // cycles among the cheapest incoming arcs
    let mut cycle_id: Vec<Option<usize>> = vec![None; n];
    let mut mark = vec![usize::MAX; n];
    let mut n_cycles = 0;
    for start in 0..n {
        let mut v = start;
        while v != root && mark[v] == usize::MAX && cycle_id[v].is_none() {
            mark[v] = start;
            v = arcs[best[v].unwrap()].from;
        }
        if v != root && mark[v] == start && cycle_id[v].is_none() {
            let mut u = v;
            loop {
                cycle_id[u] = Some(n_cycles);
                u = arcs[best[u].unwrap()].from;
                if u == v {
                    break;
                }
            }
            n_cycles += 1;
        }
    }
    if n_cycles == 0 {
        return Some((0..n).filter(|&v| v != root).map(|v| best[v].unwrap()).collect());
    }

    // contract each cycle into a single vertex
    let mut comp = vec![usize::MAX; n];
    for v in 0..n {
        if let Some(c) = cycle_id[v] {
            comp[v] = c;
        }
    }
    let mut next_id = n_cycles;
    for v in 0..n {
        if comp[v] == usize::MAX {
            comp[v] = next_id;
            next_id += 1;
        }
    }
    let mut contracted = Vec::new();
    let mut origin = Vec::new();
    for (i, a) in arcs.iter().enumerate() {
        let (cu, cv) = (comp[a.from], comp[a.to]);
        if cu == cv {
            continue;
        }
        let weight = if cycle_id[a.to].is_some() {
            a.weight - arcs[best[a.to].unwrap()].weight
        } else {
            a.weight
        };
        contracted.push(Arc {
            from: cu,
            to: cv,
            weight,
        });
        origin.push(i);
    }
    let chosen = min_out_arborescence(next_id, &contracted, comp[root])?;

    let mut out = Vec::with_capacity(n - 1);
    let mut entry = vec![usize::MAX; n_cycles];
    for j in chosen {
        let i = origin[j];
        out.push(i);
        if let Some(c) = cycle_id[arcs[i].to] {
            entry[c] = arcs[i].to;
        }
    }
    for v in 0..n {
        if let Some(c) = cycle_id[v] {
            if entry[c] != v {
                out.push(best[v].unwrap());
            }
        }
    }
    Some(out)
}

/// Minimum-weight in-tree to `root` under per-arc weights `weight(x, y)`
/// (`None` for non-arcs). Returns `next` pointers with `None` at the root.
pub fn min_in_tree<F>(network: &Network, root: usize, weight: F) -> Vec<Option<usize>>
where
    F: Fn(usize, usize) -> f64,
{
    let n = network.n_states();
    // reverse every arc: an in-tree to root is an out-arborescence from root
    let mut arcs = Vec::with_capacity(2 * network.n_edges());
    for x in 0..n {
        for &(y, _) in network.neighbors(x) {
            arcs.push(Arc {
                from: y,
                to: x,
                weight: weight(x, y),
            });
        }
    }
    let chosen = min_out_arborescence(n, &arcs, root).expect("connected network");
    let mut next = vec![None; n];
    for i in chosen {
        next[arcs[i].to] = Some(arcs[i].from);
    }
    next
}

/// `sum_{v != root} weight(v, next[v])`, summed in state order.
pub fn in_tree_cost<F>(next: &[Option<usize>], weight: F) -> f64
where
    F: Fn(usize, usize) -> f64,
{
    next.iter()
        .enumerate()
        .filter_map(|(v, u)| u.map(|u| weight(v, u)))
        .sum()
}

/// Reference minimum over all in-trees to `root` by explicit enumeration.
pub fn min_in_tree_brute_force<F>(network: &Network, root: usize, limits: &Limits, weight: F) -> Result<f64>
where
    F: Fn(usize, usize) -> f64,
{
    let mut best = f64::INFINITY;
    for_each_spanning_tree(network, limits, |edges| {
        let next = orient_toward(network, edges, root);
        best = best.min(in_tree_cost(&next, &weight));
    })?;
    Ok(best)
}

/// Zero-temperature profile of a network.
#[derive(Debug, Clone)]
pub struct LowTProfile {
    pub network: Network,
    /// Life-time exponent `Gamma(x) = -max_y phi(x,y)`.
    pub gamma: Vec<f64>,
    /// `U(x,y)` densely, `+inf` off the graph.
    u: Vec<f64>,
    /// `min_T U(T_x)`.
    pub min_tree_u: Vec<f64>,
    /// A minimizing in-tree per root, as `next` pointers.
    pub min_trees: Vec<Vec<Option<usize>>>,
    pub psi_tilde: Vec<f64>,
    /// `Psi(x) = Psi~(x) - max Psi~`, the exponent of `rho(x)`.
    pub psi: Vec<f64>,
    /// Preferred-successor arcs `(x, y)` with `U(x,y) = 0`.
    pub digraph: Vec<(usize, usize)>,
    pub dominant: Vec<usize>,
    pub absolutely_dominant: Vec<usize>,
    pub escherian: bool,
}

impl LowTProfile {
    pub fn u(&self, x: usize, y: usize) -> f64 {
        self.u[x * self.network.n_states() + y]
    }

    /// States of maximal life-time.
    pub fn longest_lived(&self) -> Vec<usize> {
        let max = self.gamma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (0..self.gamma.len()).filter(|&x| self.gamma[x] >= max - TIE_TOL).collect()
    }

    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.network.n_states()];
        for &(x, y) in &self.digraph {
            adj[x].push(y);
        }
        adj
    }

    pub fn to_json(&self) -> Value {
        let net = &self.network;
        let per_state = |v: &[f64]| {
            let mut m = Map::new();
            for (i, x) in v.iter().enumerate() {
                m.insert(net.label(i).into(), json!(x));
            }
            Value::Object(m)
        };
        let labels = |v: &[usize]| v.iter().map(|&x| net.label(x)).collect::<Vec<_>>();
        let mut u = Vec::new();
        for x in 0..net.n_states() {
            for &(y, _) in net.neighbors(x) {
                u.push(json!({"from": net.label(x), "to": net.label(y), "value": self.u(x, y)}));
            }
        }
        let digraph: Vec<[&str; 2]> = self
            .digraph
            .iter()
            .map(|&(x, y)| [net.label(x), net.label(y)])
            .collect();
        json!({
            "gamma": per_state(&self.gamma),
            "u": u,
            "min_tree_u": per_state(&self.min_tree_u),
            "psi_tilde": per_state(&self.psi_tilde),
            "psi": per_state(&self.psi),
            "digraph": digraph,
            "dominant": labels(&self.dominant),
            "absolutely_dominant": labels(&self.absolutely_dominant),
            "escherian": self.escherian,
        })
    }
}

fn reachable(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !std::mem::replace(&mut seen[v], true) {
                stack.push(v);
            }
        }
    }
    seen
}

fn reverse(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut rev = vec![Vec::new(); adj.len()];
    for (x, ys) in adj.iter().enumerate() {
        for &y in ys {
            rev[y].push(x);
        }
    }
    rev
}

/// Whether every state reaches every other along the arcs.
pub fn strongly_connected(adj: &[Vec<usize>]) -> bool {
    adj.is_empty() || (reachable(adj, 0).iter().all(|&r| r) && reachable(&reverse(adj), 0).iter().all(|&r| r))
}

/// Computes life-times, suppression exponents, stationary exponents and dominance.
pub fn lowt_profile(phi: &PhiTable) -> LowTProfile {
    let net = phi.network();
    let n = net.n_states();
    let gamma: Vec<f64> = (0..n)
        .map(|x| {
            -net.neighbors(x)
                .iter()
                .map(|&(_, k)| phi.on_edge_from(k, x))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let mut u = vec![f64::INFINITY; n * n];
    let mut digraph = Vec::new();
    for x in 0..n {
        for &(y, k) in net.neighbors(x) {
            let v = -phi.on_edge_from(k, x) - gamma[x];
            u[x * n + y] = v;
            if v < ZERO_U_TOL {
                digraph.push((x, y));
            }
        }
    }
    let weight = |x: usize, y: usize| u[x * n + y];
    let min_trees: Vec<Vec<Option<usize>>> = (0..n).map(|r| min_in_tree(net, r, weight)).collect();
    let min_tree_u: Vec<f64> = min_trees.iter().map(|t| in_tree_cost(t, weight)).collect();
    let psi_tilde: Vec<f64> = (0..n).map(|x| gamma[x] - min_tree_u[x]).collect();
    let top = psi_tilde.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let psi: Vec<f64> = psi_tilde.iter().map(|p| p - top).collect();

    let mut profile = LowTProfile {
        network: net.clone(),
        gamma,
        u,
        min_tree_u,
        min_trees,
        psi_tilde,
        psi,
        digraph,
        dominant: Vec::new(),
        absolutely_dominant: Vec::new(),
        escherian: false,
    };
    let report = classify_dominance(&profile);
    profile.dominant = report.dominant;
    profile.absolutely_dominant = report.absolutely_dominant;
    profile.escherian = report.escherian;
    profile
}

/// Dominance labels of a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    /// `Psi(x) = 0`.
    pub dominant: Vec<usize>,
    /// Maximal life-time and an in-tree inside the preferred-successor digraph.
    pub absolutely_dominant: Vec<usize>,
    /// The preferred-successor digraph is strongly connected.
    pub escherian: bool,
}

pub fn classify_dominance(profile: &LowTProfile) -> DominanceReport {
    let n = profile.network.n_states();
    let dominant = (0..n).filter(|&x| profile.psi[x] >= -TIE_TOL).collect();
    let succ = profile.successors();
    let pred = reverse(&succ);
    let absolutely_dominant = profile
        .longest_lived()
        .into_iter()
        .filter(|&x| reachable(&pred, x).iter().all(|&r| r))
        .collect();
    DominanceReport {
        dominant,
        absolutely_dominant,
        escherian: strongly_connected(&succ),
    }
}

/// Energy/barrier form `phi(x,y) = E(x) - Delta(x,y)` of the exponents.
#[derive(Debug, Clone)]
pub struct BarrierRepresentation {
    pub energy: Vec<f64>,
    /// `Delta(x,y)` densely, `+inf` off the graph.
    barrier: Vec<f64>,
    /// `Theta(x) = min_T sum_{(y,z) in T_x} Delta(y,z)`.
    pub theta: Vec<f64>,
    /// `Omega = min_x [E(x) + Theta(x)]`.
    pub omega: f64,
    /// `Omega - E(x) - Theta(x)`, the exponent of `rho(x)`.
    pub exponent: Vec<f64>,
    /// Largest deviation of `exponent` from the profile's `Psi`.
    pub identity_defect: f64,
}

impl BarrierRepresentation {
    pub fn barrier(&self, x: usize, y: usize) -> f64 {
        self.barrier[x * self.energy.len() + y]
    }

    pub fn to_json(&self, network: &Network) -> Value {
        let per_state = |v: &[f64]| {
            let mut m = Map::new();
            for (i, x) in v.iter().enumerate() {
                m.insert(network.label(i).into(), json!(x));
            }
            Value::Object(m)
        };
        let mut barrier = Vec::new();
        for x in 0..network.n_states() {
            for &(y, _) in network.neighbors(x) {
                barrier.push(json!({"from": network.label(x), "to": network.label(y), "value": self.barrier(x, y)}));
            }
        }
        json!({
            "energy": per_state(&self.energy),
            "barrier": barrier,
            "theta": per_state(&self.theta),
            "omega": self.omega,
            "exponent": per_state(&self.exponent),
            "identity_defect": self.identity_defect,
        })
    }
}

pub const BARRIER_IDENTITY_TOL: f64 = 1e-10;

pub fn barrier_representation(phi: &PhiTable, energy: &[f64]) -> Result<BarrierRepresentation> {
    let net = phi.network();
    let n = net.n_states();
    if energy.len() != n || energy.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need {n} finite energies, got {}",
            energy.len()
        )));
    }
    let mut barrier = vec![f64::INFINITY; n * n];
    for x in 0..n {
        for &(y, k) in net.neighbors(x) {
            barrier[x * n + y] = energy[x] - phi.on_edge_from(k, x);
        }
    }
    let weight = |x: usize, y: usize| barrier[x * n + y];
    let theta: Vec<f64> = (0..n)
        .map(|r| in_tree_cost(&min_in_tree(net, r, weight), weight))
        .collect();
    let omega = (0..n).map(|x| energy[x] + theta[x]).fold(f64::INFINITY, f64::min);
    let exponent: Vec<f64> = (0..n).map(|x| omega - energy[x] - theta[x]).collect();
    let profile = lowt_profile(phi);
    let identity_defect = exponent
        .iter()
        .zip(&profile.psi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if identity_defect > BARRIER_IDENTITY_TOL {
        return Err(Error::Internal(format!(
            "barrier exponent deviates from Psi by {identity_defect:e}"
        )));
    }
    Ok(BarrierRepresentation {
        energy: energy.to_vec(),
        barrier,
        theta,
        omega,
        exponent,
        identity_defect,
    })
}

/// One row of an asymptotics sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticsRow {
    pub beta: f64,
    /// `max_x |(1/beta) ln rho(x) - Psi(x)|`.
    pub distance: f64,
    pub dominant_mass: f64,
    pub warning: Option<String>,
}

#[derive(Debug, Clone)]
pub struct AsymptoticsReport {
    pub rows: Vec<AsymptoticsRow>,
    /// Distances never increase along the sweep (relative slack 1e-9).
    pub nonincreasing: bool,
    /// The last distance is below the first.
    pub converging: bool,
}

impl AsymptoticsReport {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({"beta": r.beta, "distance": r.distance, "dominant_mass": r.dominant_mass, "warning": r.warning})
            })
            .collect();
        json!({"rows": rows, "nonincreasing": self.nonincreasing, "converging": self.converging})
    }
}

/// Compares `(1/beta) ln rho` from the matrix-tree solver at rates
/// `exp(beta phi)` against the limiting exponents, along a sweep of `betas`.
pub fn verify_asymptotics(phi: &PhiTable, betas: &[f64]) -> Result<AsymptoticsReport> {
    let profile = lowt_profile(phi);
    let mut rows = Vec::with_capacity(betas.len());
    for &beta in betas {
        if !(beta > 0.0) {
            return Err(Error::InvalidArgument(format!("sweep beta must be > 0, got {beta}")));
        }
        let rates = phi.rates_at(beta)?;
        let dist = stationary_by_matrix_tree(&rates)?;
        let distance = dist
            .log_probs
            .iter()
            .zip(&profile.psi)
            .map(|(l, p)| (l / beta - p).abs())
            .fold(0.0, f64::max);
        let dominant_mass = profile.dominant.iter().map(|&x| dist.probs[x]).sum();
        rows.push(AsymptoticsRow {
            beta,
            distance,
            dominant_mass,
            warning: rates.conditioning_warning(),
        });
    }
    let nonincreasing = rows
        .windows(2)
        .all(|w| w[1].distance <= w[0].distance * (1.0 + 1e-9) + 1e-15);
    let converging = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if rows.len() > 1 => b.distance < a.distance,
        _ => false,
    };
    Ok(AsymptoticsReport {
        rows,
        nonincreasing,
        converging,
    })
}

/// Energies keyed by label, e.g. from a JSON object.
pub fn energies_by_label(network: &Network, map: &HashMap<String, f64>) -> Result<Vec<f64>> {
    network
        .states()
        .iter()
        .map(|s| {
            map.get(s.as_str())
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("no energy for state `{s}`")))
        })
        .collect()
}

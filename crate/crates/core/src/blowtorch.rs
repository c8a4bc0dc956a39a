//! Kinetics that decide the occupation order of heat-incomparable states.
//!
//! Given a path `D` from the state to be disfavored to the state to be
//! favored with positive heat, extend `D` to a spanning tree `T`, keep
//! activation 1 on `T` and shrink it to `delta` everywhere else. As `delta`
//! goes to zero, `T` dominates every tree sum and the occupation ratio tends
//! to `exp(beta q(D))`, so it eventually clears `exp(beta q(D) / 2)`. The
//! heat table is never touched.

use std::collections::VecDeque;
use std::fmt;

use serde_json::json;

use crate::error::{Error, Result};
use crate::heat::{enumerate_paths, heat_order, OrientedPath, Relation, ZERO_HEAT_TOL};
use crate::model::Network;
use crate::stationary::{stationary_by_matrix_tree, RateMatrix};
use crate::trees::Limits;

/// Smallest off-tree activation tried before giving up.
pub const MIN_DELTA: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Make `rho(x*) > rho(y*)`.
    XOverY,
    /// Make `rho(x*) < rho(y*)`.
    YOverX,
}

impl Direction {
    pub fn tag(self) -> &'static str {
        match self {
            Direction::XOverY => "x-over-y",
            Direction::YOverX => "y-over-x",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x-over-y" => Ok(Direction::XOverY),
            "y-over-x" => Ok(Direction::YOverX),
            _ => Err(Error::InvalidArgument(format!("unknown direction `{s}`"))),
        }
    }
}

/// Maximum-heat self-avoiding path `from -> to`, required to carry positive
/// heat. Ties (within the zero-heat tolerance) go to the lexicographically
/// smallest vertex sequence.
pub fn find_positive_path(network: &Network, from: usize, to: usize, limits: &Limits) -> Result<OrientedPath> {
    let paths = enumerate_paths(network, from, to, limits)?;
    let max = paths.iter().map(|p| p.heat).fold(f64::NEG_INFINITY, f64::max);
    if max <= ZERO_HEAT_TOL {
        return Err(Error::NoPositivePath {
            from: network.label(from).to_owned(),
            to: network.label(to).to_owned(),
        });
    }
    // enumeration order is lexicographic
    Ok(paths
        .into_iter()
        .find(|p| p.heat >= max - ZERO_HEAT_TOL)
        .expect("maximum is attained"))
}

/// Spanning tree (sorted edge indices) containing every edge of `path`,
/// grown breadth-first from the path vertices in state-list order.
pub fn extend_to_spanning_tree(network: &Network, path: &OrientedPath) -> Vec<usize> {
    let n = network.n_states();
    let mut in_tree = vec![false; n];
    let mut edges = Vec::with_capacity(n - 1);
    for w in path.vertices.windows(2) {
        edges.push(network.edge_between(w[0], w[1]).expect("path follows edges"));
    }
    let mut seeds = path.vertices.clone();
    seeds.sort_unstable();
    for &v in &seeds {
        in_tree[v] = true;
    }
    let mut queue: VecDeque<usize> = seeds.into();
    while let Some(u) = queue.pop_front() {
        for &(v, k) in network.neighbors(u) {
            if !in_tree[v] {
                in_tree[v] = true;
                edges.push(k);
                queue.push_back(v);
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Knobs for [`synthesize`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SynthesisOptions {
    /// Accept heat-ordered pairs as long as a positive path exists in the requested direction.
    pub allow_one_sided: bool,
}

/// A certified activation table realizing a requested occupation order.
#[derive(Debug, Clone)]
pub struct KineticsAssignment {
    /// The input network with only its activations replaced.
    pub network: Network,
    pub x: usize,
    pub y: usize,
    pub direction: Direction,
    pub delta: f64,
    /// Edge indices of the backbone tree.
    pub tree: Vec<usize>,
    /// Positive-heat path from the disfavored to the favored state.
    pub path: OrientedPath,
    /// `rho(x*) / rho(y*)` at the network's beta.
    pub achieved_ratio: f64,
    pub achieved_log_ratio: f64,
    /// `exp(beta q(D) / 2)`, the bound the favored/disfavored ratio must beat.
    pub threshold: f64,
}

impl KineticsAssignment {
    pub fn psi(&self) -> Vec<f64> {
        (0..self.network.n_edges()).map(|k| self.network.activation(k)).collect()
    }

    pub fn certificate_json(&self) -> serde_json::Value {
        let net = &self.network;
        let tree: Vec<[&str; 2]> = self
            .tree
            .iter()
            .map(|&k| {
                let (a, b) = net.endpoints(k);
                [net.label(a), net.label(b)]
            })
            .collect();
        json!({
            "target": {
                "x": net.label(self.x),
                "y": net.label(self.y),
                "direction": self.direction.tag(),
            },
            "delta": self.delta,
            "path": self.path.labelled(net),
            "tree": tree,
            "threshold": self.threshold,
            "achieved_ratio": self.achieved_ratio,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "network": self.network.to_document(),
            "certificate": self.certificate_json(),
        })
    }
}

/// Builds an activation table forcing the requested order between `x` and `y`
/// at the network's own beta.
pub fn synthesize(
    network: &Network,
    x: usize,
    y: usize,
    direction: Direction,
    limits: &Limits,
    options: SynthesisOptions,
) -> Result<KineticsAssignment> {
    if x == y {
        return Err(Error::InvalidArgument("target states must differ".into()));
    }
    let beta = network.beta();
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(
            "occupation order cannot depend on kinetics at beta = 0".into(),
        ));
    }
    let order = heat_order(network, x, y, limits)?;
    if order.relation != Relation::Incomparable && !options.allow_one_sided {
        return Err(Error::HypothesisViolated(format!(
            "`{}` is {} `{}` in the heat order; kinetics cannot reverse a comparable pair",
            network.label(x),
            order.relation,
            network.label(y)
        )));
    }
    let (from, to) = match direction {
        Direction::XOverY => (y, x),
        Direction::YOverX => (x, y),
    };
    let path = find_positive_path(network, from, to, limits).map_err(|e| match e {
        Error::NoPositivePath { from, to } => Error::HypothesisViolated(format!(
            "every path from `{from}` to `{to}` releases nonpositive heat"
        )),
        e => e,
    })?;
    let tree = extend_to_spanning_tree(network, &path);
    let log_threshold = 0.5 * beta * path.heat;

    let mut on_tree = vec![false; network.n_edges()];
    for &k in &tree {
        on_tree[k] = true;
    }
    let mut delta = 1.0f64;
    loop {
        let psi: Vec<f64> = on_tree.iter().map(|&t| if t { 1.0 } else { delta }).collect();
        let candidate = network.with_activations(&psi)?;
        let rates = RateMatrix::build(&candidate, beta)?;
        let dist = stationary_by_matrix_tree(&rates)?;
        let favored = dist.log_probs[to] - dist.log_probs[from];
        if favored > log_threshold {
            let achieved_log_ratio = dist.log_probs[x] - dist.log_probs[y];
            return Ok(KineticsAssignment {
                network: candidate,
                x,
                y,
                direction,
                delta,
                tree,
                path,
                achieved_ratio: achieved_log_ratio.exp(),
                achieved_log_ratio,
                threshold: log_threshold.exp(),
            });
        }
        delta /= 10.0;
        if delta < MIN_DELTA {
            return Err(Error::NonConvergence(format!(
                "ratio {} still below threshold {} at delta = {delta:e}",
                favored.exp(),
                log_threshold.exp()
            )));
        }
    }
}

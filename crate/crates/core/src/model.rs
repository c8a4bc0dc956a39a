//! The stochastic network: states, undirected kinetic edges carrying an
//! antisymmetric heat and a symmetric activation, and the inverse temperature.
//!
//! A [`NetworkDocument`] is the raw, possibly invalid, file contents. A
//! [`Network`] is only ever built from a document that passes [`validate`],
//! and it is immutable afterwards.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of a state. Nonempty, no whitespace, unique within a network.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub String);

impl StateId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StateId {
    fn from(s: &str) -> Self {
        StateId(s.to_owned())
    }
}

/// Undirected edge `{a, b}`. The heat is stored once, for the jump `a -> b`.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticEdge {
    pub a: StateId,
    pub b: StateId,
    pub heat_ab: f64,
    pub activation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub a: String,
    pub b: String,
    pub q: f64,
    pub psi: f64,
}

/// One entry of an explicit zero-temperature exponent table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiEntry {
    pub from: String,
    pub to: String,
    pub value: f64,
}

fn default_beta() -> f64 {
    1.0
}

/// The on-disk network document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub states: Vec<String>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<PhiEntry>>,
}

impl NetworkDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serialization cannot fail")
    }
}

/// A broken invariant, naming the offending element.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooFewStates(usize),
    EmptyLabel(usize),
    WhitespaceInLabel(String),
    DuplicateState(String),
    SelfLoop(String),
    UnknownEndpoint { edge: usize, label: String },
    DuplicateEdge { a: String, b: String },
    NonPositiveActivation { a: String, b: String, psi: f64 },
    NonFiniteHeat { a: String, b: String },
    InvalidBeta(f64),
    Disconnected(Vec<Vec<String>>),
}

impl Violation {
    /// Violations that make the document structurally malformed rather than merely invalid.
    pub fn is_schema(&self) -> bool {
        matches!(
            self,
            Violation::DuplicateEdge { .. }
                | Violation::UnknownEndpoint { .. }
                | Violation::DuplicateState(_)
        )
    }

    pub fn invariant(&self) -> &'static str {
        match self {
            Violation::TooFewStates(_) => "at-least-two-states",
            Violation::EmptyLabel(_) => "nonempty-label",
            Violation::WhitespaceInLabel(_) => "no-whitespace-label",
            Violation::DuplicateState(_) => "unique-states",
            Violation::SelfLoop(_) => "no-self-loop",
            Violation::UnknownEndpoint { .. } => "known-endpoints",
            Violation::DuplicateEdge { .. } => "unique-edges",
            Violation::NonPositiveActivation { .. } => "activation-positivity",
            Violation::NonFiniteHeat { .. } => "finite-heat",
            Violation::InvalidBeta(_) => "nonnegative-beta",
            Violation::Disconnected(_) => "irreducibility",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] ", self.invariant())?;
        match self {
            Violation::TooFewStates(n) => write!(f, "network has {n} state(s)"),
            Violation::EmptyLabel(i) => write!(f, "state #{i} has an empty label"),
            Violation::WhitespaceInLabel(s) => write!(f, "label `{s}` contains whitespace"),
            Violation::DuplicateState(s) => write!(f, "state `{s}` listed twice"),
            Violation::SelfLoop(s) => write!(f, "edge ({s},{s}) is a self-loop"),
            Violation::UnknownEndpoint { edge, label } => {
                write!(f, "edge #{edge} references unknown state `{label}`")
            }
            Violation::DuplicateEdge { a, b } => write!(f, "edge {{{a},{b}}} appears twice"),
            Violation::NonPositiveActivation { a, b, psi } => {
                write!(f, "edge {{{a},{b}}} has activation {psi}")
            }
            Violation::NonFiniteHeat { a, b } => write!(f, "edge {{{a},{b}}} has non-finite heat"),
            Violation::InvalidBeta(b) => write!(f, "beta = {b}"),
            Violation::Disconnected(c) => {
                let parts: Vec<String> = c.iter().map(|c| format!("{{{}}}", c.join(","))).collect();
                write!(f, "components {}", parts.join(" "))
            }
        }
    }
}

/// Lists every invariant the document breaks. Empty iff the document describes a valid network.
pub fn validate(doc: &NetworkDocument) -> Vec<Violation> {
    let mut out = Vec::new();
    if doc.states.len() < 2 {
        out.push(Violation::TooFewStates(doc.states.len()));
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, s) in doc.states.iter().enumerate() {
        if s.is_empty() {
            out.push(Violation::EmptyLabel(i));
        } else if s.chars().any(char::is_whitespace) {
            out.push(Violation::WhitespaceInLabel(s.clone()));
        }
        if index.insert(s.as_str(), i).is_some() {
            out.push(Violation::DuplicateState(s.clone()));
        }
    }
    if !(doc.beta.is_finite() && doc.beta >= 0.0) {
        out.push(Violation::InvalidBeta(doc.beta));
    }

    let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
    let mut uf = UnionFind::new(doc.states.len());
    for (k, e) in doc.edges.iter().enumerate() {
        let ia = index.get(e.a.as_str()).copied();
        let ib = index.get(e.b.as_str()).copied();
        for (label, idx) in [(&e.a, ia), (&e.b, ib)] {
            if idx.is_none() {
                out.push(Violation::UnknownEndpoint {
                    edge: k,
                    label: label.clone(),
                });
            }
        }
        if e.a == e.b {
            out.push(Violation::SelfLoop(e.a.clone()));
        }
        if !(e.psi > 0.0 && e.psi.is_finite()) {
            out.push(Violation::NonPositiveActivation {
                a: e.a.clone(),
                b: e.b.clone(),
                psi: e.psi,
            });
        }
        if !e.q.is_finite() {
            out.push(Violation::NonFiniteHeat {
                a: e.a.clone(),
                b: e.b.clone(),
            });
        }
        if let (Some(i), Some(j)) = (ia, ib) {
            if i != j {
                let key = (i.min(j), i.max(j));
                if seen.insert(key, ()).is_some() {
                    out.push(Violation::DuplicateEdge {
                        a: e.a.clone(),
                        b: e.b.clone(),
                    });
                }
                if e.psi > 0.0 {
                    uf.union(i, j);
                }
            }
        }
    }

    if doc.states.len() >= 2 {
        let comps = uf.components();
        if comps.len() > 1 {
            out.push(Violation::Disconnected(
                comps
                    .into_iter()
                    .map(|c| c.into_iter().map(|i| doc.states[i].clone()).collect())
                    .collect(),
            ));
        }
    }
    out
}

/// A validated, immutable stochastic network.
#[derive(Debug, Clone)]
pub struct Network {
    states: Vec<StateId>,
    edges: Vec<KineticEdge>,
    beta: f64,
    phi: Option<Vec<PhiEntry>>,
    index: HashMap<StateId, usize>,
    ends: Vec<(usize, usize)>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Network {
    pub fn from_document(doc: &NetworkDocument) -> Result<Self> {
        let violations = validate(doc);
        if !violations.is_empty() {
            if let Some(v) = violations.iter().find(|v| v.is_schema()) {
                return Err(Error::Schema(v.to_string()));
            }
            let (disconnected, rest): (Vec<_>, Vec<_>) = violations
                .into_iter()
                .partition(|v| matches!(v, Violation::Disconnected(_)));
            if !rest.is_empty() {
                return Err(Error::Validation(rest));
            }
            if let Some(Violation::Disconnected(components)) = disconnected.into_iter().next() {
                return Err(Error::Irreducible { components });
            }
        }

        let states: Vec<StateId> = doc.states.iter().map(|s| StateId(s.clone())).collect();
        let index: HashMap<StateId, usize> =
            states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut ends = Vec::with_capacity(doc.edges.len());
        let mut edges = Vec::with_capacity(doc.edges.len());
        let mut adjacency = vec![Vec::new(); states.len()];
        for (k, e) in doc.edges.iter().enumerate() {
            let a = index[&StateId(e.a.clone())];
            let b = index[&StateId(e.b.clone())];
            ends.push((a, b));
            adjacency[a].push((b, k));
            adjacency[b].push((a, k));
            edges.push(KineticEdge {
                a: StateId(e.a.clone()),
                b: StateId(e.b.clone()),
                heat_ab: e.q,
                activation: e.psi,
            });
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(Network {
            states,
            edges,
            beta: doc.beta,
            phi: doc.phi.clone(),
            index,
            ends,
            adjacency,
        })
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            states: self.states.iter().map(|s| s.0.clone()).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    a: e.a.0.clone(),
                    b: e.b.0.clone(),
                    q: e.heat_ab,
                    psi: e.activation,
                })
                .collect(),
            beta: self.beta,
            phi: self.phi.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        self.to_document().to_json()
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn edges(&self) -> &[KineticEdge] {
        &self.edges
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn phi_entries(&self) -> Option<&[PhiEntry]> {
        self.phi.as_deref()
    }

    pub fn label(&self, i: usize) -> &str {
        self.states[i].as_str()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(&StateId(label.to_owned()))
            .copied()
            .ok_or_else(|| Error::UnknownState(label.to_owned()))
    }

    /// Endpoints `(a, b)` of edge `k`, in its stored orientation.
    pub fn endpoints(&self, k: usize) -> (usize, usize) {
        self.ends[k]
    }

    /// Neighbors of `x` as `(neighbor, edge index)`, sorted by neighbor index.
    pub fn neighbors(&self, x: usize) -> &[(usize, usize)] {
        &self.adjacency[x]
    }

    pub fn edge_between(&self, x: usize, y: usize) -> Option<usize> {
        self.adjacency[x]
            .binary_search_by_key(&y, |&(n, _)| n)
            .ok()
            .map(|p| self.adjacency[x][p].1)
    }

    /// Heat of edge `k` traversed from `from`: `q(a,b)` or `-q(a,b)`.
    pub fn edge_heat_from(&self, k: usize, from: usize) -> f64 {
        let (a, _) = self.ends[k];
        if from == a {
            self.edges[k].heat_ab
        } else {
            -self.edges[k].heat_ab
        }
    }

    /// `q(x, y)`, or `None` if the pair is not an edge.
    pub fn heat(&self, x: usize, y: usize) -> Option<f64> {
        self.edge_between(x, y).map(|k| self.edge_heat_from(k, x))
    }

    pub fn activation(&self, k: usize) -> f64 {
        self.edges[k].activation
    }

    pub fn max_abs_heat(&self) -> f64 {
        self.edges.iter().map(|e| e.heat_ab.abs()).fold(0.0, f64::max)
    }

    /// Same graph and heat, new activations (one per edge, in edge order).
    pub fn with_activations(&self, psi: &[f64]) -> Result<Network> {
        if psi.len() != self.edges.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} activations, got {}",
                self.edges.len(),
                psi.len()
            )));
        }
        let mut doc = self.to_document();
        for (e, &p) in doc.edges.iter_mut().zip(psi) {
            e.psi = p;
        }
        Network::from_document(&doc)
    }

    pub fn with_beta(&self, beta: f64) -> Result<Network> {
        let mut doc = self.to_document();
        doc.beta = beta;
        Network::from_document(&doc)
    }
}

/// Parses and validates a network document.
pub fn parse_network(text: &str) -> Result<Network> {
    Network::from_document(&NetworkDocument::from_json(text)?)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        true
    }

    /// Components as sorted index lists, ordered by smallest member.
    pub(crate) fn components(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_root[r].push(i);
        }
        by_root.into_iter().filter(|c| !c.is_empty()).collect()
    }
}

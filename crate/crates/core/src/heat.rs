//! Heat along oriented self-avoiding paths, the bounds it puts on relative
//! occupations, and the heat partial order between states.

use std::fmt;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::LogSumExp;
use crate::model::Network;
use crate::stationary::RateMatrix;
use crate::trees::{for_each_spanning_tree, orient_toward, Limits};

/// Path heats within this distance of zero count as zero.
pub const ZERO_HEAT_TOL: f64 = 1e-12;

/// A self-avoiding walk along network edges together with its total heat.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedPath {
    pub vertices: Vec<usize>,
    pub heat: f64,
}

impl OrientedPath {
    pub fn new(network: &Network, vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidArgument("empty path".into()));
        }
        let mut seen = vec![false; network.n_states()];
        for &v in &vertices {
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidArgument(format!(
                    "path revisits `{}`",
                    network.label(v)
                )));
            }
        }
        for w in vertices.windows(2) {
            if network.edge_between(w[0], w[1]).is_none() {
                return Err(Error::InvalidArgument(format!(
                    "no edge {}-{}",
                    network.label(w[0]),
                    network.label(w[1])
                )));
            }
        }
        let heat = path_heat(network, &vertices);
        Ok(OrientedPath { vertices, heat })
    }

    pub fn reversed(&self) -> OrientedPath {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        OrientedPath {
            vertices,
            heat: -self.heat,
        }
    }

    pub fn from(&self) -> usize {
        self.vertices[0]
    }

    pub fn to(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    pub fn labels<'a>(&self, network: &'a Network) -> Vec<&'a str> {
        self.vertices.iter().map(|&v| network.label(v)).collect()
    }

    /// `(vertex labels, heat)` view for serialization.
    pub fn labelled<'a>(&'a self, network: &'a Network) -> LabelledPath<'a> {
        LabelledPath {
            path: self,
            network,
        }
    }
}

pub struct LabelledPath<'a> {
    path: &'a OrientedPath,
    network: &'a Network,
}

impl Serialize for LabelledPath<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("OrientedPath", 2)?;
        st.serialize_field("vertices", &self.path.labels(self.network))?;
        st.serialize_field("heat", &self.path.heat)?;
        st.end()
    }
}

/// Total heat `sum q` along consecutive vertices.
///
/// Always summed starting from the endpoint with the smaller index, so a
/// path and its reversal get heats that are exact negatives.
pub fn path_heat(network: &Network, vertices: &[usize]) -> f64 {
    let forward = |vs: &mut dyn Iterator<Item = &usize>| {
        let vs: Vec<usize> = vs.copied().collect();
        vs.windows(2)
            .map(|w| network.heat(w[0], w[1]).expect("path follows edges"))
            .sum::<f64>()
    };
    match (vertices.first(), vertices.last()) {
        (Some(&a), Some(&b)) if a > b => -forward(&mut vertices.iter().rev()),
        _ => forward(&mut vertices.iter()),
    }
}

fn check_path_cap(network: &Network, limits: &Limits) -> Result<()> {
    if network.n_states() > limits.max_path_states {
        return Err(Error::CapExceeded {
            what: "self-avoiding path enumeration",
            needed: network.n_states() as u64,
            cap: limits.max_path_states as u64,
            advice: "extremal-heat paths have no polynomial exact algorithm; reduce the network",
        });
    }
    Ok(())
}

/// Calls `visit` for every self-avoiding path `from -> to`, in lexicographic
/// order of vertex indices.
pub fn for_each_path<F>(network: &Network, from: usize, to: usize, limits: &Limits, mut visit: F) -> Result<()>
where
    F: FnMut(&[usize]),
{
    check_path_cap(network, limits)?;
    if from == to {
        return Err(Error::InvalidArgument("path endpoints must differ".into()));
    }
    let mut on_path = vec![false; network.n_states()];
    let mut path = vec![from];
    on_path[from] = true;
    dfs(network, to, &mut path, &mut on_path, &mut visit);
    Ok(())
}

fn dfs<F: FnMut(&[usize])>(
    network: &Network,
    to: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    visit: &mut F,
) {
    let u = *path.last().unwrap();
    for &(v, _) in network.neighbors(u) {
        if on_path[v] {
            continue;
        }
        path.push(v);
        if v == to {
            visit(path);
        } else {
            on_path[v] = true;
            dfs(network, to, path, on_path, visit);
            on_path[v] = false;
        }
        path.pop();
    }
}

/// Every self-avoiding oriented path `from -> to` with its heat.
pub fn enumerate_paths(network: &Network, from: usize, to: usize, limits: &Limits) -> Result<Vec<OrientedPath>> {
    let mut out = Vec::new();
    for_each_path(network, from, to, limits, |vs| {
        out.push(OrientedPath {
            vertices: vs.to_vec(),
            heat: path_heat(network, vs),
        })
    })?;
    Ok(out)
}

/// Extremal heats over all paths `y -> x`, with the first path (in
/// enumeration order) attaining each.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatBounds {
    pub min_heat: f64,
    pub max_heat: f64,
    pub min_path: OrientedPath,
    pub max_path: OrientedPath,
    pub n_paths: usize,
}

impl HeatBounds {
    /// Whether `log_ratio / beta` lies within the bounds up to `slack`.
    pub fn contains(&self, scaled_log_ratio: f64, slack: f64) -> bool {
        self.min_heat - slack <= scaled_log_ratio && scaled_log_ratio <= self.max_heat + slack
    }
}

/// Bounds on `(1/beta) log(rho(x)/rho(y))`: min and max heat over all paths `y -> x`.
pub fn heat_bounds(network: &Network, x: usize, y: usize, limits: &Limits) -> Result<HeatBounds> {
    let paths = enumerate_paths(network, y, x, limits)?;
    let mut min_p = &paths[0];
    let mut max_p = &paths[0];
    for p in &paths[1..] {
        if p.heat < min_p.heat {
            min_p = p;
        }
        if p.heat > max_p.heat {
            max_p = p;
        }
    }
    Ok(HeatBounds {
        min_heat: min_p.heat,
        max_heat: max_p.heat,
        min_path: min_p.clone(),
        max_path: max_p.clone(),
        n_paths: paths.len(),
    })
}

/// Extremal path heats for every ordered pair at once: entry `[y * n + x]`
/// holds `(min, max)` over all self-avoiding paths `y -> x` (`NaN` on the
/// diagonal). One depth-first sweep per source; heats are accumulated along
/// the walk, so they can differ from [`path_heat`] in the last bit.
pub fn all_pairs_heat_bounds(network: &Network, limits: &Limits) -> Result<Vec<(f64, f64)>> {
    check_path_cap(network, limits)?;
    let n = network.n_states();
    let mut out = vec![(f64::INFINITY, f64::NEG_INFINITY); n * n];
    let mut on_path = vec![false; n];
    for src in 0..n {
        on_path[src] = true;
        sweep(network, src, 0.0, &mut on_path, &mut out[src * n..(src + 1) * n]);
        on_path[src] = false;
        out[src * n + src] = (f64::NAN, f64::NAN);
    }
    Ok(out)
}

fn sweep(network: &Network, u: usize, heat: f64, on_path: &mut [bool], row: &mut [(f64, f64)]) {
    for &(v, k) in network.neighbors(u) {
        if on_path[v] {
            continue;
        }
        let h = heat + network.edge_heat_from(k, u);
        let slot = &mut row[v];
        slot.0 = slot.0.min(h);
        slot.1 = slot.1.max(h);
        on_path[v] = true;
        sweep(network, v, h, on_path, row);
        on_path[v] = false;
    }
}

/// `ln(rho(x)/rho(y))` as a ratio of tree sums:
/// `sum_T exp(-beta q(T_xy)) w(T_y) / sum_T w(T_y)`.
pub fn log_tree_ratio(network: &Network, x: usize, y: usize, beta: f64, limits: &Limits) -> Result<f64> {
    let rates = RateMatrix::build(network, beta)?;
    let mut num = LogSumExp::new();
    let mut den = LogSumExp::new();
    for_each_spanning_tree(network, limits, |edges| {
        let next = orient_toward(network, edges, y);
        let log_w: f64 = (0..network.n_states())
            .filter_map(|v| next[v].map(|u| rates.log_rate(v, u)))
            .sum();
        let mut path = vec![x];
        let mut v = x;
        while let Some(u) = next[v] {
            path.push(u);
            v = u;
        }
        let q_xy = path_heat(network, &path);
        num.add(log_w - beta * q_xy);
        den.add(log_w);
    })?;
    Ok(num.value() - den.value())
}

pub fn tree_ratio(network: &Network, x: usize, y: usize, beta: f64, limits: &Limits) -> Result<f64> {
    log_tree_ratio(network, x, y, beta, limits).map(f64::exp)
}

/// Position of `x` relative to `y` in the heat order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// Every path `y -> x` releases positive heat.
    StrictlyGreater,
    /// Every path `y -> x` releases nonnegative heat, some zero, some positive.
    WeaklyGreater,
    /// Every path between the two releases zero heat.
    EqualByZeroHeat,
    /// Paths `y -> x` of both signs exist.
    Incomparable,
    WeaklyLess,
    StrictlyLess,
}

impl Relation {
    pub fn tag(self) -> &'static str {
        match self {
            Relation::StrictlyGreater => "strictly-greater",
            Relation::WeaklyGreater => "weakly-greater",
            Relation::EqualByZeroHeat => "equal-by-zero-heat",
            Relation::Incomparable => "incomparable",
            Relation::WeaklyLess => "weakly-less",
            Relation::StrictlyLess => "strictly-less",
        }
    }

    /// The relation of `y` to `x`, given that of `x` to `y`.
    pub fn flip(self) -> Relation {
        match self {
            Relation::StrictlyGreater => Relation::StrictlyLess,
            Relation::WeaklyGreater => Relation::WeaklyLess,
            Relation::WeaklyLess => Relation::WeaklyGreater,
            Relation::StrictlyLess => Relation::StrictlyGreater,
            r => r,
        }
    }

    /// `x ⪰ y`.
    pub fn is_geq(self) -> bool {
        matches!(
            self,
            Relation::StrictlyGreater | Relation::WeaklyGreater | Relation::EqualByZeroHeat
        )
    }

    pub fn is_leq(self) -> bool {
        self.flip().is_geq()
    }

    pub fn comparable(self) -> bool {
        self != Relation::Incomparable
    }

    /// Classifies from the extremal heats of paths `y -> x`.
    pub fn classify(min_heat: f64, max_heat: f64) -> Relation {
        let tol = ZERO_HEAT_TOL;
        if min_heat > tol {
            Relation::StrictlyGreater
        } else if min_heat >= -tol {
            if max_heat > tol {
                Relation::WeaklyGreater
            } else {
                Relation::EqualByZeroHeat
            }
        } else if max_heat < -tol {
            Relation::StrictlyLess
        } else if max_heat <= tol {
            Relation::WeaklyLess
        } else {
            Relation::Incomparable
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Heat-order classification of `x` against `y`, with min- and max-heat witnesses `y -> x`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatOrderResult {
    pub x: usize,
    pub y: usize,
    pub relation: Relation,
    pub min_witness: OrientedPath,
    pub max_witness: OrientedPath,
}

impl HeatOrderResult {
    fn from_bounds(x: usize, y: usize, b: HeatBounds) -> Self {
        HeatOrderResult {
            x,
            y,
            relation: Relation::classify(b.min_heat, b.max_heat),
            min_witness: b.min_path,
            max_witness: b.max_path,
        }
    }

    /// The same comparison seen from `y`.
    pub fn reversed(&self) -> HeatOrderResult {
        HeatOrderResult {
            x: self.y,
            y: self.x,
            relation: self.relation.flip(),
            min_witness: self.max_witness.reversed(),
            max_witness: self.min_witness.reversed(),
        }
    }

    pub fn to_json(&self, network: &Network) -> serde_json::Value {
        serde_json::json!({
            "x": network.label(self.x),
            "y": network.label(self.y),
            "relation": self.relation.tag(),
            "min_witness": self.min_witness.labelled(network),
            "max_witness": self.max_witness.labelled(network),
        })
    }
}

pub fn heat_order(network: &Network, x: usize, y: usize, limits: &Limits) -> Result<HeatOrderResult> {
    let b = heat_bounds(network, x, y, limits)?;
    Ok(HeatOrderResult::from_bounds(x, y, b))
}

/// All-pairs heat order.
#[derive(Debug, Clone)]
pub struct OrderDigest {
    n: usize,
    /// `results[i * n + j]` compares state `i` against state `j`; `None` on the diagonal.
    results: Vec<Option<HeatOrderResult>>,
}

impl OrderDigest {
    pub fn get(&self, x: usize, y: usize) -> Option<&HeatOrderResult> {
        self.results[x * self.n + y].as_ref()
    }

    pub fn relation(&self, x: usize, y: usize) -> Option<Relation> {
        self.get(x, y).map(|r| r.relation)
    }

    /// Every pair of distinct states is comparable.
    pub fn is_complete(&self) -> bool {
        self.results
            .iter()
            .flatten()
            .all(|r| r.relation.comparable())
    }

    pub fn incomparable_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.n {
            for y in x + 1..self.n {
                if self.relation(x, y) == Some(Relation::Incomparable) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    fn geq(&self, x: usize, y: usize) -> bool {
        x == y || self.relation(x, y).is_some_and(Relation::is_geq)
    }

    /// First triple `(a, b, c)` with `a ⪰ b`, `b ⪰ c` but not `a ⪰ c`.
    pub fn transitivity_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.n;
        for a in 0..n {
            for b in 0..n {
                if !self.geq(a, b) {
                    continue;
                }
                for c in 0..n {
                    if self.geq(b, c) && !self.geq(a, c) {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    pub fn to_json(&self, network: &Network) -> serde_json::Value {
        let matrix: Vec<Vec<Option<&str>>> = (0..self.n)
            .map(|x| (0..self.n).map(|y| self.relation(x, y).map(Relation::tag)).collect())
            .collect();
        let mut witnesses = Vec::new();
        for x in 0..self.n {
            for y in x + 1..self.n {
                witnesses.push(self.get(x, y).unwrap().to_json(network));
            }
        }
        serde_json::json!({
            "states": network.states(),
            "relations": matrix,
            "complete": self.is_complete(),
            "witnesses": witnesses,
        })
    }
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.tag())
    }
}

/// Classifies every pair once and derives the reverse by sign flip; checks transitivity of ⪰.
pub fn order_digest(network: &Network, limits: &Limits) -> Result<OrderDigest> {
    check_path_cap(network, limits)?;
    let n = network.n_states();
    let mut results = vec![None; n * n];
    for x in 0..n {
        for y in x + 1..n {
            let r = heat_order(network, x, y, limits)?;
            results[y * n + x] = Some(r.reversed());
            results[x * n + y] = Some(r);
        }
    }
    let digest = OrderDigest { n, results };
    if let Some((a, b, c)) = digest.transitivity_violation() {
        return Err(Error::Internal(format!(
            "heat order not transitive on ({}, {}, {})",
            network.label(a),
            network.label(b),
            network.label(c)
        )));
    }
    Ok(digest)
}

//! Rate matrix and the stationary distribution, computed three ways:
//! a linear solve of the master equation, explicit in-tree sums over all
//! spanning trees, and principal cofactors of the rate Laplacian.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::{log_add, normalize_log, LogSumExp};
use crate::model::{Network, StateId};
use crate::trees::{for_each_spanning_tree, orient_toward, Limits};

/// Above this value of `beta * max|q|` results carry a conditioning warning.
pub const CONDITIONING_THRESHOLD: f64 = 300.0;

/// Directed rates `k(x,y)` at a fixed inverse temperature.
///
/// Rates are kept as logarithms, `-inf` marking absent pairs; linear values
/// are derived on demand.
#[derive(Debug, Clone)]
pub struct RateMatrix {
    network: Network,
    beta: f64,
    log_k: Vec<f64>,
    log_escape: Vec<f64>,
}

impl RateMatrix {
    /// `k(x,y) = psi(x,y) exp(beta q(x,y) / 2)`.
    pub fn build(network: &Network, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Self::from_arc_log_rates(network, beta, |k, from| {
            network.activation(k).ln() + 0.5 * beta * network.edge_heat_from(k, from)
        })
    }

    /// Builds from an explicit log-rate per oriented edge, `log_rate(edge, from)`.
    pub fn from_arc_log_rates<F>(network: &Network, beta: f64, log_rate: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> f64,
    {
        check_beta(beta)?;
        let n = network.n_states();
        let mut log_k = vec![f64::NEG_INFINITY; n * n];
        for k in 0..network.n_edges() {
            let (a, b) = network.endpoints(k);
            let (ab, ba) = (log_rate(k, a), log_rate(k, b));
            if !ab.is_finite() || !ba.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite log-rate on edge {}-{}",
                    network.label(a),
                    network.label(b)
                )));
            }
            log_k[a * n + b] = ab;
            log_k[b * n + a] = ba;
        }
        let log_escape = (0..n)
            .map(|x| {
                let mut acc = LogSumExp::new();
                for &(y, _) in network.neighbors(x) {
                    acc.add(log_k[x * n + y]);
                }
                acc.value()
            })
            .collect();
        Ok(RateMatrix {
            network: network.clone(),
            beta,
            log_k,
            log_escape,
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_states(&self) -> usize {
        self.network.n_states()
    }

    pub fn log_rate(&self, x: usize, y: usize) -> f64 {
        self.log_k[x * self.n_states() + y]
    }

    /// `k(x,y)`; zero when there is no edge.
    pub fn rate(&self, x: usize, y: usize) -> f64 {
        self.log_rate(x, y).exp()
    }

    pub fn log_escape(&self, x: usize) -> f64 {
        self.log_escape[x]
    }

    /// `xi(x) = sum_y k(x,y)`.
    pub fn escape(&self, x: usize) -> f64 {
        self.log_escape[x].exp()
    }

    /// Jump-chain probability `p(x,y) = k(x,y) / xi(x)`.
    pub fn jump_prob(&self, x: usize, y: usize) -> f64 {
        (self.log_rate(x, y) - self.log_escape[x]).exp()
    }

    pub fn max_log_rate(&self) -> f64 {
        self.log_k.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest deviation from `log k(x,y) - log k(y,x) = beta q(x,y)` over all edges.
    pub fn detailed_balance_defect(&self) -> f64 {
        let net = &self.network;
        (0..net.n_edges())
            .map(|k| {
                let (a, b) = net.endpoints(k);
                (self.log_rate(a, b) - self.log_rate(b, a) - self.beta * net.edges()[k].heat_ab)
                    .abs()
            })
            .fold(0.0, f64::max)
    }

    /// Warning text when rates span so many decades that linear-domain results are unreliable.
    pub fn conditioning_warning(&self) -> Option<String> {
        let spread = self.beta * self.network.max_abs_heat();
        (spread > CONDITIONING_THRESHOLD).then(|| {
            format!(
                "beta*max|q| = {spread} exceeds {CONDITIONING_THRESHOLD}; \
                 only log-domain methods (trees, matrix-tree) are reliable"
            )
        })
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("beta must be finite and >= 0, got {beta}")))
    }
}

/// Which solver produced a [`StationaryDist`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    LinearSolve,
    TreeEnumeration,
    MatrixTree,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::LinearSolve => "linear-solve",
            Method::TreeEnumeration => "tree-enumeration",
            Method::MatrixTree => "matrix-tree",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A strictly positive probability vector over the states.
#[derive(Debug, Clone)]
pub struct StationaryDist {
    pub states: Vec<StateId>,
    pub probs: Vec<f64>,
    /// Natural logarithms of `probs`; finite even where `probs` underflows.
    pub log_probs: Vec<f64>,
    pub method: Method,
    /// `max_x |sum_y rho(x) k(x,y) - rho(y) k(y,x)|`.
    pub residual: f64,
    /// Largest rate, the scale against which `residual` is judged.
    pub max_rate: f64,
}

impl StationaryDist {
    fn from_log_weights(rates: &RateMatrix, log_w: &[f64], method: Method) -> Self {
        let (log_probs, probs) = normalize_log(log_w);
        let (residual, max_rate) = stationarity_residual(rates, &log_probs);
        StationaryDist {
            states: rates.network().states().to_vec(),
            probs,
            log_probs,
            method,
            residual,
            max_rate,
        }
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual / self.max_rate
    }

    /// `rho(x) / rho(y)`, from log-probabilities.
    pub fn ratio(&self, x: usize, y: usize) -> f64 {
        (self.log_probs[x] - self.log_probs[y]).exp()
    }

    pub fn total_variation(&self, other: &StationaryDist) -> f64 {
        total_variation(&self.probs, &other.probs)
    }
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

impl Serialize for StationaryDist {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Probs<'a>(&'a StationaryDist);
        impl Serialize for Probs<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.probs.len()))?;
                for (st, p) in self.0.states.iter().zip(&self.0.probs) {
                    m.serialize_entry(st.as_str(), p)?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("method", self.method.as_str())?;
        m.serialize_entry("residual", &self.residual)?;
        m.serialize_entry("probs", &Probs(self))?;
        m.end()
    }
}

/// Stationarity defect with rates scaled by the largest rate, rescaled back.
fn stationarity_residual(rates: &RateMatrix, log_probs: &[f64]) -> (f64, f64) {
    let n = rates.n_states();
    let scale = rates.max_log_rate();
    let net = rates.network();
    let mut worst = 0.0f64;
    for x in 0..n {
        let mut net_flux = 0.0;
        for &(y, _) in net.neighbors(x) {
            let out = (log_probs[x] + rates.log_rate(x, y) - scale).exp();
            let inn = (log_probs[y] + rates.log_rate(y, x) - scale).exp();
            net_flux += out - inn;
        }
        worst = worst.max(net_flux.abs());
    }
    let max_rate = scale.exp();
    (worst * max_rate, max_rate)
}

/// Solves the master equation `rho Q = 0` with one equation replaced by normalization.
///
/// The unknowns are the stationary fluxes `v(y) = rho(y) xi(y)`, so the
/// system matrix holds jump probabilities in `[-1, 1]`; `rho` follows by
/// dividing out the escape rates.
pub fn solve_master(rates: &RateMatrix) -> Result<StationaryDist> {
    let n = rates.n_states();
    let net = rates.network();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        a[(x, x)] = -1.0;
        for &(y, _) in net.neighbors(x) {
            // row x: inflow into x from y
            a[(x, y)] += rates.jump_prob(y, x);
        }
    }
    let mut rhs = DVector::<f64>::zeros(n);
    for y in 0..n {
        a[(n - 1, y)] = 1.0;
    }
    rhs[n - 1] = 1.0;
    let v = a.full_piv_lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    if v.iter().any(|&f| !(f > 0.0) || !f.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let log_w: Vec<f64> = (0..n).map(|x| v[x].ln() - rates.log_escape(x)).collect();
    Ok(StationaryDist::from_log_weights(rates, &log_w, Method::LinearSolve))
}

/// Log-weights `ln W(x)` where `W(x)` sums in-tree weights over all spanning trees.
pub fn tree_log_weights(rates: &RateMatrix, limits: &Limits) -> Result<Vec<f64>> {
    let net = rates.network();
    let n = net.n_states();
    let mut acc = vec![LogSumExp::new(); n];
    let mut log_w = vec![0.0; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut stack = Vec::with_capacity(n);
    for_each_spanning_tree(net, limits, |edges| {
        // weight of the in-tree to state 0, then re-root along tree edges
        let next = orient_toward(net, edges, 0);
        for c in children.iter_mut() {
            c.clear();
        }
        let mut w0 = 0.0;
        for v in 1..n {
            let u = next[v].expect("spanning tree reaches every state");
            w0 += rates.log_rate(v, u);
            children[u].push(v);
        }
        log_w[0] = w0;
        stack.clear();
        stack.push(0);
        while let Some(u) = stack.pop() {
            for &c in &children[u] {
                log_w[c] = log_w[u] - rates.log_rate(c, u) + rates.log_rate(u, c);
                stack.push(c);
            }
        }
        for (a, &w) in acc.iter_mut().zip(&log_w) {
            a.add(w);
        }
    })?;
    Ok(acc.iter().map(LogSumExp::value).collect())
}

/// Kirchhoff formula: `rho(x) = W(x) / sum_y W(y)` by explicit tree enumeration.
pub fn stationary_by_trees(rates: &RateMatrix, limits: &Limits) -> Result<StationaryDist> {
    let log_w = tree_log_weights(rates, limits)?;
    Ok(StationaryDist::from_log_weights(rates, &log_w, Method::TreeEnumeration))
}

/// `ln det` of the rate Laplacian `L = diag(xi) - K` with row and column `root` removed.
///
/// Eliminates the other states one at a time. Each elimination is the
/// Schur complement of a Laplacian, which is again a Laplacian (the chain
/// censored to the remaining states), so every pivot is that state's current
/// escape rate: a sum of positive terms, never a difference. All arithmetic
/// stays in the log domain.
pub fn log_principal_cofactor(rates: &RateMatrix, root: usize) -> f64 {
    let n = rates.n_states();
    let mut lk: Vec<f64> = (0..n * n).map(|i| rates.log_rate(i / n, i % n)).collect();
    for i in 0..n {
        lk[i * n + i] = f64::NEG_INFINITY;
    }
    let mut active = vec![true; n];
    let mut log_det = 0.0;
    for y in (0..n).filter(|&y| y != root) {
        let mut pivot = LogSumExp::new();
        for c in 0..n {
            if active[c] && c != y {
                pivot.add(lk[y * n + c]);
            }
        }
        let pivot = pivot.value();
        log_det += pivot;
        active[y] = false;
        for a in 0..n {
            let ay = lk[a * n + y];
            if !active[a] || a == root || ay == f64::NEG_INFINITY {
                continue;
            }
            for b in 0..n {
                let yb = lk[y * n + b];
                if !active[b] || b == a || yb == f64::NEG_INFINITY {
                    continue;
                }
                lk[a * n + b] = log_add(lk[a * n + b], ay + yb - pivot);
            }
        }
    }
    log_det
}

/// Stationary distribution from principal cofactors of the rate Laplacian
/// (Markov chain tree theorem), computed subtraction-free in the log domain.
pub fn stationary_by_matrix_tree(rates: &RateMatrix) -> Result<StationaryDist> {
    let n = rates.n_states();
    let log_w: Vec<f64> = (0..n).map(|x| log_principal_cofactor(rates, x)).collect();
    if log_w.iter().any(|w| !w.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(StationaryDist::from_log_weights(rates, &log_w, Method::MatrixTree))
}

/// Solver selection for [`stationary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    /// Tree enumeration up to the tree-state cap, matrix-tree beyond it.
    Auto,
    Solve,
    Trees,
    MatrixTree,
}

pub fn stationary(rates: &RateMatrix, choice: MethodChoice, limits: &Limits) -> Result<StationaryDist> {
    match choice {
        MethodChoice::Solve => solve_master(rates),
        MethodChoice::Trees => stationary_by_trees(rates, limits),
        MethodChoice::MatrixTree => stationary_by_matrix_tree(rates),
        MethodChoice::Auto => {
            if rates.n_states() > limits.max_tree_states {
                stationary_by_matrix_tree(rates)
            } else {
                match stationary_by_trees(rates, limits) {
                    Err(Error::CapExceeded { .. }) => stationary_by_matrix_tree(rates),
                    r => r,
                }
            }
        }
    }
}

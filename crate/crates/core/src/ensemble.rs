//! Random and canonical network families for tests, sweeps and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::lowtemp::{load_phi, PhiTable};
use crate::model::{EdgeRecord, Network, NetworkDocument, PhiEntry};

/// Parameters of a random connected network.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleSpec {
    pub min_states: usize,
    pub max_states: usize,
    /// Probability of each non-tree pair becoming an edge.
    pub extra_edge_prob: f64,
    /// Heats are uniform in `[-heat_range, heat_range]`.
    pub heat_range: f64,
    /// Activations are log-uniform in `[psi_min, psi_max]`.
    pub psi_min: f64,
    pub psi_max: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            min_states: 3,
            max_states: 10,
            extra_edge_prob: 0.3,
            heat_range: 3.0,
            psi_min: 0.1,
            psi_max: 10.0,
        }
    }
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

/// Random spanning tree plus independent extra edges, as unordered pairs.
pub fn random_connected_pairs<R: Rng>(rng: &mut R, n: usize, extra_edge_prob: f64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut present = vec![false; n * n];
    let mut pairs = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let (a, b) = (order[i], order[j]);
        present[a * n + b] = true;
        present[b * n + a] = true;
        pairs.push((a.min(b), a.max(b)));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !present[a * n + b] && rng.gen_bool(extra_edge_prob) {
                pairs.push((a, b));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

fn build(n: usize, pairs: &[(usize, usize)], heat: impl Fn(usize, usize) -> f64, psi: &[f64], beta: f64) -> Network {
    let names = labels(n);
    let doc = NetworkDocument {
        edges: pairs
            .iter()
            .zip(psi)
            .map(|(&(a, b), &p)| EdgeRecord {
                a: names[a].clone(),
                b: names[b].clone(),
                q: heat(a, b),
                psi: p,
            })
            .collect(),
        states: names,
        beta,
        phi: None,
    };
    Network::from_document(&doc).expect("generated network is valid")
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

/// A random connected network with independent heats (generically driven).
pub fn random_network<R: Rng>(rng: &mut R, spec: &EnsembleSpec, beta: f64) -> Network {
    let n = rng.gen_range(spec.min_states..=spec.max_states);
    random_network_with_size(rng, spec, n, beta)
}

pub fn random_network_with_size<R: Rng>(rng: &mut R, spec: &EnsembleSpec, n: usize, beta: f64) -> Network {
    let pairs = random_connected_pairs(rng, n, spec.extra_edge_prob);
    let heats: Vec<f64> = pairs
        .iter()
        .map(|_| rng.gen_range(-spec.heat_range..=spec.heat_range))
        .collect();
    let psi: Vec<f64> = pairs.iter().map(|_| log_uniform(rng, spec.psi_min, spec.psi_max)).collect();
    let lookup = |a: usize, b: usize| heats[pairs.iter().position(|&p| p == (a, b)).unwrap()];
    build(n, &pairs, lookup, &psi, beta)
}

/// A random connected network at global detailed balance, `q(x,y) = E(x) - E(y)`.
/// Returns the network and its energies.
pub fn detailed_balance_network<R: Rng>(rng: &mut R, spec: &EnsembleSpec, beta: f64) -> (Network, Vec<f64>) {
    let n = rng.gen_range(spec.min_states..=spec.max_states);
    let energy: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(-spec.heat_range / 2.0..=spec.heat_range / 2.0))
        .collect();
    let pairs = random_connected_pairs(rng, n, spec.extra_edge_prob);
    let psi: Vec<f64> = pairs.iter().map(|_| log_uniform(rng, spec.psi_min, spec.psi_max)).collect();
    let net = build(n, &pairs, |a, b| energy[a] - energy[b], &psi, beta);
    (net, energy)
}

/// Ring `1 -> 2 -> ... -> N -> 1` with `q(x, x+1) = q[x]` and activation `p[x]`
/// on the edge `{x, x+1}`. States are labelled `1..=N`.
pub fn ring(q: &[f64], p: &[f64], beta: f64) -> Network {
    assert_eq!(q.len(), p.len());
    let n = q.len();
    let names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let doc = NetworkDocument {
        edges: (0..n)
            .map(|i| EdgeRecord {
                a: names[i].clone(),
                b: names[(i + 1) % n].clone(),
                q: q[i],
                psi: p[i],
            })
            .collect(),
        states: names,
        beta,
        phi: None,
    };
    Network::from_document(&doc).expect("ring is valid")
}

/// Random network with an explicit zero-temperature exponent table
/// `phi(x,y) = q(x,y)/2 + s{x,y}` for a random symmetric part `s`.
///
/// With `quantum = Some(h)`, heats are multiples of `2h` and `s` of `h`, so
/// every exponent is a multiple of `h` and all tree sums are exact.
pub fn random_lowt_network<R: Rng>(rng: &mut R, n: usize, extra_edge_prob: f64, quantum: Option<f64>) -> (Network, PhiTable) {
    let pairs = random_connected_pairs(rng, n, extra_edge_prob);
    let draw = |rng: &mut R, range: f64, step: f64| match quantum {
        Some(h) => {
            let steps = (range / (step * h)).round() as i64;
            (rng.gen_range(-steps..=steps) as f64) * step * h
        }
        None => rng.gen_range(-range..=range),
    };
    let heats: Vec<f64> = pairs.iter().map(|_| draw(rng, 3.0, 2.0)).collect();
    let sym: Vec<f64> = pairs.iter().map(|_| draw(rng, 2.0, 1.0)).collect();
    let psi = vec![1.0; pairs.len()];
    let lookup = |a: usize, b: usize| heats[pairs.iter().position(|&p| p == (a, b)).unwrap()];
    let net = build(n, &pairs, lookup, &psi, 1.0);
    let mut entries = Vec::with_capacity(2 * pairs.len());
    for (i, &(a, b)) in pairs.iter().enumerate() {
        entries.push(PhiEntry {
            from: net.label(a).into(),
            to: net.label(b).into(),
            value: heats[i] / 2.0 + sym[i],
        });
        entries.push(PhiEntry {
            from: net.label(b).into(),
            to: net.label(a).into(),
            value: -heats[i] / 2.0 + sym[i],
        });
    }
    let phi = load_phi(&net, &entries).expect("consistent by construction");
    (net, phi)
}

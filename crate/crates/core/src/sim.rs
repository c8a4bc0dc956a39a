//! Kinetic Monte Carlo for the jump process.
//!
//! Direct sampling: from state `x` wait an exponential time with rate
//! `xi(x)`, then jump to `y` with probability `p(x,y)`.
//!
//! # Random numbers
//!
//! Trajectories are reproducible from a 64-bit seed. The generator is
//! ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), seeded through
//! `SeedableRng::seed_from_u64`, which expands the seed with a PCG32 stream
//! into the 256-bit ChaCha key. Uniforms in `[0, 1)` take the top 53 bits of
//! one `u64` output: `(u >> 11) * 2^-53`. Each step draws two uniforms, first
//! the waiting time `-ln(1 - u) / xi(x)`, then the successor by scanning the
//! cumulative jump probabilities in neighbor-index order.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Network;
use crate::stationary::RateMatrix;

/// One jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub beta: f64,
    pub initial: usize,
    pub events: Vec<Event>,
    pub horizon: f64,
}

impl Trajectory {
    /// State occupied at the end of the horizon.
    pub fn final_state(&self) -> usize {
        self.events.last().map_or(self.initial, |e| e.to)
    }

    /// The time-reversed path: jumps in reverse order and direction, at `horizon - t`.
    pub fn reversed(&self) -> Trajectory {
        let events = self
            .events
            .iter()
            .rev()
            .map(|e| Event {
                time: self.horizon - e.time,
                from: e.to,
                to: e.from,
            })
            .collect();
        Trajectory {
            seed: self.seed,
            beta: self.beta,
            initial: self.final_state(),
            events,
            horizon: self.horizon,
        }
    }

    /// The prefix of this trajectory up to `horizon`.
    pub fn truncated(&self, horizon: f64) -> Trajectory {
        let events = self.events.iter().take_while(|e| e.time < horizon).copied().collect();
        Trajectory {
            seed: self.seed,
            beta: self.beta,
            initial: self.initial,
            events,
            horizon: horizon.min(self.horizon),
        }
    }

    /// Line-oriented export: a `#` header, then `time from to q` per jump.
    pub fn export(&self, network: &Network) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# seed={} beta={:?} horizon={:?} initial={} jumps={}",
            self.seed,
            self.beta,
            self.horizon,
            network.label(self.initial),
            self.events.len()
        );
        for e in &self.events {
            let q = network.heat(e.from, e.to).unwrap_or(f64::NAN);
            let _ = writeln!(
                out,
                "{:?} {} {} {:?}",
                e.time,
                network.label(e.from),
                network.label(e.to),
                q
            );
        }
        out
    }
}

/// Samples a trajectory on `[0, horizon]`.
pub fn simulate(rates: &RateMatrix, initial: usize, horizon: f64, seed: u64) -> Result<Trajectory> {
    simulate_with(rates, initial, horizon, seed, usize::MAX)
}

/// As [`simulate`], stopping early after `max_jumps` jumps (the horizon is then
/// the time of the last jump).
pub fn simulate_with(
    rates: &RateMatrix,
    initial: usize,
    horizon: f64,
    seed: u64,
    max_jumps: usize,
) -> Result<Trajectory> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    let net = rates.network();
    if initial >= net.n_states() {
        return Err(Error::InvalidArgument("initial state out of range".into()));
    }
    let n = net.n_states();
    let escape: Vec<f64> = (0..n).map(|x| rates.escape(x)).collect();
    let jumps: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|x| {
            net.neighbors(x)
                .iter()
                .map(|&(y, _)| (y, rates.jump_prob(x, y)))
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::new();
    let mut t = 0.0;
    let mut x = initial;
    let mut horizon = horizon;
    loop {
        let u: f64 = rng.gen();
        let wait = -(1.0 - u).ln() / escape[x];
        if t + wait >= horizon {
            break;
        }
        t += wait;
        let r: f64 = rng.gen();
        let choices = &jumps[x];
        let mut acc = 0.0;
        let mut y = choices.last().expect("connected network").0;
        for &(cand, p) in choices {
            acc += p;
            if r < acc {
                y = cand;
                break;
            }
        }
        events.push(Event { time: t, from: x, to: y });
        x = y;
        if events.len() >= max_jumps {
            horizon = t;
            break;
        }
    }
    Ok(Trajectory {
        seed,
        beta: rates.beta(),
        initial,
        events,
        horizon,
    })
}

/// Time averages and jump bookkeeping of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalStats {
    /// Fraction of `[0, horizon]` spent in each state.
    pub occupation: Vec<f64>,
    /// `beta * sum q` over all jumps.
    pub entropy_flux: f64,
    /// `jump_counts[x * n + y]` = number of jumps `x -> y`.
    pub jump_counts: Vec<u64>,
}

impl EmpiricalStats {
    pub fn count(&self, x: usize, y: usize) -> u64 {
        let n = self.occupation.len();
        self.jump_counts[x * n + y]
    }
}

/// Validates the trajectory against the network and accumulates its statistics.
///
/// The entropy flux is summed per edge over net jump counts, in edge order,
/// so it is an exact function of the counts and negates exactly under time
/// reversal.
pub fn empirical_stats(trajectory: &Trajectory, network: &Network) -> Result<EmpiricalStats> {
    let n = network.n_states();
    let bad = |m: String| Err(Error::InconsistentTrajectory(m));
    if trajectory.initial >= n {
        return bad("initial state out of range".into());
    }
    if !(trajectory.horizon > 0.0) {
        return bad("horizon must be positive".into());
    }
    let mut time_in = vec![0.0; n];
    let mut counts = vec![0u64; n * n];
    let mut x = trajectory.initial;
    let mut last = 0.0;
    for (i, e) in trajectory.events.iter().enumerate() {
        if e.from != x {
            return bad(format!("event {i} starts in a state the previous event did not reach"));
        }
        if e.to >= n || network.edge_between(e.from, e.to).is_none() {
            return bad(format!("event {i} jumps along a missing edge"));
        }
        let strictly_after = if i == 0 { e.time >= 0.0 } else { e.time > last };
        if !strictly_after || e.time > trajectory.horizon {
            return bad(format!("event {i} time {} out of order", e.time));
        }
        time_in[x] += e.time - last;
        last = e.time;
        counts[e.from * n + e.to] += 1;
        x = e.to;
    }
    time_in[x] += trajectory.horizon - last;

    let total: f64 = time_in.iter().sum();
    let occupation = time_in.iter().map(|t| t / total).collect();
    let mut heat = 0.0;
    for k in 0..network.n_edges() {
        let (a, b) = network.endpoints(k);
        let net_jumps = counts[a * n + b] as f64 - counts[b * n + a] as f64;
        heat += network.edges()[k].heat_ab * net_jumps;
    }
    Ok(EmpiricalStats {
        occupation,
        entropy_flux: trajectory.beta * heat,
        jump_counts: counts,
    })
}

/// Stationary entropy production rate `beta * sum_edges q(a,b) J(a,b)`, with
/// `J(a,b) = rho(a) k(a,b) - rho(b) k(b,a)`.
pub fn stationary_entropy_rate(rates: &RateMatrix, probs: &[f64]) -> f64 {
    let net = rates.network();
    let mut s = 0.0;
    for k in 0..net.n_edges() {
        let (a, b) = net.endpoints(k);
        let current = probs[a] * rates.rate(a, b) - probs[b] * rates.rate(b, a);
        s += net.edges()[k].heat_ab * current;
    }
    rates.beta() * s
}

//! Acceptance checks. Each test writes one `PASS`/`FAIL` line to stderr
//! (uncaptured) and then asserts.

use std::collections::HashMap;
use std::io::Write;
use std::process::Command;
use std::time::Instant;

use blowtorch::blowtorch::{synthesize, Direction, SynthesisOptions};
use blowtorch::ensemble::{detailed_balance_network, random_lowt_network, random_network, ring, EnsembleSpec};
use blowtorch::heat::{all_pairs_heat_bounds, order_digest, tree_ratio, Relation};
use blowtorch::lowtemp::{
    load_phi, lowt_profile, min_in_tree_brute_force, phi_for, verify_asymptotics, AsymptoticsRow,
};
use blowtorch::model::{EdgeRecord, NetworkDocument, PhiEntry};
use blowtorch::sim::{empirical_stats, simulate, simulate_with, Trajectory};
use blowtorch::stationary::{
    solve_master, stationary_by_matrix_tree, stationary_by_trees, total_variation, RateMatrix,
};
use blowtorch::trees::Limits;
use blowtorch::Network;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BETAS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{tag}] criterion {id}: {name} ({detail})");
    assert!(pass, "criterion {id} failed: {detail}");
}

fn ensemble() -> Vec<Network> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let spec = EnsembleSpec::default();
    (0..200).map(|_| random_network(&mut rng, &spec, 1.0)).collect()
}

#[test]
fn c1_three_way_stationary_agreement() {
    let limits = Limits::default();
    let mut worst = 0.0f64;
    let mut solved = 0;
    for net in ensemble() {
        for beta in BETAS {
            let rates = RateMatrix::build(&net, beta).unwrap();
            let a = solve_master(&rates).unwrap();
            let b = stationary_by_trees(&rates, &limits).unwrap();
            let c = stationary_by_matrix_tree(&rates).unwrap();
            worst = worst
                .max(a.total_variation(&b))
                .max(a.total_variation(&c))
                .max(b.total_variation(&c));
            solved += 1;
        }
    }
    verdict(
        1,
        "three-way stationary agreement",
        worst <= 1e-9,
        &format!("{solved} solves, worst TV {worst:.2e} <= 1e-9"),
    );
}

#[test]
fn c2_heat_bound_containment() {
    let limits = Limits::default();
    let mut violations = 0usize;
    let mut checked = 0usize;
    for net in ensemble() {
        let n = net.n_states();
        let bounds = all_pairs_heat_bounds(&net, &limits).unwrap();
        for beta in BETAS {
            let rates = RateMatrix::build(&net, beta).unwrap();
            let rho = stationary_by_matrix_tree(&rates).unwrap();
            for x in 0..n {
                for y in 0..n {
                    if x == y {
                        continue;
                    }
                    let (lo, hi) = bounds[y * n + x];
                    let s = (rho.log_probs[x] - rho.log_probs[y]) / beta;
                    checked += 1;
                    if s < lo - 1e-9 || s > hi + 1e-9 {
                        violations += 1;
                    }
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let spec = EnsembleSpec::default();
    let mut collapse = 0.0f64;
    for _ in 0..50 {
        let (net, energy) = detailed_balance_network(&mut rng, &spec, 1.0);
        let n = net.n_states();
        let bounds = all_pairs_heat_bounds(&net, &limits).unwrap();
        for beta in BETAS {
            let rho = stationary_by_matrix_tree(&RateMatrix::build(&net, beta).unwrap()).unwrap();
            for x in 0..n {
                for y in 0..n {
                    if x != y {
                        let (lo, hi) = bounds[y * n + x];
                        let s = (rho.log_probs[x] - rho.log_probs[y]) / beta;
                        let exact = energy[y] - energy[x];
                        collapse = collapse.max(hi - lo).max((s - exact).abs()).max((lo - exact).abs());
                    }
                }
            }
        }
    }
    verdict(
        2,
        "heat-bound containment and equality collapse",
        violations == 0 && collapse <= 1e-10,
        &format!("{violations} violations in {checked} pair checks; detailed-balance collapse defect {collapse:.2e} <= 1e-10"),
    );
}

#[test]
fn c3_boltzmann_recovery() {
    let limits = Limits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let spec = EnsembleSpec::default();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (net, energy) = detailed_balance_network(&mut rng, &spec, 1.0);
        for beta in BETAS {
            let z: f64 = energy.iter().map(|e| (-beta * e).exp()).sum();
            let gibbs: Vec<f64> = energy.iter().map(|e| (-beta * e).exp() / z).collect();
            let rates = RateMatrix::build(&net, beta).unwrap();
            for dist in [
                solve_master(&rates).unwrap(),
                stationary_by_trees(&rates, &limits).unwrap(),
                stationary_by_matrix_tree(&rates).unwrap(),
            ] {
                for (p, g) in dist.probs.iter().zip(&gibbs) {
                    worst = worst.max((p - g).abs());
                }
            }
        }
    }
    verdict(
        3,
        "Boltzmann recovery",
        worst <= 1e-9,
        &format!("max |rho - exp(-beta E)/Z| = {worst:.2e} <= 1e-9"),
    );
}

/// Three-term tree expansion of `rho(1)/rho(2)` on the 3-ring, written out by hand.
fn golden_ratio3(q: [f64; 3], p: [f64; 3], beta: f64) -> f64 {
    let [q1, q2, q3] = q;
    let [p1, p2, p3] = p;
    let h = beta / 2.0;
    let num = (-beta * q1).exp() * p1 * p2 * (h * (q1 - q2)).exp()
        + (beta * (q2 + q3)).exp() * p2 * p3 * (-h * (q2 + q3)).exp()
        + (-beta * q1).exp() * p1 * p3 * (h * (q1 + q3)).exp();
    let den = p1 * p2 * (h * (q1 - q2)).exp() + p2 * p3 * (-h * (q2 + q3)).exp() + p1 * p3 * (h * (q1 + q3)).exp();
    num / den
}

#[test]
fn c4_three_ring_golden() {
    let limits = Limits::default();
    let qs = [-1.5, 0.0, 0.7, 2.0];
    let ps = [0.2, 1.0, 3.5];
    let mut worst = 0.0f64;
    let mut cases = 0;
    let rel = |got: f64, want: f64| ((got - want) / want).abs();
    for &q1 in &qs {
        for &q2 in &qs {
            for &q3 in &qs {
                for &p1 in &ps {
                    for &p2 in &ps {
                        for &p3 in &ps {
                            for beta in [0.5, 1.0, 3.0] {
                                let (q, p) = ([q1, q2, q3], [p1, p2, p3]);
                                let want = golden_ratio3(q, p, beta);
                                let net = ring(&q, &p, beta);
                                let rates = RateMatrix::build(&net, beta).unwrap();
                                let got = [
                                    tree_ratio(&net, 0, 1, beta, &limits).unwrap(),
                                    solve_master(&rates).unwrap().ratio(0, 1),
                                    stationary_by_trees(&rates, &limits).unwrap().ratio(0, 1),
                                    stationary_by_matrix_tree(&rates).unwrap().ratio(0, 1),
                                ];
                                for g in got {
                                    worst = worst.max(rel(g, want));
                                }
                                cases += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let mut symmetric = 0.0f64;
    for (c, pp) in [(0.0, 1.0), (0.8, 1.0), (-1.3, 2.5), (2.0, 0.3)] {
        for beta in [0.5, 1.0, 3.0] {
            let net = ring(&[c; 3], &[pp; 3], beta);
            let rates = RateMatrix::build(&net, beta).unwrap();
            symmetric = symmetric
                .max((tree_ratio(&net, 0, 1, beta, &limits).unwrap() - 1.0).abs())
                .max((stationary_by_matrix_tree(&rates).unwrap().ratio(0, 1) - 1.0).abs())
                .max((golden_ratio3([c; 3], [pp; 3], beta) - 1.0).abs());
        }
    }
    verdict(
        4,
        "N=3 ring golden ratio",
        worst <= 1e-12 && symmetric <= 1e-12,
        &format!("{cases} grid points, worst relative error {worst:.2e}; symmetric |ratio - 1| {symmetric:.2e}"),
    );
}

/// `ln rho(x) - ln rho(y)` by tree enumeration, independent of the solver used in synthesis.
fn log_ratio_by_trees(net: &Network, x: usize, y: usize) -> f64 {
    let rates = RateMatrix::build(net, net.beta()).unwrap();
    let d = stationary_by_trees(&rates, &Limits::default()).unwrap();
    d.log_probs[x] - d.log_probs[y]
}

/// Synthesizes both directions; returns whether each was realized and the threshold cleared.
fn both_ways(net: &Network, x: usize, y: usize) -> bool {
    let limits = Limits::default();
    let opts = SynthesisOptions::default();
    let up = synthesize(net, x, y, Direction::XOverY, &limits, opts).unwrap();
    let down = synthesize(net, x, y, Direction::YOverX, &limits, opts).unwrap();
    let lr_up = log_ratio_by_trees(&up.network, x, y);
    let lr_down = log_ratio_by_trees(&down.network, x, y);
    lr_up > 0.0 && lr_down < 0.0 && lr_up > up.threshold.ln() && up.achieved_ratio > up.threshold
}

#[test]
fn c5_blowtorch_both_ways_and_refusal() {
    let limits = Limits::default();
    let mut ring_ok = 0;
    let mut ring_total = 0;
    for (q, beta) in [([1.0, 0.5, 1.0], 1.0), ([0.3, 2.0, -1.0], 2.0), ([2.0, -0.5, 0.6], 0.5), ([1.0, 1.0, 1.0], 5.0)] {
        let net = ring(&q, &[1.0; 3], beta);
        assert_eq!(order_digest(&net, &limits).unwrap().relation(0, 1), Some(Relation::Incomparable));
        ring_total += 1;
        ring_ok += both_ways(&net, 0, 1) as usize;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(555);
    let spec = EnsembleSpec {
        max_states: 8,
        ..EnsembleSpec::default()
    };
    let mut random_ok = 0;
    let mut random_total = 0;
    let mut ordered: Vec<(Network, usize, usize)> = Vec::new();
    while random_total < 50 || ordered.len() < 20 {
        let beta = BETAS[rng.gen_range(0..BETAS.len())];
        let net = random_network(&mut rng, &spec, beta);
        let digest = order_digest(&net, &limits).unwrap();
        let pairs = digest.incomparable_pairs();
        if random_total < 50 && !pairs.is_empty() {
            let (x, y) = pairs[rng.gen_range(0..pairs.len())];
            random_total += 1;
            random_ok += both_ways(&net, x, y) as usize;
        }
        let n = net.n_states();
        for x in 0..n {
            for y in 0..n {
                if x != y && digest.relation(x, y).is_some_and(|r| r.is_geq()) && ordered.len() < 20 {
                    ordered.push((net.clone(), x, y));
                }
            }
        }
    }

    let mut refused = 0;
    for (net, x, y) in &ordered {
        for dir in [Direction::XOverY, Direction::YOverX] {
            match synthesize(net, *x, *y, dir, &limits, SynthesisOptions::default()) {
                Err(e) if e.exit_code() == 3 => refused += 1,
                _ => {}
            }
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ordered.json");
    std::fs::write(&path, ring(&[-1.0, 0.4, 0.2], &[1.0; 3], 1.0).to_json()).unwrap();
    let cli_code = Command::new(env!("CARGO_BIN_EXE_blowtorch"))
        .args(["blowtorch", path.to_str().unwrap(), "1", "2"])
        .output()
        .unwrap()
        .status
        .code();

    let mut inversions = 0;
    for i in 0..1000 {
        let (net, x, y) = &ordered[i % ordered.len()];
        let psi: Vec<f64> = (0..net.n_edges()).map(|_| 10f64.powf(rng.gen_range(-3.0..=3.0))).collect();
        let kin = net.with_activations(&psi).unwrap();
        let rho = stationary_by_matrix_tree(&RateMatrix::build(&kin, kin.beta()).unwrap()).unwrap();
        if rho.log_probs[*x] - rho.log_probs[*y] < -1e-9 {
            inversions += 1;
        }
    }

    let pass = ring_ok == ring_total
        && random_ok == 50
        && refused == 2 * ordered.len()
        && cli_code == Some(3)
        && inversions == 0;
    verdict(
        5,
        "blowtorch both ways, refusal and non-inversion",
        pass,
        &format!(
            "ambiguous rings {ring_ok}/{ring_total}; random incomparable pairs {random_ok}/{random_total}; \
             refusals {refused}/{}; CLI exit {cli_code:?}; inversions {inversions}/1000",
            2 * ordered.len()
        ),
    );
}

/// Below this, `(1/beta) ln rho` is at the resolution of `f64` and `d` plateaus.
const DISTANCE_FLOOR: f64 = 1e-12;

fn strictly_decreasing(rows: &[AsymptoticsRow]) -> bool {
    rows.windows(2)
        .all(|w| w[1].distance < w[0].distance || w[0].distance.max(w[1].distance) <= DISTANCE_FLOOR)
}

#[test]
fn c6_low_temperature_exponents() {
    let limits = Limits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut mismatches = 0;
    let mut roots = 0;
    for i in 0..300 {
        let n = rng.gen_range(2..=7);
        let p = [0.2, 0.5, 0.8][i % 3];
        let quantum = if i % 2 == 0 { Some(0.25) } else { None };
        let (net, phi) = random_lowt_network(&mut rng, n, p, quantum);
        let profile = lowt_profile(&phi);
        for x in 0..n {
            let brute = min_in_tree_brute_force(&net, x, &limits, |a, b| profile.u(a, b)).unwrap();
            roots += 1;
            if brute != profile.min_tree_u[x] {
                mismatches += 1;
            }
        }
    }

    let betas = [5.0, 10.0, 20.0, 40.0];
    let mut not_decreasing = 0;
    let mut worst_d40 = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(3..=7);
        let (_, phi) = random_lowt_network(&mut rng, n, 0.4, None);
        let report = verify_asymptotics(&phi, &betas).unwrap();
        if !strictly_decreasing(&report.rows) {
            not_decreasing += 1;
        }
        worst_d40 = worst_d40.max(report.rows[3].distance);
    }

    let two = Network::from_document(&NetworkDocument {
        states: vec!["a".into(), "b".into()],
        edges: vec![EdgeRecord {
            a: "a".into(),
            b: "b".into(),
            q: 0.3,
            psi: 1.0,
        }],
        beta: 1.0,
        phi: None,
    })
    .unwrap();
    let entries = [
        PhiEntry { from: "a".into(), to: "b".into(), value: 0.4 },
        PhiEntry { from: "b".into(), to: "a".into(), value: 0.1 },
    ];
    let two_phi = load_phi(&two, &entries).unwrap();
    let two_report = verify_asymptotics(&two_phi, &betas).unwrap();
    // rho(a)/rho(b) = exp(-0.3 beta), so d(beta) = ln(1 + exp(-0.3 beta)) / beta.
    let closed_form_defect = two_report
        .rows
        .iter()
        .map(|r| (r.distance - (-0.3 * r.beta).exp().ln_1p() / r.beta).abs())
        .fold(0.0, f64::max);
    let two_d40 = two_report.rows[3].distance;
    let two_decreasing = strictly_decreasing(&two_report.rows);

    let pass = mismatches == 0
        && not_decreasing == 0
        && worst_d40 < 0.05
        && two_d40 < 1e-6
        && two_decreasing
        && closed_form_defect < 1e-12;
    verdict(
        6,
        "low-temperature exponents",
        pass,
        &format!(
            "arborescence vs brute force {mismatches} mismatches over {roots} roots; \
             non-decreasing sweeps {not_decreasing}/100; worst d(40) {worst_d40:.3e}; \
             two-state d(40) {two_d40:.2e}, closed-form defect {closed_form_defect:.1e}"
        ),
    );
}

#[test]
fn c7_escherian_rings() {
    let rings: [&[f64]; 7] = [
        &[1.0, 2.0, 3.0],
        &[2.0, 3.0, 1.0],
        &[3.0, 1.0, 2.0],
        &[3.0, 2.0, 1.0],
        &[1.0, 2.0, 3.0, 4.0],
        &[2.5, 0.5, 2.0, 1.5, 3.0],
        &[4.0, 3.0, 1.0, 2.0, 5.0, 6.0],
    ];
    let mut failures = Vec::new();
    let mut min_mass = 1.0f64;
    for q in rings {
        let net = ring(q, &vec![1.0; q.len()], 40.0);
        let phi = phi_for(&net).unwrap();
        let profile = lowt_profile(&phi);
        let qmin = q.iter().cloned().fold(f64::INFINITY, f64::min);
        let argmin: Vec<usize> = (0..q.len()).filter(|&i| q[i] == qmin).collect();
        let report = verify_asymptotics(&phi, &[40.0]).unwrap();
        let mass = report.rows[0].dominant_mass;
        let direct = solve_master(&RateMatrix::build(&net, 40.0).unwrap()).unwrap();
        let direct_mass: f64 = argmin.iter().map(|&x| direct.probs[x]).sum();
        min_mass = min_mass.min(mass).min(direct_mass);
        if profile.dominant != argmin || profile.absolutely_dominant != argmin || !profile.escherian || mass <= 0.99 {
            failures.push(format!("{q:?}"));
        }
    }
    verdict(
        7,
        "escherian rings",
        failures.is_empty() && min_mass > 0.99,
        &format!("{} rings, failures {failures:?}, min dominant mass at beta=40 {min_mass:.9}", rings.len()),
    );
}

fn driven_five() -> Network {
    let names = ["a", "b", "c", "d", "e"];
    let edge = |a: usize, b: usize, q: f64, psi: f64| EdgeRecord {
        a: names[a].into(),
        b: names[b].into(),
        q,
        psi,
    };
    Network::from_document(&NetworkDocument {
        states: names.iter().map(|s| s.to_string()).collect(),
        edges: vec![
            edge(0, 1, 1.0, 1.0),
            edge(1, 2, 0.5, 2.0),
            edge(2, 3, -0.3, 0.7),
            edge(3, 4, 0.8, 1.5),
            edge(4, 0, 0.6, 1.0),
            edge(0, 2, -0.4, 0.5),
        ],
        beta: 1.0,
        phi: None,
    })
    .unwrap()
}

/// `beta * sum q` over jumps, tallied from the raw event list.
fn flux_from_events(t: &Trajectory, net: &Network) -> f64 {
    let mut tally: HashMap<(usize, usize), i64> = HashMap::new();
    for e in &t.events {
        *tally.entry((e.from, e.to)).or_default() += 1;
    }
    let mut heat = 0.0;
    for k in 0..net.n_edges() {
        let (a, b) = net.endpoints(k);
        let fwd = tally.get(&(a, b)).copied().unwrap_or(0);
        let bwd = tally.get(&(b, a)).copied().unwrap_or(0);
        heat += net.edges()[k].heat_ab * (fwd - bwd) as f64;
    }
    t.beta * heat
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

#[test]
fn c8_simulator_consistency() {
    let net = driven_five();
    let rates = RateMatrix::build(&net, 1.0).unwrap();
    let rho = solve_master(&rates).unwrap().probs;
    let mean_rate: f64 = (0..5).map(|x| rho[x] * rates.escape(x)).sum();
    let horizon = 5e5 / mean_rate;

    let (mut d_t, mut d_2t) = (Vec::new(), Vec::new());
    let mut flux_defects = 0;
    let mut slowest = 0.0f64;
    let mut max_jumps = 0;
    for seed in 0..10u64 {
        let start = Instant::now();
        let long = simulate(&rates, 0, 2.0 * horizon, seed).unwrap();
        let long_stats = empirical_stats(&long, &net).unwrap();
        slowest = slowest.max(start.elapsed().as_secs_f64());
        max_jumps = max_jumps.max(long.events.len());
        let short = long.truncated(horizon);
        let short_stats = empirical_stats(&short, &net).unwrap();
        d_t.push(total_variation(&short_stats.occupation, &rho));
        d_2t.push(total_variation(&long_stats.occupation, &rho));
        for (t, s) in [(&long, &long_stats), (&short, &short_stats)] {
            let rev = empirical_stats(&t.reversed(), &net).unwrap();
            if s.entropy_flux != flux_from_events(t, &net) || rev.entropy_flux != -s.entropy_flux {
                flux_defects += 1;
            }
        }
    }
    let (m_t, m_2t) = (median(d_t), median(d_2t));
    let ratio = m_2t / m_t;

    let small = simulate_with(&rates, 2, 50.0, 9, 1000).unwrap();
    let small_ok = empirical_stats(&small, &net).unwrap().entropy_flux == flux_from_events(&small, &net);

    let pass = (0.5 / 1.5..=0.5 * 1.5).contains(&ratio) && flux_defects == 0 && small_ok && slowest < 60.0;
    verdict(
        8,
        "simulator consistency",
        pass,
        &format!(
            "median TV {m_t:.3e} at T, {m_2t:.3e} at 2T, ratio {ratio:.3} in [0.333, 0.75]; \
             flux identity defects {flux_defects}; {max_jumps} jumps in {slowest:.2}s"
        ),
    );
}

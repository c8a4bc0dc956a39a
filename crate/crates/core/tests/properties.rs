use blowtorch::ensemble::{random_lowt_network, random_network_with_size, EnsembleSpec};
use blowtorch::heat::{heat_bounds, order_digest, tree_ratio, Relation};
use blowtorch::lowtemp::{lowt_profile, min_in_tree_brute_force};
use blowtorch::sim::{empirical_stats, simulate};
use blowtorch::stationary::{solve_master, stationary_by_matrix_tree, stationary_by_trees, RateMatrix};
use blowtorch::trees::Limits;
use blowtorch::{parse_network, Network};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn network(seed: u64, n: usize) -> Network {
    let spec = EnsembleSpec::default();
    random_network_with_size(&mut ChaCha8Rng::seed_from_u64(seed), &spec, n, 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn documents_round_trip(seed in any::<u64>(), n in 2usize..9) {
        let net = network(seed, n);
        let text = net.to_json();
        let again = parse_network(&text).unwrap();
        prop_assert_eq!(again.to_json(), text);
        prop_assert_eq!(again.to_document(), net.to_document());
    }

    #[test]
    fn path_heat_is_antisymmetric(seed in any::<u64>(), n in 2usize..8) {
        let net = network(seed, n);
        let limits = Limits::default();
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    let fwd = heat_bounds(&net, x, y, &limits).unwrap();
                    let bwd = heat_bounds(&net, y, x, &limits).unwrap();
                    prop_assert_eq!(fwd.min_heat, -bwd.max_heat);
                    prop_assert_eq!(fwd.max_heat, -bwd.min_heat);
                    prop_assert_eq!(fwd.n_paths, bwd.n_paths);
                }
            }
        }
    }

    #[test]
    fn solvers_agree_and_respect_bounds(seed in any::<u64>(), n in 2usize..8, beta in 0.0f64..6.0) {
        let net = network(seed, n);
        let limits = Limits::default();
        let rates = RateMatrix::build(&net, beta).unwrap();
        let a = solve_master(&rates).unwrap();
        let b = stationary_by_trees(&rates, &limits).unwrap();
        let c = stationary_by_matrix_tree(&rates).unwrap();
        prop_assert!(a.total_variation(&b) < 1e-9);
        prop_assert!(b.total_variation(&c) < 1e-9);
        if beta > 0.0 {
            for x in 0..n {
                for y in 0..n {
                    if x != y {
                        let s = (c.log_probs[x] - c.log_probs[y]) / beta;
                        prop_assert!(heat_bounds(&net, x, y, &limits).unwrap().contains(s, 1e-9));
                        let r = tree_ratio(&net, x, y, beta, &limits).unwrap();
                        prop_assert!((r / c.ratio(x, y) - 1.0).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn heat_order_is_consistent(seed in any::<u64>(), n in 2usize..8) {
        let net = network(seed, n);
        let digest = order_digest(&net, &Limits::default()).unwrap();
        prop_assert!(digest.transitivity_violation().is_none());
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    let r = digest.relation(x, y).unwrap();
                    prop_assert_eq!(digest.relation(y, x).unwrap(), r.flip());
                    prop_assert_eq!(r == Relation::Incomparable, !r.comparable());
                }
            }
        }
    }

    #[test]
    fn arborescence_matches_brute_force(seed in any::<u64>(), n in 2usize..8, quantized in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (net, phi) = random_lowt_network(&mut rng, n, 0.5, quantized.then_some(0.5));
        let profile = lowt_profile(&phi);
        for x in 0..n {
            let brute = min_in_tree_brute_force(&net, x, &Limits::default(), |a, b| profile.u(a, b)).unwrap();
            prop_assert_eq!(brute, profile.min_tree_u[x]);
            prop_assert!(profile.psi[x] <= 1e-12);
        }
        for x in 0..n {
            let best = (0..n).filter(|&y| net.edge_between(x, y).is_some()).map(|y| profile.u(x, y)).fold(f64::INFINITY, f64::min);
            prop_assert!(best.abs() < 1e-12);
        }
        if profile.escherian {
            for x in 0..n {
                prop_assert!((profile.psi_tilde[x] - profile.gamma[x]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn trajectories_reverse_exactly(seed in any::<u64>(), n in 2usize..7) {
        let net = network(seed, n);
        let rates = RateMatrix::build(&net, 1.0).unwrap();
        let t = simulate(&rates, 0, 50.0, seed).unwrap();
        prop_assert_eq!(&simulate(&rates, 0, 50.0, seed).unwrap(), &t);
        let fwd = empirical_stats(&t, &net).unwrap();
        let back = empirical_stats(&t.reversed(), &net).unwrap();
        prop_assert_eq!(back.entropy_flux, -fwd.entropy_flux);
        prop_assert!((fwd.occupation.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rig::genbip::{sample_incidence, BipartiteIncidence};
use rig::graph::{build_intersection, components, explore_faithful};
use rig::model::{make_uniform_profile, validate_profile, AttributeProfile, RigConfig};

use common::{component_sizes_oracle, shared_attributes};

fn small_config() -> impl Strategy<Value = RigConfig> {
    (
        1usize..=40,
        prop::collection::vec(0.001f64..0.6, 1..=30),
        any::<u64>(),
    )
        .prop_map(|(n, probs, seed)| {
            RigConfig::new(n, AttributeProfile::new(probs).unwrap(), 1, seed).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn threshold_is_permutation_invariant(
        probs in prop::collection::vec(1e-6f64..0.999, 1..200),
        n in 1usize..100_000,
        seed in any::<u64>(),
    ) {
        let mut shuffled = probs.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = validate_profile(&AttributeProfile::new(probs).unwrap(), n).unwrap().c;
        let b = validate_profile(&AttributeProfile::new(shuffled).unwrap(), n).unwrap().c;
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn uniform_profile_hits_its_target(n in 1usize..1_000_000, m in 1usize..10_000, c in 0.01f64..5.0) {
        if let Ok(profile) = make_uniform_profile(n, m, c) {
            let got = validate_profile(&profile, n).unwrap().c;
            prop_assert!((got - c).abs() <= 1e-12 * c);
        }
    }

    #[test]
    fn incidence_lists_are_transposes(config in small_config()) {
        let inc = sample_incidence(&config).unwrap();
        let mut rebuilt = vec![Vec::new(); inc.m()];
        for v in 0..inc.n() {
            for &w in inc.node_attrs(v) {
                rebuilt[w as usize].push(v as u32);
            }
        }
        prop_assert_eq!(&rebuilt[..], inc.all_attr_nodes());
    }

    #[test]
    fn construction_matches_pairwise_overlap(config in small_config(), s in 1usize..=3) {
        let inc = sample_incidence(&config).unwrap();
        let g = build_intersection(&inc, s).unwrap();
        let mut edges = 0;
        for u in 0..inc.n() {
            for v in u + 1..inc.n() {
                let linked = shared_attributes(&inc, u, v) >= s;
                edges += linked as usize;
                prop_assert_eq!(g.has_edge(u, v), linked);
            }
        }
        prop_assert_eq!(g.edge_count(), edges);
    }

    #[test]
    fn raising_s_only_removes_edges(config in small_config(), s in 1usize..=3) {
        let inc = sample_incidence(&config).unwrap();
        let lower = build_intersection(&inc, s).unwrap();
        let upper = build_intersection(&inc, s + 1).unwrap();
        for (u, v) in upper.edges() {
            prop_assert!(lower.has_edge(u, v));
        }
    }

    #[test]
    fn component_sizes_ignore_node_labels(config in small_config(), perm_seed in any::<u64>()) {
        let inc = sample_incidence(&config).unwrap();
        let mut perm: Vec<usize> = (0..inc.n()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
        let relabeled: BipartiteIncidence = inc.permute_nodes(&perm).unwrap();
        prop_assert!(relabeled.is_consistent());
        let a = components(&build_intersection(&inc, 1).unwrap());
        let b = components(&build_intersection(&relabeled, 1).unwrap());
        prop_assert_eq!(a.sizes, b.sizes);
    }

    #[test]
    fn exploration_stops_at_component_size(config in small_config(), pick in any::<prop::sample::Index>()) {
        let inc = sample_incidence(&config).unwrap();
        let v0 = pick.index(inc.n());
        let trace = explore_faithful(&inc, &config.profile, v0, config.seed).unwrap();
        prop_assert_eq!(trace.stop_time, component_sizes_oracle(&inc)[v0]);
        prop_assert!(trace.check_identities().is_ok());
        prop_assert!(trace.phi_recompute_error(&config.profile) < 1e-9);
    }

    #[test]
    fn incidence_text_round_trips(config in small_config()) {
        let inc = sample_incidence(&config).unwrap();
        let text = inc.to_text(config.seed);
        let (back, seed) = BipartiteIncidence::read_text(text.as_bytes()).unwrap();
        prop_assert_eq!(seed, config.seed);
        prop_assert_eq!(back, inc);
    }
}

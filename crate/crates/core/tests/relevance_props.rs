mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::Rng;
use topoprobe::relevance::{brute_force_extended_relevance, direct_relevance, extended_relevance};
use topoprobe::weightnet::{self, NetworkModel};

const TOL: f64 = 1e-12;

fn extended_of(model: &NetworkModel) -> topoprobe::RelevanceMatrix {
    let g = weightnet::assign_global_indices(model);
    extended_relevance(&direct_relevance(&g), &g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn extended_matches_path_enumeration(seed in any::<u64>()) {
        let g = common::random_graph(seed, 14);
        let direct = direct_relevance(&g);
        let fast = extended_relevance(&direct, &g).unwrap();
        let slow = brute_force_extended_relevance(&direct, &g).unwrap();
        for i in 0..g.n() {
            for j in 0..g.n() {
                assert_abs_diff_eq!(fast.get(i, j), slow.get(i, j), epsilon = TOL);
            }
        }
    }

    #[test]
    fn composition_never_beats_best_path(seed in any::<u64>()) {
        let g = common::random_graph(seed, 14);
        let r = extended_relevance(&direct_relevance(&g), &g).unwrap();
        let n = g.n();
        for i in 0..n {
            for j in 0..i {
                for k in 0..j {
                    prop_assert!(r.get(i, k) + TOL >= r.get(i, j) * r.get(j, k));
                }
            }
        }
    }

    #[test]
    fn relevance_points_toward_output(seed in any::<u64>()) {
        let g = common::random_graph(seed, 14);
        let r = extended_relevance(&direct_relevance(&g), &g).unwrap();
        for (i, j, v) in r.nonzero() {
            prop_assert!(i >= j, "r({i},{j}) = {v}");
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn per_layer_scaling_is_invisible(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_model(&mut rng, 30);
        let mut scaled = model.clone();
        for layer in &mut scaled.layers {
            layer.scale(rng.gen_range(1e-3..1e3));
        }
        let (a, b) = (extended_of(&model), extended_of(&scaled));
        for i in 0..a.n() {
            for j in 0..a.n() {
                assert_abs_diff_eq!(a.get(i, j), b.get(i, j), epsilon = TOL);
            }
        }
    }

    #[test]
    fn negative_weights_are_ignored(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_model(&mut rng, 30);
        let mut changed = model.clone();
        for layer in &mut changed.layers {
            for w in layer.weights_mut() {
                if *w < 0.0 {
                    *w = if rng.gen_bool(0.3) { 0.0 } else { -rng.gen_range(0.0..50.0) };
                }
            }
        }
        prop_assert_eq!(extended_of(&model), extended_of(&changed));
    }
}

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topoprobe::weightnet::{self, LayerMatrix, NetworkGraph, NetworkModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random layered model with at most `max_neurons` neurons. Weights mix
/// negatives, exact zeros and positives.
pub fn random_model(rng: &mut ChaCha8Rng, max_neurons: usize) -> NetworkModel {
    let mut sizes: Vec<usize>;
    loop {
        let n_layers = rng.gen_range(1..=4);
        sizes = (0..=n_layers).map(|_| rng.gen_range(1..=4)).collect();
        if sizes.iter().sum::<usize>() <= max_neurons {
            break;
        }
    }
    let layers = sizes
        .windows(2)
        .map(|w| {
            let weights = (0..w[0] * w[1]).map(|_| random_weight(rng)).collect();
            LayerMatrix::new(w[0], w[1], weights).unwrap()
        })
        .collect();
    let output_size = *sizes.last().unwrap();
    let mut outs: Vec<usize> = (0..output_size).collect();
    outs.shuffle(rng);
    let used = rng.gen_range(1..=output_size);
    NetworkModel::new("random", layers, output_size, outs.into_iter().take(used)).unwrap()
}

pub fn random_weight(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..10) {
        0 => 0.0,
        1..=3 => -rng.gen_range(0.0..2.0),
        _ => rng.gen_range(0.001..2.0),
    }
}

pub fn random_graph(seed: u64, max_neurons: usize) -> NetworkGraph {
    weightnet::assign_global_indices(&random_model(&mut rng(seed), max_neurons))
}

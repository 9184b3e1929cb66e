#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tndp_core::{DesignConfig, DesignProblem, Lambda, Node, OdMatrix, RoadNetwork};

/// Connected random network: a random spanning path plus `extra` chords.
pub fn random_network(n: usize, extra: usize, seed: u64) -> RoadNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<Node> = (1..=n as u32)
        .map(|id| Node::new(id, -4.5 + rng.random::<f64>() * 0.1, 15.2 + rng.random::<f64>() * 0.1, "").unwrap())
        .collect();
    let mut order: Vec<u32> = (1..=n as u32).collect();
    order.shuffle(&mut rng);
    let mut pairs: Vec<(u32, u32)> = order.windows(2).map(|w| (w[0], w[1])).collect();
    let mut tries = 0;
    while pairs.len() < n - 1 + extra && tries < 100 {
        tries += 1;
        let u = rng.random_range(1..=n as u32);
        let v = rng.random_range(1..=n as u32);
        if u != v && !pairs.iter().any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u)) {
            pairs.push((u, v));
        }
    }
    RoadNetwork::from_pairs(nodes, &pairs).unwrap()
}

pub fn random_od(n: usize, seed: u64) -> OdMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut d = vec![0.0; n * n];
    for r in 0..n {
        for s in 0..n {
            if r != s && rng.random::<f64>() < 0.5 {
                d[r * n + s] = rng.random_range(0.5..6.0);
            }
        }
    }
    OdMatrix::new(n, d).unwrap()
}

pub fn toy_problem(n: usize, seed: u64, budget_km: f64, penalize_crossings: bool) -> DesignProblem {
    let config = DesignConfig { budget_km, penalize_crossings, lambda: Lambda::Auto, ..DesignConfig::default() };
    DesignProblem::new(random_network(n, 1, seed), random_od(n, seed), config).unwrap()
}

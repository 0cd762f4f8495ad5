//! Benchmark fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use te_shape::{MarketInstance, ModelKind};

fn draws(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
    let p = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
    let q = (0..n).map(|_| rng.random_range(0.1..20.0)).collect();
    (a, p, q)
}

/// Random quadratic market with `n` agents.
pub fn quadratic_market(n: usize, seed: u64) -> MarketInstance {
    let (a, b, m) = draws(n, seed);
    MarketInstance::quadratic(ModelKind::Mtes, &a, &b, &m)
}

/// Random piecewise-linear market with `n` agents.
pub fn pwl_market(n: usize, seed: u64) -> MarketInstance {
    let (a, beta, phi) = draws(n, seed);
    MarketInstance::pwl(ModelKind::Mtes, &a, &beta, &phi)
}

pub fn samples(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random::<f64>()).collect()
}

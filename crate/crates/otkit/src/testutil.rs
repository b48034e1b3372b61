//! Seeded instance generators shared by the test suites.
//!
//! Everything here is deterministic given the seed. Weights are small dyadic
//! rationals and atoms sit on a half-integer grid, so LP data is exact in
//! floating point and vertex values are well separated.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::measure::DiscreteMeasure;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
    rng.gen_range(0..n)
}

/// Random probability measure with at most `max_atoms` atoms on the grid
/// `{-4, -3.5, ..., 4}` and dyadic weights `k/16`.
pub fn random_probability(rng: &mut ChaCha8Rng, max_atoms: usize) -> DiscreteMeasure {
    let k = rng.gen_range(1..=max_atoms);
    let mut atoms = Vec::with_capacity(k);
    while atoms.len() < k {
        let a = -4.0 + 0.5 * rng.gen_range(0..=16) as f64;
        if !atoms.contains(&a) {
            atoms.push(a);
        }
    }
    atoms.sort_by(f64::total_cmp);
    let weights = dyadic_weights(rng, k);
    DiscreteMeasure::new(atoms, weights).unwrap()
}

/// `k` positive weights summing to one, each a multiple of 1/16.
pub fn dyadic_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    assert!(k <= 16);
    let mut parts = vec![1u32; k];
    for _ in 0..(16 - k as u32) {
        parts[rng.gen_range(0..k)] += 1;
    }
    parts.into_iter().map(|p| p as f64 / 16.0).collect()
}

/// A pair `mu <= nu` in convex order: `nu` random, `mu` a binning of it.
pub fn random_convex_order_pair(
    rng: &mut ChaCha8Rng,
    max_mu: usize,
    max_nu: usize,
) -> (DiscreteMeasure, DiscreteMeasure) {
    loop {
        let nu = random_probability(rng, max_nu);
        let mesh = [1.0, 2.0, 4.0][pick(rng, 3)];
        let mu = crate::measure::bin(&nu, mesh).unwrap();
        if mu.support_size() <= max_mu {
            debug_assert!(crate::measure::convex_order(&mu, &nu).unwrap());
            return (mu, nu);
        }
    }
}


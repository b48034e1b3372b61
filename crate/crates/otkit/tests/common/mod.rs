//! Seeded instance generators for the integration suites. Weights are small
//! dyadic rationals and atoms sit on a half-integer grid so that LP data is
//! exact in floating point and vertex values stay well separated.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use otkit::{bin, convex_order, dilate, DiscreteMeasure};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
    rng.gen_range(0..n)
}

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

pub fn dyadic_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    assert!(k <= 16);
    let mut parts = vec![1u32; k];
    for _ in 0..(16 - k as u32) {
        parts[rng.gen_range(0..k)] += 1;
    }
    parts.into_iter().map(|p| p as f64 / 16.0).collect()
}

/// `mu <= nu` in convex order, with `mu` a binning of `nu`.
pub fn random_convex_order_pair(
    rng: &mut ChaCha8Rng,
    max_mu: usize,
    max_nu: usize,
) -> (DiscreteMeasure, DiscreteMeasure) {
    loop {
        let nu = random_probability(rng, max_nu);
        let mesh = [1.0, 2.0, 4.0][pick(rng, 3)];
        let mu = bin(&nu, mesh).unwrap();
        if mu.support_size() <= max_mu {
            return (mu, nu);
        }
    }
}

/// `mu <= nu` in convex order with `mu` uniform on its atoms; `nu` arises
/// from mean-preserving two-point splits of `mu`.
pub fn random_uniform_mu_pair(
    rng: &mut ChaCha8Rng,
    max_mu: usize,
    max_nu: usize,
) -> (DiscreteMeasure, DiscreteMeasure) {
    loop {
        let k = rng.gen_range(1..=max_mu);
        let mut atoms = Vec::with_capacity(k);
        while atoms.len() < k {
            let a = -3.0 + 0.5 * rng.gen_range(0..=12) as f64;
            if !atoms.contains(&a) {
                atoms.push(a);
            }
        }
        let mu = DiscreteMeasure::uniform(atoms).unwrap();

        let mut pairs = Vec::new();
        for (&a, &w) in mu.atoms().iter().zip(mu.weights()) {
            if rng.gen_bool(0.7) {
                let left = 0.5 * rng.gen_range(1..=3) as f64;
                let right = 0.5 * rng.gen_range(1..=3) as f64;
                let wl = w * right / (left + right);
                let wr = w * left / (left + right);
                pairs.push((a - left, wl));
                pairs.push((a + right, wr));
            } else {
                pairs.push((a, w));
            }
        }
        let nu = DiscreteMeasure::from_pairs(pairs).unwrap();
        if nu.support_size() <= max_nu && convex_order(&mu, &nu).unwrap() {
            return (mu, nu);
        }
    }
}

fn sub_mass(m: &DiscreteMeasure, atom: f64, amount: f64) -> DiscreteMeasure {
    let mut pairs: Vec<(f64, f64)> = m
        .atoms()
        .iter()
        .copied()
        .zip(m.weights().iter().copied())
        .collect();
    let idx = pairs
        .iter()
        .position(|&(a, _)| a == atom)
        .expect("atom present");
    pairs[idx].1 = (pairs[idx].1 - amount).max(0.0);
    DiscreteMeasure::from_pairs(pairs).unwrap()
}

fn add_mass(m: &DiscreteMeasure, atom: f64, amount: f64) -> DiscreteMeasure {
    m.add(&DiscreteMeasure::new(vec![atom], vec![amount]).unwrap())
}

/// A pair of families `(p, q)` with equal pooled measure and equal per-index
/// barycenters: `q` arises from `p` by seeded mean-preserving three-point
/// exchanges between indices.
pub fn martingale_competitor_pair(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_atoms: usize,
) -> (Vec<DiscreteMeasure>, Vec<DiscreteMeasure>) {
    let p: Vec<DiscreteMeasure> = (0..n)
        .map(|_| random_probability(rng, max_atoms))
        .collect();
    let mut q = p.clone();
    let mut applied = 0;
    for _ in 0..40 {
        if applied >= 6 {
            break;
        }
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        if i == j {
            j = (j + 1) % n;
        }
        // move mass at `a` from q_i to q_j, compensated by a mean-preserving
        // two-point pull from q_j at b < a < c
        let qi = q[i].clone();
        let qj = q[j].clone();
        let Some(&a) = qi.atoms().get(rng.gen_range(0..qi.support_size())) else {
            continue;
        };
        let below: Vec<f64> = qj.atoms().iter().copied().filter(|&b| b < a).collect();
        let above: Vec<f64> = qj.atoms().iter().copied().filter(|&c| c > a).collect();
        if below.is_empty() || above.is_empty() {
            continue;
        }
        let b = below[rng.gen_range(0..below.len())];
        let c = above[rng.gen_range(0..above.len())];
        let w_b = (c - a) / (c - b);
        let w_c = (a - b) / (c - b);
        let cap = qi
            .mass_at(a, 0.0)
            .min(qj.mass_at(b, 0.0) / w_b)
            .min(qj.mass_at(c, 0.0) / w_c);
        let alpha = 0.5 * cap;
        if alpha < 1e-3 {
            continue;
        }
        q[i] = add_mass(&add_mass(&sub_mass(&qi, a, alpha), b, alpha * w_b), c, alpha * w_c);
        q[j] = sub_mass(&sub_mass(&add_mass(&qj, a, alpha), b, alpha * w_b), c, alpha * w_c);
        applied += 1;
    }
    (p, q)
}

/// Per-index perturbation kinds, fixed per family across a schedule.
#[derive(Debug, Clone, Copy)]
pub enum PerturbKind {
    TranslateUp,
    TranslateDown,
    Dilate,
}

pub fn apply_perturbation(m: &DiscreteMeasure, kind: PerturbKind, eps: f64) -> DiscreteMeasure {
    match kind {
        PerturbKind::TranslateUp => m.translated(eps),
        PerturbKind::TranslateDown => m.translated(-eps),
        PerturbKind::Dilate => dilate(m, eps).unwrap(),
    }
}

pub fn perturbation_kinds(rng: &mut ChaCha8Rng, n: usize) -> Vec<PerturbKind> {
    (0..n)
        .map(|i| match i {
            0 => PerturbKind::TranslateUp,
            1 => PerturbKind::TranslateDown,
            _ => [
                PerturbKind::TranslateUp,
                PerturbKind::TranslateDown,
                PerturbKind::Dilate,
            ][pick(rng, 3)],
        })
        .collect()
}

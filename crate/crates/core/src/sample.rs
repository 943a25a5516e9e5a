//! Random instances for property checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::lattice::{SetSystem, SubsetMask};

/// Each subset independently with probability `density`.
pub fn random_system_with_density<R: Rng + ?Sized>(n: usize, density: f64, rng: &mut R) -> SetSystem {
    let flags = (0..1usize << n).map(|_| rng.gen_bool(density)).collect();
    SetSystem::from_flags(n, flags).expect("valid ground size")
}

/// Mixed distribution: a random density, and in half the draws a few planted
/// maximal chains so that `c(A) > 0` is common.
pub fn random_system<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SetSystem {
    let density = rng.gen_range(0.0..=1.0);
    let mut system = random_system_with_density(n, density, rng);
    if rng.gen_bool(0.5) {
        let chains = rng.gen_range(1..=3);
        for _ in 0..chains {
            plant_chain(&mut system, rng);
        }
    }
    system
}

/// Adds the prefix chain of a uniformly random permutation.
pub fn plant_chain<R: Rng + ?Sized>(system: &mut SetSystem, rng: &mut R) {
    let mut word: Vec<usize> = (1..=system.n()).collect();
    word.shuffle(rng);
    let mut acc = SubsetMask::EMPTY;
    system.insert(acc);
    for a in word {
        acc = acc.with(a);
        system.insert(acc);
    }
}

/// A uniformly random subset of `{1,…,n}`.
pub fn random_mask<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SubsetMask {
    SubsetMask(rng.gen_range(0..1u32 << n))
}

/// Two distinct elements of `{1,…,n}`, `n ≥ 2`.
pub fn random_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.gen_range(1..=n);
    let mut j = rng.gen_range(1..n);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// The up-closure of a few random sets in `P([k])`.
pub fn random_upset<R: Rng + ?Sized>(k: usize, rng: &mut R) -> SetSystem {
    let generators: Vec<SubsetMask> = (0..rng.gen_range(1..=3)).map(|_| random_mask(k, rng)).collect();
    let flags = (0..1u32 << k)
        .map(|s| generators.iter().any(|g| g.is_subset_of(SubsetMask(s))))
        .collect();
    SetSystem::from_flags(k, flags).expect("valid ground size")
}

//! Counting maximal chains contained in a set system.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{factorial, ratio_from_count};
use crate::lattice::{layer_profile, next_permutation, SetSystem, SubsetMask};

/// Largest ground size the permutation-enumeration oracle accepts.
pub const ORACLE_MAX_N: usize = 9;

/// Masks of popcount `r` below `2^n`, ascending (Gosper's hack).
pub(crate) fn masks_of_rank(n: usize, r: usize) -> impl Iterator<Item = u32> {
    let limit = 1u64 << n;
    let mut next = if r > n { limit } else { (1u64 << r) - 1 };
    std::iter::from_fn(move || {
        if next >= limit {
            return None;
        }
        let cur = next;
        if cur == 0 {
            next = limit;
        } else {
            let c = cur & cur.wrapping_neg();
            let ripple = cur + c;
            next = (((ripple ^ cur) >> 2) / c) | ripple;
        }
        Some(cur as u32)
    })
}

/// `c(A)`: the number of permutations whose prefix chain lies inside `A`.
///
/// Dynamic programme over subsets in rank order, ascending mask within a
/// rank: `paths(∅) = [∅ ∈ A]`, `paths(S) = Σ_{x∈S} paths(S∖{x})` for
/// `S ∈ A`, zero otherwise. Runs in 64-bit arithmetic and switches to
/// arbitrary precision as soon as an addition would overflow.
pub fn count_maximal_chains(system: &SetSystem) -> BigUint {
    match count_u64(system) {
        Some(c) => BigUint::from(c),
        None => count_big(system),
    }
}

fn count_u64(system: &SetSystem) -> Option<u64> {
    let n = system.n();
    let flags = system.flags();
    let mut paths = vec![0u64; 1 << n];
    if !flags[0] {
        return Some(0);
    }
    paths[0] = 1;
    for r in 1..=n {
        for s in masks_of_rank(n, r) {
            if !flags[s as usize] {
                continue;
            }
            let mut total = 0u64;
            let mut rest = s;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                rest ^= bit;
                total = total.checked_add(paths[(s ^ bit) as usize])?;
            }
            paths[s as usize] = total;
        }
    }
    Some(paths[(1usize << n) - 1])
}

fn count_big(system: &SetSystem) -> BigUint {
    let n = system.n();
    let flags = system.flags();
    let mut paths = vec![BigUint::zero(); 1 << n];
    if !flags[0] {
        return BigUint::zero();
    }
    paths[0] = BigUint::from(1u32);
    for r in 1..=n {
        for s in masks_of_rank(n, r) {
            if !flags[s as usize] {
                continue;
            }
            let mut total = BigUint::zero();
            let mut rest = s;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                rest ^= bit;
                total += &paths[(s ^ bit) as usize];
            }
            paths[s as usize] = total;
        }
    }
    std::mem::take(&mut paths[(1usize << n) - 1])
}

/// Counts chains by walking all `n!` permutations and testing every prefix.
/// Independent of [`count_maximal_chains`]; used to check it.
pub fn count_maximal_chains_oracle(system: &SetSystem) -> Result<BigUint> {
    let n = system.n();
    if n > ORACLE_MAX_N {
        return Err(Error::TooLarge(format!(
            "permutation enumeration needs n ≤ {ORACLE_MAX_N}, got {n}"
        )));
    }
    let mut word: Vec<usize> = (1..=n).collect();
    let mut count = 0u64;
    loop {
        let mut prefix = SubsetMask::EMPTY;
        let mut inside = system.contains(prefix);
        for &a in &word {
            if !inside {
                break;
            }
            prefix = prefix.with(a);
            inside = system.contains(prefix);
        }
        if inside {
            count += 1;
        }
        if !next_permutation(&mut word) {
            break;
        }
    }
    Ok(BigUint::from(count))
}

/// `min_r |A ∩ X^(r)| · r! · (n−r)!`, an upper bound on `c(A)`.
pub fn layer_bound(system: &SetSystem) -> BigUint {
    let n = system.n();
    layer_profile(system)
        .iter()
        .enumerate()
        .map(|(r, &size)| BigUint::from(size) * factorial(r) * factorial(n - r))
        .min()
        .expect("profile has n + 1 entries")
}

/// Outcome of checking `c(A) ≤ α·n!` with `α = |A| / 2^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lemma2Check {
    #[serde(serialize_with = "crate::serde_exact::ratio")]
    pub alpha: BigRational,
    #[serde(serialize_with = "crate::serde_exact::count")]
    pub chains: BigUint,
    /// `α · n!`.
    #[serde(serialize_with = "crate::serde_exact::ratio")]
    pub bound: BigRational,
    /// `α · n! − c(A)`.
    #[serde(serialize_with = "crate::serde_exact::ratio")]
    pub slack: BigRational,
    pub holds: bool,
}

pub fn check_lemma2(system: &SetSystem) -> Lemma2Check {
    let n = system.n();
    let alpha = BigRational::new(BigInt::from(system.len()), BigInt::from(1u64) << n);
    let chains = count_maximal_chains(system);
    let bound = &alpha * ratio_from_count(&factorial(n));
    let slack = &bound - ratio_from_count(&chains);
    let holds = !slack.is_negative();
    Lemma2Check { alpha, chains, bound, slack, holds }
}

/// `c(A)` as `u64` for ground sizes where it always fits (n ≤ 20).
pub fn count_maximal_chains_u64(system: &SetSystem) -> u64 {
    count_maximal_chains(system).to_u64().expect("c(A) ≤ n! fits for n ≤ 20")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn t2() -> SetSystem {
        SetSystem::from_sets(4, &[&[], &[1], &[2], &[1, 2], &[1, 2, 3], &[1, 2, 4], &[1, 2, 3, 4]])
            .unwrap()
    }

    #[test]
    fn gosper_enumerates_each_rank() {
        for n in 0..=6usize {
            for r in 0..=n + 1 {
                let got: Vec<u32> = masks_of_rank(n, r).collect();
                let want: Vec<u32> =
                    (0..1u32 << n).filter(|m| m.count_ones() as usize == r).collect();
                assert_eq!(got, want, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn dp_examples() {
        assert_eq!(count_maximal_chains(&SetSystem::full(3).unwrap()), BigUint::from(6u32));
        assert_eq!(count_maximal_chains(&t2()), BigUint::from(4u32));
        let mut no_bottom = SetSystem::full(3).unwrap();
        no_bottom.remove(SubsetMask::EMPTY);
        assert_eq!(count_maximal_chains(&no_bottom), BigUint::zero());
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(count_maximal_chains_oracle(&SetSystem::full(4).unwrap()).unwrap(), BigUint::from(24u32));
        assert_eq!(count_maximal_chains_oracle(&t2()).unwrap(), BigUint::from(4u32));
        let single = SetSystem::from_sets(2, &[&[], &[1], &[1, 2]]).unwrap();
        assert_eq!(count_maximal_chains_oracle(&single).unwrap(), BigUint::from(1u32));
        assert!(count_maximal_chains_oracle(&SetSystem::empty(10).unwrap()).is_err());
    }

    #[test]
    fn big_fallback_matches() {
        let full = SetSystem::full(21).unwrap();
        assert_eq!(count_maximal_chains(&full), factorial(21));
        assert_eq!(count_big(&SetSystem::full(6).unwrap()), BigUint::from(720u32));
    }

    #[test]
    fn layer_bounds() {
        assert_eq!(layer_bound(&SetSystem::full(3).unwrap()), BigUint::from(6u32));
        assert_eq!(layer_bound(&t2()), BigUint::from(4u32));
        let gap = SetSystem::from_sets(3, &[&[], &[1, 2, 3]]).unwrap();
        assert_eq!(layer_bound(&gap), BigUint::zero());
    }

    #[test]
    fn lemma2_examples() {
        let full = check_lemma2(&SetSystem::full(3).unwrap());
        assert!(full.holds);
        assert_eq!(full.alpha, ratio(1, 1));
        assert_eq!(full.slack, ratio(0, 1));

        let t = check_lemma2(&t2());
        assert!(t.holds);
        assert_eq!(t.alpha, ratio(7, 16));
        assert_eq!(t.bound, ratio(21, 2));

        let with_one = SetSystem::from_sets(3, &[&[1], &[1, 2], &[1, 3], &[1, 2, 3]]).unwrap();
        let h = check_lemma2(&with_one);
        assert_eq!(h.alpha, ratio(1, 2));
        assert_eq!(h.chains, BigUint::zero());
        assert_eq!(h.bound, ratio(3, 1));
        assert!(h.holds);
    }
}

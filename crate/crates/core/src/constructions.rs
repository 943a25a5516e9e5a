//! Towers of cubes and their generalisations.
//!
//! A tower over blocks `X_1, …, X_k` partitioning the ground set is the
//! family of all `A` with `X_1 ∪ … ∪ X_s ⊆ A ⊆ X_1 ∪ … ∪ X_{s+1}` for some
//! `0 ≤ s < k`: a stack of subcubes meeting corner to corner. Its size is
//! `Σ (2^{|X_i|} − 1) + 1` and it contains `Π |X_i|!` maximal chains.
//!
//! With `k = n/t` equal blocks the chain count is `(t!)^{n/t}`. Note that
//! the exponent is the number of blocks; a formula written as `(t!)^{n/k}`
//! with `k` the block count would read `(t!)^t`, which disagrees with the
//! chain count for every `t ≠ n/t`.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::factorial;
use crate::lattice::{SetSystem, SubsetMask, MAX_N};

/// Ordered blocks `X_1, …, X_k` partitioning `{1,…,n}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerSpec {
    n: usize,
    blocks: Vec<SubsetMask>,
}

impl TowerSpec {
    /// Blocks laid out as consecutive intervals: sizes `[2, 3]` give `{1,2}`, `{3,4,5}`.
    pub fn consecutive(sizes: &[usize]) -> Result<TowerSpec> {
        validate_sizes(sizes)?;
        let n: usize = sizes.iter().sum();
        let mut start = 1;
        let blocks = sizes
            .iter()
            .map(|&t| {
                let block = SubsetMask::from_elements(&(start..start + t).collect::<Vec<_>>());
                start += t;
                block
            })
            .collect();
        Ok(TowerSpec { n, blocks })
    }

    /// Arbitrary ordered partition of `{1,…,n}` into nonempty blocks.
    pub fn from_blocks(n: usize, blocks: Vec<SubsetMask>) -> Result<TowerSpec> {
        if n == 0 || n > MAX_N {
            return Err(Error::GroundSize { n, max: MAX_N });
        }
        let mut seen = SubsetMask::EMPTY;
        for &b in &blocks {
            if b == SubsetMask::EMPTY {
                return Err(Error::InvalidTower("empty block".into()));
            }
            if !b.is_valid_for(n) {
                return Err(Error::MaskOutOfRange { mask: b.bits() as u64, n });
            }
            if b.bits() & seen.bits() != 0 {
                return Err(Error::InvalidTower(format!("block {b} overlaps an earlier block")));
            }
            seen = SubsetMask(seen.bits() | b.bits());
        }
        if seen != SubsetMask::full(n) {
            return Err(Error::InvalidTower("blocks do not cover the ground set".into()));
        }
        Ok(TowerSpec { n, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[SubsetMask] {
        &self.blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.rank()).collect()
    }

    pub fn build(&self) -> SetSystem {
        let mut system = SetSystem::empty(self.n).expect("n validated on construction");
        let mut base = 0u32;
        for block in &self.blocks {
            // Every submask of the block, including ∅ and the block itself.
            let full = block.bits();
            let mut sub = full;
            loop {
                system.insert(SubsetMask(base | sub));
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & full;
            }
            base |= full;
        }
        system
    }
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::InvalidTower("no blocks".into()));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidTower("block sizes must be positive".into()));
    }
    let n: usize = sizes.iter().sum();
    if n > MAX_N {
        return Err(Error::GroundSize { n, max: MAX_N });
    }
    Ok(())
}

/// The tower of `t`-cubes `T_t` on `{1,…,n}`.
pub fn tower_of_cubes(n: usize, t: usize) -> Result<SetSystem> {
    if t == 0 || t > n {
        return Err(Error::InvalidTower(format!("block size {t} outside 1..={n}")));
    }
    if !n.is_multiple_of(t) {
        return Err(Error::InvalidTower(format!("{t} does not divide {n}")));
    }
    generalized_tower(&vec![t; n / t])
}

/// Tower with consecutive blocks of the given sizes.
pub fn generalized_tower(block_sizes: &[usize]) -> Result<SetSystem> {
    Ok(TowerSpec::consecutive(block_sizes)?.build())
}

/// `Π |X_i|!`.
pub fn tower_chain_count(block_sizes: &[usize]) -> BigUint {
    block_sizes.iter().fold(BigUint::one(), |acc, &t| acc * factorial(t))
}

/// `Σ (2^{|X_i|} − 1) + 1`.
pub fn tower_size(block_sizes: &[usize]) -> BigUint {
    block_sizes
        .iter()
        .fold(BigUint::one(), |acc, &t| acc + (BigUint::one() << t) - 1u32)
}

/// `|T_t| = (n/t)·2^t − n/t + 1`.
pub fn tower_of_cubes_size(n: usize, t: usize) -> BigUint {
    let k = n / t;
    (BigUint::from(k) << t) - k + 1u32
}

/// The block multiset `{t × a, (t+1) × b}` on `n = a·t + b·(t+1)` elements.
pub fn two_size_blocks(t: usize, a: usize, b: usize) -> Vec<usize> {
    let mut sizes = vec![t; a];
    sizes.extend(std::iter::repeat_n(t + 1, b));
    sizes
}

/// For block sizes that all lie in `{t, t+1}`, returns that `t`.
pub fn two_size_parameter(block_sizes: &[usize]) -> Option<usize> {
    let lo = *block_sizes.iter().min()?;
    let hi = *block_sizes.iter().max()?;
    (lo > 0 && hi - lo <= 1).then_some(lo)
}

/// Integer partitions of `n` with parts drawn from `allowed` (all parts
/// when `None`), each listed in non-decreasing order.
pub fn block_partitions(n: usize, allowed: Option<&[usize]>) -> Vec<Vec<usize>> {
    fn rec(rest: usize, min: usize, allowed: Option<&[usize]>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in min..=rest {
            if allowed.is_some_and(|a| !a.contains(&part)) {
                continue;
            }
            cur.push(part);
            rec(rest - part, part, allowed, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, 1, allowed, &mut Vec::new(), &mut out);
    }
    out
}

/// A tower chosen from [`block_partitions`] together with its two formulas.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerChoice {
    pub block_sizes: Vec<usize>,
    #[serde(serialize_with = "crate::serde_exact::count")]
    pub size: BigUint,
    #[serde(serialize_with = "crate::serde_exact::count")]
    pub chains: BigUint,
}

/// The tower on `n` elements with the most chains among those of size at most
/// `max_size` (or exactly `max_size` when `exact`). Ties go to the first
/// partition in enumeration order.
pub fn best_tower(n: usize, max_size: usize, exact: bool, allowed: Option<&[usize]>) -> Option<TowerChoice> {
    let budget = BigUint::from(max_size);
    block_partitions(n, allowed)
        .into_iter()
        .map(|sizes| TowerChoice { size: tower_size(&sizes), chains: tower_chain_count(&sizes), block_sizes: sizes })
        .filter(|c| if exact { c.size == budget } else { c.size <= budget })
        .fold(None, |best: Option<TowerChoice>, c| match best {
            Some(b) if b.chains >= c.chains => Some(b),
            _ => Some(c),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count::count_maximal_chains;
    use crate::lattice::layer_profile;

    #[test]
    fn tower_t2_on_four() {
        let t = tower_of_cubes(4, 2).unwrap();
        let want = SetSystem::from_sets(4, &[&[], &[1], &[2], &[1, 2], &[1, 2, 3], &[1, 2, 4], &[1, 2, 3, 4]])
            .unwrap();
        assert_eq!(t, want);
        assert_eq!(tower_of_cubes_size(4, 2), BigUint::from(7u32));
        assert_eq!(layer_profile(&t), vec![1, 2, 1, 2, 1]);
    }

    #[test]
    fn single_block_is_whole_cube() {
        assert_eq!(tower_of_cubes(3, 3).unwrap(), SetSystem::full(3).unwrap());
    }

    #[test]
    fn tower_t3_on_six() {
        let t = tower_of_cubes(6, 3).unwrap();
        assert_eq!(t.len(), 15);
        assert_eq!(tower_of_cubes_size(6, 3), BigUint::from(15u32));
        assert_eq!(count_maximal_chains(&t), BigUint::from(36u32));
    }

    #[test]
    fn tower_errors() {
        assert!(tower_of_cubes(5, 2).is_err());
        assert!(tower_of_cubes(3, 0).is_err());
        assert!(tower_of_cubes(3, 4).is_err());
        assert!(generalized_tower(&[]).is_err());
        assert!(generalized_tower(&[2, 0]).is_err());
        assert!(generalized_tower(&[20, 5]).is_err());
    }

    #[test]
    fn generalised_examples() {
        let t = generalized_tower(&[1, 2]).unwrap();
        assert_eq!(t, SetSystem::from_sets(3, &[&[], &[1], &[1, 2], &[1, 3], &[1, 2, 3]]).unwrap());
        assert_eq!(count_maximal_chains(&t), BigUint::from(2u32));
        assert_eq!(generalized_tower(&[2, 2]).unwrap(), tower_of_cubes(4, 2).unwrap());
        let t23 = generalized_tower(&[2, 3]).unwrap();
        assert_eq!(t23.len(), 11);
        assert_eq!(count_maximal_chains(&t23), BigUint::from(12u32));
    }

    #[test]
    fn chain_count_formula() {
        assert_eq!(tower_chain_count(&[2, 2]), BigUint::from(4u32));
        assert_eq!(tower_chain_count(&[3, 3]), BigUint::from(36u32));
        assert_eq!(tower_chain_count(&[1, 1, 1]), BigUint::from(1u32));
    }

    #[test]
    fn formulas_match_dp_up_to_twelve() {
        for n in 1..=12 {
            for sizes in block_partitions(n, None) {
                // Order matters for the layout, not for the counts; check one rotation too.
                let mut rotated = sizes.clone();
                rotated.rotate_left(1);
                for layout in [&sizes, &rotated] {
                    let t = generalized_tower(layout).unwrap();
                    assert_eq!(BigUint::from(t.len()), tower_size(layout), "{layout:?}");
                    assert_eq!(count_maximal_chains(&t), tower_chain_count(layout), "{layout:?}");
                }
            }
        }
    }

    #[test]
    fn consecutive_cubes_share_one_corner() {
        let spec = TowerSpec::consecutive(&[2, 3, 1]).unwrap();
        let mut base = 0u32;
        let mut cubes = Vec::new();
        for b in spec.blocks() {
            let cube = SetSystem::from_masks(
                spec.n(),
                (0..1u32 << spec.n()).filter(|m| m & !(base | b.bits()) == 0 && m & base == base).map(SubsetMask),
            )
            .unwrap();
            base |= b.bits();
            cubes.push(cube);
        }
        for pair in cubes.windows(2) {
            let shared = pair[0].iter().filter(|&s| pair[1].contains(s)).count();
            assert_eq!(shared, 1);
        }
        for (i, a) in cubes.iter().enumerate() {
            for b in cubes.iter().skip(i + 2) {
                assert_eq!(a.iter().filter(|&s| b.contains(s)).count(), 0);
            }
        }
    }

    #[test]
    fn from_blocks_validation() {
        let ok = TowerSpec::from_blocks(4, vec![SubsetMask::from_elements(&[2, 4]), SubsetMask::from_elements(&[1, 3])])
            .unwrap();
        assert_eq!(ok.block_sizes(), vec![2, 2]);
        assert_eq!(count_maximal_chains(&ok.build()), BigUint::from(4u32));
        assert!(TowerSpec::from_blocks(3, vec![SubsetMask::from_elements(&[1, 2])]).is_err());
        assert!(TowerSpec::from_blocks(
            3,
            vec![SubsetMask::from_elements(&[1, 2]), SubsetMask::from_elements(&[2, 3])]
        )
        .is_err());
        assert!(TowerSpec::from_blocks(2, vec![SubsetMask::EMPTY, SubsetMask::full(2)]).is_err());
    }

    #[test]
    fn two_size_parametrisation() {
        let sizes = two_size_blocks(2, 1, 1);
        assert_eq!(sizes, vec![2, 3]);
        assert_eq!(two_size_parameter(&sizes), Some(2));
        assert_eq!(two_size_parameter(&[1, 3]), None);
        // a(2^t − 1) + b(2^{t+1} − 1) + 1 with blocks {t × a, (t+1) × b}
        let (t, a, b) = (2usize, 3usize, 2usize);
        let expected = a * ((1 << t) - 1) + b * ((1 << (t + 1)) - 1) + 1;
        assert_eq!(tower_size(&two_size_blocks(t, a, b)), BigUint::from(expected));
    }

    #[test]
    fn best_tower_picks() {
        let best = best_tower(4, 7, false, None).unwrap();
        assert_eq!(best.block_sizes, vec![2, 2]);
        assert_eq!(best.chains, BigUint::from(4u32));
        assert!(best_tower(4, 4, false, None).is_none());
        assert_eq!(best_tower(4, 5, true, None).unwrap().block_sizes, vec![1, 1, 1, 1]);
        assert_eq!(block_partitions(5, None).len(), 7);
        assert_eq!(block_partitions(7, Some(&[2, 3])).len(), 1);
        assert_eq!(block_partitions(8, Some(&[2, 3])).len(), 2);
    }
}

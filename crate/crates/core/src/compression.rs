//! `ij`-compressions and left-compression.

use crate::error::{Error, Result};
use crate::lattice::{SetSystem, SubsetMask};

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    for e in [i, j] {
        if e == 0 || e > n {
            return Err(Error::ElementOutOfRange { element: e, n });
        }
    }
    if i == j {
        return Err(Error::EqualElements(i));
    }
    Ok(())
}

#[inline]
fn shift(s: SubsetMask, i: usize, j: usize) -> SubsetMask {
    if s.contains(j) && !s.contains(i) {
        s.without(j).with(i)
    } else {
        s
    }
}

/// `C_ij(S)`: replaces `j` by `i` when `j ∈ S` and `i ∉ S`.
pub fn compress_set(s: SubsetMask, i: usize, j: usize, n: usize) -> Result<SubsetMask> {
    check_pair(n, i, j)?;
    if !s.is_valid_for(n) {
        return Err(Error::MaskOutOfRange { mask: s.bits() as u64, n });
    }
    Ok(shift(s, i, j))
}

/// `C_ij(A)`: each member moves to `C_ij(S)` unless that set is already in `A`.
pub fn compress_system(system: &SetSystem, i: usize, j: usize) -> Result<SetSystem> {
    check_pair(system.n(), i, j)?;
    Ok(compress_unchecked(system, i, j))
}

fn compress_unchecked(system: &SetSystem, i: usize, j: usize) -> SetSystem {
    let mut out = SetSystem::empty(system.n()).expect("same ground size");
    for s in system.iter() {
        let c = shift(s, i, j);
        out.insert(if system.contains(c) { s } else { c });
    }
    out
}

/// `Φ(A) = Σ_{S∈A} Σ_{a∈S} a`. Every changing `C_ij` with `i < j` lowers it.
pub fn potential(system: &SetSystem) -> u64 {
    system.iter().map(|s| s.elements().map(|a| a as u64).sum::<u64>()).sum()
}

/// Sweeps all pairs `i < j` in lexicographic order, applying `C_ij`, until a
/// whole sweep leaves the system unchanged.
pub fn left_compress(system: &SetSystem) -> SetSystem {
    left_compress_traced(system).0
}

/// Like [`left_compress`], also returning `Φ` after each sweep that changed
/// something (the first entry is `Φ` of the input).
pub fn left_compress_traced(system: &SetSystem) -> (SetSystem, Vec<u64>) {
    let n = system.n();
    let mut current = system.clone();
    let mut trace = vec![potential(&current)];
    loop {
        let mut changed = false;
        for i in 1..=n {
            for j in i + 1..=n {
                let next = compress_unchecked(&current, i, j);
                if next != current {
                    changed = true;
                    current = next;
                }
            }
        }
        if !changed {
            return (current, trace);
        }
        trace.push(potential(&current));
    }
}

/// Whether `C_ij(A) = A` for every `i < j`.
pub fn is_left_compressed(system: &SetSystem) -> bool {
    let n = system.n();
    system.iter().all(|s| {
        (1..=n).all(|j| {
            !s.contains(j) || (1..j).all(|i| s.contains(i) || system.contains(s.without(j).with(i)))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{block_partitions, generalized_tower, tower_of_cubes};

    fn set(e: &[usize]) -> SubsetMask {
        SubsetMask::from_elements(e)
    }

    #[test]
    fn set_compression() {
        assert_eq!(compress_set(set(&[2]), 1, 2, 2).unwrap(), set(&[1]));
        assert_eq!(compress_set(set(&[1, 2]), 1, 2, 2).unwrap(), set(&[1, 2]));
        assert_eq!(compress_set(set(&[]), 1, 2, 2).unwrap(), set(&[]));
        assert!(compress_set(set(&[1]), 1, 1, 2).is_err());
        assert!(compress_set(set(&[1]), 0, 1, 2).is_err());
        assert!(compress_set(set(&[1]), 1, 3, 2).is_err());
        assert!(compress_set(set(&[3]), 1, 2, 2).is_err());
    }

    #[test]
    fn system_compression() {
        let a = SetSystem::from_sets(2, &[&[], &[2], &[1, 2]]).unwrap();
        let want = SetSystem::from_sets(2, &[&[], &[1], &[1, 2]]).unwrap();
        assert_eq!(compress_system(&a, 1, 2).unwrap(), want);

        let full = SetSystem::full(3).unwrap();
        assert_eq!(compress_system(&full, 1, 3).unwrap(), full);

        let both = SetSystem::from_sets(2, &[&[1], &[2]]).unwrap();
        assert_eq!(compress_system(&both, 1, 2).unwrap(), both);
        assert!(compress_system(&both, 2, 2).is_err());
    }

    #[test]
    fn left_compression_examples() {
        let a = SetSystem::from_sets(3, &[&[], &[3], &[1, 2, 3]]).unwrap();
        let (out, trace) = left_compress_traced(&a);
        assert_eq!(out, SetSystem::from_sets(3, &[&[], &[1], &[1, 2, 3]]).unwrap());
        assert_eq!(trace, vec![9, 7]);

        let full = SetSystem::full(3).unwrap();
        assert_eq!(left_compress(&full), full);

        for n in 1..=7 {
            for sizes in block_partitions(n, None) {
                let t = generalized_tower(&sizes).unwrap();
                assert!(is_left_compressed(&t), "{sizes:?}");
                assert_eq!(left_compress(&t), t);
            }
        }
    }

    #[test]
    fn left_compressed_predicate() {
        assert!(is_left_compressed(&tower_of_cubes(4, 2).unwrap()));
        assert!(!is_left_compressed(&SetSystem::from_sets(2, &[&[], &[2]]).unwrap()));
        assert!(is_left_compressed(&SetSystem::empty(3).unwrap()));
    }

    #[test]
    fn predicate_matches_definition_exhaustively() {
        for n in 1..=3usize {
            for bits in 0u32..1 << (1 << n) {
                let a = SetSystem::from_masks(n, (0..1u32 << n).filter(|m| bits >> m & 1 == 1).map(SubsetMask))
                    .unwrap();
                let by_definition =
                    (1..=n).all(|i| (i + 1..=n).all(|j| compress_system(&a, i, j).unwrap() == a));
                assert_eq!(is_left_compressed(&a), by_definition);
                let l = left_compress(&a);
                assert!(is_left_compressed(&l));
                assert_eq!(l.len(), a.len());
            }
        }
    }
}

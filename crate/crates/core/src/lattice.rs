//! Subsets of the ground set `{1,…,n}`, set systems over them, and the
//! correspondence between permutations and maximal chains.
//!
//! Element `i` is stored as bit `i - 1`. Every file format and every module
//! uses this encoding.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported ground size. Dense systems hold `2^n` flags.
pub const MAX_N: usize = 24;

/// A subset of `{1,…,n}`; bit `i - 1` set means element `i` is present.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetMask(pub u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn full(n: usize) -> SubsetMask {
        debug_assert!(n <= 32);
        SubsetMask(if n == 32 { u32::MAX } else { (1u32 << n) - 1 })
    }

    /// Builds a mask from 1-based elements.
    pub fn from_elements(elements: &[usize]) -> SubsetMask {
        SubsetMask(elements.iter().fold(0, |acc, &e| acc | (1 << (e - 1))))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn rank(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, element: usize) -> bool {
        (1..=32).contains(&element) && self.0 & (1 << (element - 1)) != 0
    }

    pub fn with(self, element: usize) -> SubsetMask {
        SubsetMask(self.0 | (1 << (element - 1)))
    }

    pub fn without(self, element: usize) -> SubsetMask {
        SubsetMask(self.0 & !(1 << (element - 1)))
    }

    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_valid_for(self, n: usize) -> bool {
        n >= 32 || self.0 >> n == 0
    }

    /// Elements in increasing order, 1-based.
    pub fn elements(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let low = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(low + 1)
        })
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return f.write_str("∅");
        }
        f.write_str("{")?;
        for (idx, e) in self.elements().enumerate() {
            if idx > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

/// Orders masks by rank first, then by numeric value.
pub fn rank_order(a: &SubsetMask, b: &SubsetMask) -> std::cmp::Ordering {
    (a.rank(), a.0).cmp(&(b.rank(), b.0))
}

/// All `2^n` masks sorted by (rank, mask).
pub fn masks_in_rank_order(n: usize) -> Vec<SubsetMask> {
    let mut all: Vec<SubsetMask> = (0..1u32 << n).map(SubsetMask).collect();
    all.sort_by(rank_order);
    all
}

/// A family `A ⊆ P({1,…,n})` stored as one flag per subset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SetSystem {
    n: usize,
    members: Vec<bool>,
    size: usize,
}

impl SetSystem {
    pub fn empty(n: usize) -> Result<SetSystem> {
        if n == 0 || n > MAX_N {
            return Err(Error::GroundSize { n, max: MAX_N });
        }
        Ok(SetSystem { n, members: vec![false; 1 << n], size: 0 })
    }

    /// The whole power set `P(X)`.
    pub fn full(n: usize) -> Result<SetSystem> {
        let mut s = SetSystem::empty(n)?;
        s.members.iter_mut().for_each(|m| *m = true);
        s.size = 1 << n;
        Ok(s)
    }

    /// Builds a system from masks; repeated masks are stored once.
    pub fn from_masks<I>(n: usize, masks: I) -> Result<SetSystem>
    where
        I: IntoIterator<Item = SubsetMask>,
    {
        let mut s = SetSystem::empty(n)?;
        for m in masks {
            s.try_insert(m)?;
        }
        Ok(s)
    }

    /// Convenience constructor from element lists, e.g. `&[&[], &[1], &[1, 2]]`.
    pub fn from_sets(n: usize, sets: &[&[usize]]) -> Result<SetSystem> {
        for set in sets {
            if let Some(&e) = set.iter().find(|&&e| e == 0 || e > n) {
                return Err(Error::ElementOutOfRange { element: e, n });
            }
        }
        SetSystem::from_masks(n, sets.iter().map(|s| SubsetMask::from_elements(s)))
    }

    pub fn from_flags(n: usize, members: Vec<bool>) -> Result<SetSystem> {
        if n == 0 || n > MAX_N {
            return Err(Error::GroundSize { n, max: MAX_N });
        }
        if members.len() != 1 << n {
            return Err(Error::InvalidParameter(format!(
                "expected {} flags, got {}",
                1usize << n,
                members.len()
            )));
        }
        let size = members.iter().filter(|&&m| m).count();
        Ok(SetSystem { n, members, size })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn flags(&self) -> &[bool] {
        &self.members
    }

    pub fn contains(&self, s: SubsetMask) -> bool {
        self.members.get(s.index()).copied().unwrap_or(false)
    }

    /// Inserts `s`, returning whether it was newly added.
    pub fn try_insert(&mut self, s: SubsetMask) -> Result<bool> {
        if !s.is_valid_for(self.n) {
            return Err(Error::MaskOutOfRange { mask: s.0 as u64, n: self.n });
        }
        let slot = &mut self.members[s.index()];
        if *slot {
            return Ok(false);
        }
        *slot = true;
        self.size += 1;
        Ok(true)
    }

    /// Inserts a mask known to be valid for this ground size.
    pub fn insert(&mut self, s: SubsetMask) -> bool {
        self.try_insert(s).expect("mask out of range")
    }

    pub fn remove(&mut self, s: SubsetMask) -> bool {
        match self.members.get_mut(s.index()) {
            Some(slot) if *slot => {
                *slot = false;
                self.size -= 1;
                true
            }
            _ => false,
        }
    }

    /// Members in ascending mask order.
    pub fn iter(&self) -> impl Iterator<Item = SubsetMask> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| SubsetMask(i as u32))
    }

    /// Members sorted by (rank, mask).
    pub fn sorted_members(&self) -> Vec<SubsetMask> {
        let mut v: Vec<SubsetMask> = self.iter().collect();
        v.sort_by(rank_order);
        v
    }

    pub fn ground(&self) -> SubsetMask {
        SubsetMask::full(self.n)
    }
}

impl fmt::Debug for SetSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetSystem(n={}, ", self.n)?;
        f.debug_set().entries(self.sorted_members().iter().map(|m| m.to_string())).finish()?;
        f.write_str(")")
    }
}

impl Serialize for SetSystem {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("SetSystem", 2)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("sets", &self.iter().map(|s| s.bits()).collect::<Vec<_>>())?;
        st.end()
    }
}

/// A permutation `a_1 … a_n` of `{1,…,n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermutationWord(Vec<usize>);

impl PermutationWord {
    pub fn new(word: Vec<usize>) -> Result<PermutationWord> {
        let n = word.len();
        if n == 0 || n > MAX_N {
            return Err(Error::InvalidPermutation(format!("length {n} outside 1..={MAX_N}")));
        }
        let mut seen = vec![false; n + 1];
        for &a in &word {
            if a == 0 || a > n {
                return Err(Error::InvalidPermutation(format!("element {a} outside 1..={n}")));
            }
            if std::mem::replace(&mut seen[a], true) {
                return Err(Error::InvalidPermutation(format!("element {a} repeated")));
            }
        }
        Ok(PermutationWord(word))
    }

    pub fn identity(n: usize) -> PermutationWord {
        PermutationWord((1..=n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The `n + 1` prefix sets `∅, {a_1}, {a_1,a_2}, …, X` of a permutation.
pub fn chain_of_permutation(sigma: &PermutationWord) -> Vec<SubsetMask> {
    let mut chain = Vec::with_capacity(sigma.len() + 1);
    let mut acc = SubsetMask::EMPTY;
    chain.push(acc);
    for &a in sigma.as_slice() {
        acc = acc.with(a);
        chain.push(acc);
    }
    chain
}

/// Inverse of [`chain_of_permutation`]: reads off the element added at each step.
pub fn permutation_of_chain(chain: &[SubsetMask]) -> Result<PermutationWord> {
    let n = chain.len().checked_sub(1).filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidParameter("a maximal chain needs at least two sets".into())
    })?;
    if chain[0] != SubsetMask::EMPTY || chain[n] != SubsetMask::full(n) {
        return Err(Error::InvalidParameter("chain must run from ∅ to X".into()));
    }
    let mut word = Vec::with_capacity(n);
    for pair in chain.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let diff = hi.0 & !lo.0;
        if !lo.is_subset_of(hi) || diff.count_ones() != 1 {
            return Err(Error::InvalidParameter(format!("{lo} → {hi} is not a one-element step")));
        }
        word.push(diff.trailing_zeros() as usize + 1);
    }
    PermutationWord::new(word)
}

/// Whether `family` is closed under taking supersets.
pub fn is_upset(family: &SetSystem) -> bool {
    let n = family.n();
    family
        .iter()
        .all(|s| (1..=n).filter(|&x| !s.contains(x)).all(|x| family.contains(s.with(x))))
}

/// Whether `family` is closed under taking subsets.
pub fn is_downset(family: &SetSystem) -> bool {
    family.iter().all(|s| s.elements().all(|x| family.contains(s.without(x))))
}

/// Entry `r` is `|A ∩ X^(r)|`, for `r = 0…n`.
pub fn layer_profile(family: &SetSystem) -> Vec<usize> {
    let mut profile = vec![0; family.n() + 1];
    for s in family.iter() {
        profile[s.rank()] += 1;
    }
    profile
}

/// Next permutation in lexicographic order; returns `false` after the last one.
pub(crate) fn next_permutation(word: &mut [usize]) -> bool {
    let Some(i) = word.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = word.iter().rposition(|&x| x > word[i]).expect("pivot has a successor");
    word.swap(i, j);
    word[i + 1..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(w: &[usize]) -> PermutationWord {
        PermutationWord::new(w.to_vec()).unwrap()
    }

    fn set(e: &[usize]) -> SubsetMask {
        SubsetMask::from_elements(e)
    }

    #[test]
    fn prefix_chains() {
        assert_eq!(chain_of_permutation(&perm(&[1, 2])), vec![set(&[]), set(&[1]), set(&[1, 2])]);
        assert_eq!(chain_of_permutation(&perm(&[2, 1])), vec![set(&[]), set(&[2]), set(&[1, 2])]);
        assert_eq!(
            chain_of_permutation(&perm(&[2, 3, 1])),
            vec![set(&[]), set(&[2]), set(&[2, 3]), set(&[1, 2, 3])]
        );
    }

    #[test]
    fn invalid_permutations() {
        assert!(PermutationWord::new(vec![1, 1]).is_err());
        assert!(PermutationWord::new(vec![1, 3]).is_err());
        assert!(PermutationWord::new(vec![0, 1]).is_err());
        assert!(PermutationWord::new(vec![]).is_err());
    }

    #[test]
    fn chain_bijection_exhaustive() {
        for n in 1..=6 {
            let mut word: Vec<usize> = (1..=n).collect();
            let mut seen = std::collections::HashSet::new();
            loop {
                let sigma = perm(&word);
                let chain = chain_of_permutation(&sigma);
                assert_eq!(chain.len(), n + 1);
                assert_eq!(permutation_of_chain(&chain).unwrap(), sigma);
                assert!(seen.insert(chain));
                if !next_permutation(&mut word) {
                    break;
                }
            }
            assert_eq!(seen.len(), (1..=n).product::<usize>());
        }
    }

    #[test]
    fn rejects_broken_chains() {
        assert!(permutation_of_chain(&[set(&[]), set(&[1, 2])]).is_err());
        assert!(permutation_of_chain(&[set(&[]), set(&[2]), set(&[1, 3]), set(&[1, 2, 3])]).is_err());
        assert!(permutation_of_chain(&[set(&[])]).is_err());
    }

    #[test]
    fn upsets() {
        let full = SetSystem::full(2).unwrap();
        assert!(is_upset(&full));
        assert!(is_upset(&SetSystem::from_sets(2, &[&[1], &[1, 2]]).unwrap()));
        assert!(!is_upset(&SetSystem::from_sets(2, &[&[1]]).unwrap()));
        assert!(is_upset(&SetSystem::empty(3).unwrap()));
    }

    #[test]
    fn profiles() {
        assert_eq!(layer_profile(&SetSystem::full(3).unwrap()), vec![1, 3, 3, 1]);
        let t2 = SetSystem::from_sets(
            4,
            &[&[], &[1], &[2], &[1, 2], &[1, 2, 3], &[1, 2, 4], &[1, 2, 3, 4]],
        )
        .unwrap();
        assert_eq!(layer_profile(&t2), vec![1, 2, 1, 2, 1]);
        assert_eq!(layer_profile(&SetSystem::empty(4).unwrap()), vec![0; 5]);
    }

    #[test]
    fn system_bookkeeping() {
        let mut s = SetSystem::empty(3).unwrap();
        assert!(s.insert(set(&[1, 3])));
        assert!(!s.insert(set(&[1, 3])));
        assert_eq!(s.len(), 1);
        assert!(s.try_insert(SubsetMask(0b1000)).is_err());
        assert!(s.remove(set(&[1, 3])));
        assert!(s.is_empty());
        assert!(SetSystem::empty(0).is_err());
        assert!(SetSystem::empty(MAX_N + 1).is_err());
        assert!(SetSystem::from_sets(2, &[&[3]]).is_err());
    }

    #[test]
    fn mask_display() {
        assert_eq!(set(&[]).to_string(), "∅");
        assert_eq!(set(&[3, 1]).to_string(), "{1,3}");
    }
}

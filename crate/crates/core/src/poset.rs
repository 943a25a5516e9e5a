//! Posets on `{1,…,n}`, their down-set families, linear extensions and antichains.
//!
//! The down-sets of `P` form a family in `P(X)` whose maximal chains are
//! exactly the linear extensions of `P`, and down-sets correspond one to one
//! with antichains (a down-set is generated by its maximal elements).

use std::fmt;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::count::count_maximal_chains;
use crate::error::{Error, Result};
use crate::lattice::{next_permutation, SetSystem, SubsetMask, MAX_N};

/// Largest `n` for which [`poset_search`] enumerates isomorphism classes.
pub const POSET_SEARCH_MAX_N: usize = 6;

/// A strict partial order on `{1,…,n}`, stored transitively closed:
/// `below[x - 1]` is the mask of all `y < x`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poset {
    n: usize,
    below: Vec<u32>,
}

impl Poset {
    /// Builds the transitive closure of the relations `a < b`; rejects cycles.
    pub fn from_relations(n: usize, relations: &[(usize, usize)]) -> Result<Poset> {
        if n == 0 || n > MAX_N {
            return Err(Error::GroundSize { n, max: MAX_N });
        }
        let mut below = vec![0u32; n];
        for &(a, b) in relations {
            for e in [a, b] {
                if e == 0 || e > n {
                    return Err(Error::ElementOutOfRange { element: e, n });
                }
            }
            below[b - 1] |= 1 << (a - 1);
        }
        Poset::close(n, below)
    }

    fn close(n: usize, mut below: Vec<u32>) -> Result<Poset> {
        // Warshall on bit rows: if k < x then everything below k is below x.
        for k in 0..n {
            for x in 0..n {
                if below[x] >> k & 1 == 1 {
                    below[x] |= below[k];
                }
            }
        }
        if let Some(x) = (0..n).find(|&x| below[x] >> x & 1 == 1) {
            return Err(Error::InvalidPoset(format!("relations contain a cycle through {}", x + 1)));
        }
        Ok(Poset { n, below })
    }

    /// No relations.
    pub fn antichain(n: usize) -> Result<Poset> {
        Poset::from_relations(n, &[])
    }

    /// `1 < 2 < … < n`.
    pub fn chain(n: usize) -> Result<Poset> {
        let rel: Vec<_> = (1..n).map(|a| (a, a + 1)).collect();
        Poset::from_relations(n, &rel)
    }

    /// Antichains of the given sizes stacked on consecutive labels, each
    /// entirely below the next.
    pub fn ordinal_sum_of_antichains(sizes: &[usize]) -> Result<Poset> {
        let n: usize = sizes.iter().sum();
        let mut rel = Vec::new();
        let mut start = 1;
        for pair in sizes.windows(2) {
            let (lo, hi) = (start..start + pair[0], start + pair[0]..start + pair[0] + pair[1]);
            for a in lo {
                for b in hi.clone() {
                    rel.push((a, b));
                }
            }
            start += pair[0];
        }
        Poset::from_relations(n, &rel)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `a < b`.
    pub fn less(&self, a: usize, b: usize) -> bool {
        self.below[b - 1] >> (a - 1) & 1 == 1
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.less(a, b) || self.less(b, a)
    }

    /// Mask of the elements below `x`.
    pub fn down(&self, x: usize) -> SubsetMask {
        SubsetMask(self.below[x - 1])
    }

    /// All pairs `a < b`.
    pub fn relations(&self) -> Vec<(usize, usize)> {
        (1..=self.n)
            .flat_map(|b| self.down(b).elements().map(move |a| (a, b)))
            .collect()
    }

    /// Pairs `a < b` with nothing strictly between them.
    pub fn cover_relations(&self) -> Vec<(usize, usize)> {
        let mut covers: Vec<_> = self
            .relations()
            .into_iter()
            .filter(|&(a, b)| !(1..=self.n).any(|c| self.less(a, c) && self.less(c, b)))
            .collect();
        covers.sort();
        covers
    }

    /// Relabels element `x` as `perm[x - 1]`.
    pub fn relabel(&self, perm: &[usize]) -> Poset {
        let mut below = vec![0u32; self.n];
        for (a, b) in self.relations() {
            below[perm[b - 1] - 1] |= 1 << (perm[a - 1] - 1);
        }
        Poset { n: self.n, below }
    }

    /// Row-major relation matrix as bits: bit `(b−1)·n + (a−1)` is `a < b`.
    fn code(&self) -> u64 {
        self.below.iter().enumerate().fold(0u64, |acc, (b, &row)| acc | (row as u64) << (b * self.n))
    }

    fn degrees(&self) -> Vec<(u32, u32)> {
        (1..=self.n)
            .map(|x| {
                let down = self.below[x - 1].count_ones();
                let up = (1..=self.n).filter(|&y| self.less(x, y)).count() as u32;
                (down, up)
            })
            .collect()
    }

    /// A canonical member of this poset's isomorphism class: elements are
    /// ordered by (in-degree, out-degree), and ties are broken by trying
    /// every ordering within each tie class and keeping the least matrix.
    pub fn canonical(&self) -> Poset {
        assert!(self.n <= 8, "canonical form is intended for n ≤ 8");
        let deg = self.degrees();
        let mut order: Vec<usize> = (1..=self.n).collect();
        order.sort_by_key(|&x| deg[x - 1]);
        // Groups of equal degree pairs, as ranges into `order`.
        let mut groups = Vec::new();
        let mut start = 0;
        for i in 1..=self.n {
            if i == self.n || deg[order[i] - 1] != deg[order[start] - 1] {
                groups.push(start..i);
                start = i;
            }
        }
        let mut best: Option<Poset> = None;
        let mut current = order.clone();
        permute_groups(&mut current, &groups, 0, &mut |arrangement| {
            // arrangement[pos] is the old label placed at new label pos + 1.
            let mut perm = vec![0; self.n];
            for (pos, &old) in arrangement.iter().enumerate() {
                perm[old - 1] = pos + 1;
            }
            let cand = self.relabel(&perm);
            if best.as_ref().is_none_or(|b| cand.code() < b.code()) {
                best = Some(cand);
            }
        });
        best.expect("at least one arrangement")
    }
}

fn permute_groups(cur: &mut Vec<usize>, groups: &[std::ops::Range<usize>], g: usize, visit: &mut dyn FnMut(&[usize])) {
    if g == groups.len() {
        visit(cur);
        return;
    }
    let range = groups[g].clone();
    let mut slice: Vec<usize> = cur[range.clone()].to_vec();
    slice.sort_unstable();
    loop {
        cur[range.clone()].copy_from_slice(&slice);
        permute_groups(cur, groups, g + 1, visit);
        if !next_permutation(&mut slice) {
            break;
        }
    }
}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poset(n={}, {:?})", self.n, self.cover_relations())
    }
}

impl Serialize for Poset {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("Poset", 2)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("covers", &self.cover_relations())?;
        st.end()
    }
}

/// The family of all down-sets of `P`.
pub fn downset_family(poset: &Poset) -> SetSystem {
    let n = poset.n;
    let flags = (0..1u32 << n)
        .map(|s| (0..n).all(|x| s >> x & 1 == 0 || poset.below[x] & !s == 0))
        .collect();
    SetSystem::from_flags(n, flags).expect("valid ground size")
}

/// Linear extensions of `P`, counted as maximal chains of its down-set family.
pub fn count_linear_extensions(poset: &Poset) -> BigUint {
    count_maximal_chains(&downset_family(poset))
}

/// Linear extensions counted by checking every permutation (n ≤ 8).
pub fn count_linear_extensions_oracle(poset: &Poset) -> Result<BigUint> {
    if poset.n > 8 {
        return Err(Error::TooLarge(format!("permutation enumeration needs n ≤ 8, got {}", poset.n)));
    }
    let mut word: Vec<usize> = (1..=poset.n).collect();
    let mut count = 0u64;
    loop {
        let respects = word
            .iter()
            .enumerate()
            .all(|(i, &b)| word[i + 1..].iter().all(|&later| !poset.less(later, b)));
        count += respects as u64;
        if !next_permutation(&mut word) {
            return Ok(BigUint::from(count));
        }
    }
}

/// Number of antichains of `P` (including `∅`), via down-sets.
pub fn count_antichains(poset: &Poset) -> BigUint {
    BigUint::from(downset_family(poset).len())
}

/// Antichains counted directly by testing every subset for pairwise
/// incomparability (n ≤ 15).
pub fn count_antichains_oracle(poset: &Poset) -> Result<BigUint> {
    if poset.n > 15 {
        return Err(Error::TooLarge(format!("subset enumeration needs n ≤ 15, got {}", poset.n)));
    }
    let count = (0..1u32 << poset.n)
        .filter(|&s| {
            let elems: Vec<usize> = SubsetMask(s).elements().collect();
            elems.iter().enumerate().all(|(i, &a)| elems[i + 1..].iter().all(|&b| !poset.comparable(a, b)))
        })
        .count();
    Ok(BigUint::from(count))
}

/// Closed under union and intersection, and contains `∅` and `X`.
pub fn is_ring_of_sets(family: &SetSystem) -> bool {
    if !family.contains(SubsetMask::EMPTY) || !family.contains(family.ground()) {
        return false;
    }
    let members: Vec<SubsetMask> = family.iter().collect();
    members.iter().enumerate().all(|(i, a)| {
        members[i + 1..].iter().all(|b| {
            family.contains(SubsetMask(a.bits() | b.bits())) && family.contains(SubsetMask(a.bits() & b.bits()))
        })
    })
}

/// The poset whose down-set family is `family`, if there is one.
pub fn poset_of_family(family: &SetSystem) -> Option<Poset> {
    let n = family.n();
    // a < b iff every member containing b also contains a.
    let mut below = vec![0u32; n];
    for b in 1..=n {
        for a in (1..=n).filter(|&a| a != b) {
            if family.iter().filter(|s| s.contains(b)).all(|s| s.contains(a)) {
                below[b - 1] |= 1 << (a - 1);
            }
        }
    }
    let poset = Poset::close(n, below).ok()?;
    (downset_family(&poset) == *family).then_some(poset)
}

/// Every labelled poset on `{1,…,n}` (n ≤ 5), by testing every strict relation.
pub fn all_labeled_posets(n: usize) -> Result<Vec<Poset>> {
    if n == 0 || n > 5 {
        return Err(Error::TooLarge(format!("labelled enumeration needs 1 ≤ n ≤ 5, got {n}")));
    }
    let pairs: Vec<(usize, usize)> =
        (1..=n).flat_map(|a| (1..=n).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    for bits in 0u64..1 << pairs.len() {
        let mut below = vec![0u32; n];
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if bits >> i & 1 == 1 {
                below[b - 1] |= 1 << (a - 1);
            }
        }
        let antisymmetric = (0..n).all(|x| (0..n).all(|y| !(below[x] >> y & 1 == 1 && below[y] >> x & 1 == 1)));
        let transitive = (0..n).all(|x| SubsetMask(below[x]).elements().all(|y| below[y - 1] & !below[x] == 0));
        if antisymmetric && transitive {
            out.push(Poset { n, below });
        }
    }
    Ok(out)
}

/// Posets in which `x < y` implies `x < y` as integers. New element `k + 1`
/// is placed above any down-set of the poset on `{1,…,k}`, so each such
/// poset is produced exactly once.
pub fn naturally_labeled_posets(n: usize) -> Result<Vec<Poset>> {
    if n == 0 || n > 8 {
        return Err(Error::TooLarge(format!("natural labelling enumeration needs 1 ≤ n ≤ 8, got {n}")));
    }
    let mut level = vec![Poset { n: 1, below: vec![0] }];
    for k in 1..n {
        let mut next = Vec::new();
        for p in &level {
            for d in downset_family(p).iter() {
                let mut below = p.below.clone();
                below.push(d.bits());
                next.push(Poset { n: k + 1, below });
            }
        }
        level = next;
    }
    Ok(level)
}

/// One canonical representative per isomorphism class of posets on `n`
/// elements (n ≤ 6), sorted.
pub fn isomorphism_classes(n: usize) -> Result<Vec<Poset>> {
    if n > POSET_SEARCH_MAX_N {
        return Err(Error::TooLarge(format!("isomorphism classes are enumerated for n ≤ {POSET_SEARCH_MAX_N}")));
    }
    let mut reps: Vec<Poset> = naturally_labeled_posets(n)?.par_iter().map(Poset::canonical).collect();
    reps.sort_by_key(|p| p.code());
    reps.dedup();
    Ok(reps)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PosetSearchReport {
    pub n: usize,
    pub m: usize,
    #[serde(serialize_with = "crate::serde_exact::count")]
    pub max_extensions: BigUint,
    /// Canonical representatives attaining the maximum.
    pub witnesses: Vec<Poset>,
    pub classes: usize,
    /// Classes with at most `m` antichains.
    pub qualifying: usize,
}

/// The most linear extensions of a poset on `n` elements with at most `m`
/// antichains (counting `∅`).
pub fn poset_search(n: usize, m: usize, workers: usize) -> Result<PosetSearchReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let classes = pool.install(|| isomorphism_classes(n))?;
    let scored: Vec<(BigUint, BigUint)> = pool.install(|| {
        classes.par_iter().map(|p| (count_linear_extensions(p), count_antichains(p))).collect()
    });
    let budget = BigUint::from(m);
    let mut best = BigUint::from(0u32);
    let mut witnesses = Vec::new();
    let mut qualifying = 0;
    for (p, (ext, anti)) in classes.iter().zip(&scored) {
        if *anti > budget {
            continue;
        }
        qualifying += 1;
        if *ext > best {
            best = ext.clone();
            witnesses.clear();
        }
        if *ext == best {
            witnesses.push(p.clone());
        }
    }
    Ok(PosetSearchReport { n, m, max_extensions: best, witnesses, classes: classes.len(), qualifying })
}

/// A random poset: each pair `i < j` of a random linear order is related with
/// probability `density` before closing.
pub fn random_poset<R: Rng + ?Sized>(n: usize, density: f64, rng: &mut R) -> Poset {
    let mut labels: Vec<usize> = (1..=n).collect();
    labels.shuffle(rng);
    let mut rel = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                rel.push((labels[i], labels[j]));
            }
        }
    }
    Poset::from_relations(n, &rel).expect("relations follow a linear order")
}

/// Parses the poset text format: `n` on the first line, then lines `a < b`.
pub fn parse_poset(input: &str) -> Result<Poset> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (first_no, first) = lines.next().ok_or(Error::Parse { line: 1, message: "missing ground size".into() })?;
    let n: usize = first
        .parse()
        .map_err(|_| Error::Parse { line: first_no, message: format!("expected ground size, found {first:?}") })?;
    let mut rel = Vec::new();
    for (no, line) in lines {
        let bad = || Error::Parse { line: no, message: format!("expected `a < b`, found {line:?}") };
        let (a, b) = line.split_once('<').ok_or_else(bad)?;
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a == b {
            return Err(Error::Parse { line: no, message: format!("{a} < {a} is reflexive") });
        }
        rel.push((a, b));
    }
    Poset::from_relations(n, &rel)
}

pub fn poset_to_text(poset: &Poset) -> String {
    let mut out = format!("{}\n", poset.n);
    for (a, b) in poset.cover_relations() {
        out.push_str(&format!("{a} < {b}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::generalized_tower;

    fn two_two() -> Poset {
        Poset::ordinal_sum_of_antichains(&[2, 2]).unwrap()
    }

    #[test]
    fn downset_examples() {
        assert_eq!(downset_family(&Poset::antichain(3).unwrap()), SetSystem::full(3).unwrap());
        assert_eq!(
            downset_family(&Poset::chain(3).unwrap()),
            SetSystem::from_sets(3, &[&[], &[1], &[1, 2], &[1, 2, 3]]).unwrap()
        );
        assert_eq!(downset_family(&two_two()), generalized_tower(&[2, 2]).unwrap());
    }

    #[test]
    fn extension_examples() {
        assert_eq!(count_linear_extensions(&Poset::antichain(3).unwrap()), BigUint::from(6u32));
        assert_eq!(count_linear_extensions(&Poset::chain(3).unwrap()), BigUint::from(1u32));
        assert_eq!(count_linear_extensions(&two_two()), BigUint::from(4u32));
        assert_eq!(count_linear_extensions_oracle(&two_two()).unwrap(), BigUint::from(4u32));
    }

    #[test]
    fn antichain_examples() {
        assert_eq!(count_antichains(&Poset::antichain(3).unwrap()), BigUint::from(8u32));
        assert_eq!(count_antichains(&Poset::chain(3).unwrap()), BigUint::from(4u32));
        assert_eq!(count_antichains(&two_two()), BigUint::from(7u32));
        assert_eq!(count_antichains_oracle(&two_two()).unwrap(), BigUint::from(7u32));
    }

    #[test]
    fn closure_and_cycles() {
        let p = Poset::from_relations(3, &[(1, 2), (2, 3)]).unwrap();
        assert!(p.less(1, 3));
        assert_eq!(p.cover_relations(), vec![(1, 2), (2, 3)]);
        assert!(Poset::from_relations(3, &[(1, 2), (2, 3), (3, 1)]).is_err());
        assert!(Poset::from_relations(2, &[(1, 1)]).is_err());
        assert!(Poset::from_relations(2, &[(1, 3)]).is_err());
    }

    #[test]
    fn labelled_counts() {
        let counts: Vec<usize> = (1..=4).map(|n| all_labeled_posets(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 3, 19, 219]);
        let natural: Vec<usize> = (1..=6).map(|n| naturally_labeled_posets(n).unwrap().len()).collect();
        assert_eq!(natural, vec![1, 2, 7, 40, 357, 4824]);
        let classes: Vec<usize> = (1..=6).map(|n| isomorphism_classes(n).unwrap().len()).collect();
        assert_eq!(classes, vec![1, 2, 5, 16, 63, 318]);
    }

    #[test]
    fn canonical_form_is_invariant() {
        for p in all_labeled_posets(4).unwrap() {
            let c = p.canonical();
            let mut perm: Vec<usize> = (1..=4).collect();
            loop {
                assert_eq!(p.relabel(&perm).canonical(), c);
                if !next_permutation(&mut perm) {
                    break;
                }
            }
        }
    }

    #[test]
    fn classes_cover_labelled_posets() {
        for n in 1..=4 {
            let mut from_labelled: Vec<Poset> = all_labeled_posets(n).unwrap().iter().map(Poset::canonical).collect();
            from_labelled.sort_by_key(|p| p.code());
            from_labelled.dedup();
            assert_eq!(from_labelled, isomorphism_classes(n).unwrap());
        }
    }

    #[test]
    fn search_examples() {
        let r = poset_search(3, 8, 1).unwrap();
        assert_eq!(r.max_extensions, BigUint::from(6u32));
        let r = poset_search(3, 4, 1).unwrap();
        assert_eq!(r.max_extensions, BigUint::from(1u32));
        assert_eq!(r.witnesses, vec![Poset::chain(3).unwrap().canonical()]);
        let r = poset_search(4, 7, 1).unwrap();
        assert!(r.max_extensions >= BigUint::from(4u32));
        let r = poset_search(3, 3, 1).unwrap();
        assert_eq!(r.max_extensions, BigUint::from(0u32));
        assert!(r.witnesses.is_empty());
        assert!(poset_search(7, 10, 1).is_err());
    }

    #[test]
    fn search_matches_labelled_enumeration() {
        for n in 1..=4 {
            let labelled = all_labeled_posets(n).unwrap();
            for m in 0..=(1 << n) {
                let want = labelled
                    .iter()
                    .filter(|p| count_antichains_oracle(p).unwrap() <= BigUint::from(m))
                    .map(|p| count_linear_extensions_oracle(p).unwrap())
                    .max()
                    .unwrap_or_default();
                assert_eq!(poset_search(n, m, 2).unwrap().max_extensions, want, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn family_recovery() {
        for p in all_labeled_posets(4).unwrap() {
            let fam = downset_family(&p);
            assert!(is_ring_of_sets(&fam));
            assert!(fam.iter().all(|s| (1..=4).all(|x| !s.contains(x) || p.down(x).is_subset_of(s))));
            assert_eq!(poset_of_family(&fam), Some(p));
        }
        // A ring of sets that is not a down-set family: 1 and 2 always together.
        let glued = SetSystem::from_sets(2, &[&[], &[1, 2]]).unwrap();
        assert!(is_ring_of_sets(&glued));
        assert_eq!(poset_of_family(&glued), None);
    }

    #[test]
    fn text_format() {
        let p = parse_poset("4\n1 < 3\n2 < 3\n3 < 4\n1 < 4\n").unwrap();
        assert_eq!(poset_to_text(&p), "4\n1 < 3\n2 < 3\n3 < 4\n");
        assert_eq!(parse_poset(&poset_to_text(&p)).unwrap(), p);
        assert!(parse_poset("3\n1 < 1\n").is_err());
        assert!(parse_poset("3\n1 > 2\n").is_err());
        assert!(parse_poset("2\n1 < 2\n2 < 1\n").is_err());
    }
}

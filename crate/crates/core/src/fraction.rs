//! The constant-fraction construction.
//!
//! Fix an up-set `U ⊆ P([k])` and a prefix length `m`. The family `B`
//! consists of the permutations of `[n]` whose first `m` entries meet `[k]`
//! in a member of `U`; the set system is the union of their prefix chains.
//! As `n` grows with `m/n → p`, `|B|/n!` tends to
//! `f(p) = Σ_{Y∈U} p^{|Y|} (1−p)^{k−|Y|}` while the union stays close to
//! `|U|·2^{n−k}`. Everything here is exact; the construction depends on `p`
//! only through the integer `m`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::count::masks_of_rank;
use crate::error::{Error, Result};
use crate::exact::{binomial, factorial, ratio, ratio_from_count, ratio_to_count, ratio_to_f64};
use crate::lattice::{is_upset, layer_profile, next_permutation, SetSystem, SubsetMask};

/// An up-set of exactly `size` sets in `P([k])`: every set above some level
/// `s`, plus the colex-least sets of size `s`.
pub fn build_upset(k: usize, size: usize) -> Result<SetSystem> {
    let mut upset = SetSystem::empty(k)?;
    if size > 1 << k {
        return Err(Error::InvalidParameter(format!("an up-set in P([{k}]) has at most 2^{k} sets, asked for {size}")));
    }
    let mut left = size;
    for r in (0..=k).rev() {
        // Colex order on sets of one size is numeric order on their masks.
        for mask in masks_of_rank(k, r) {
            if left == 0 {
                return Ok(upset);
            }
            upset.insert(SubsetMask(mask));
            left -= 1;
        }
    }
    Ok(upset)
}

/// `f(p) = Σ_{Y∈U} p^{|Y|} (1−p)^{k−|Y|}`, exactly.
pub fn f_eval(upset: &SetSystem, p: &BigRational) -> BigRational {
    let k = upset.n();
    let q = BigRational::one() - p;
    layer_profile(upset)
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(r, &c)| BigRational::from_integer(BigInt::from(c)) * num_traits::pow(p.clone(), r) * num_traits::pow(q.clone(), k - r))
        .fold(BigRational::zero(), |acc, t| acc + t)
}

/// `f(p)` in floating point.
pub fn f_eval_f64(upset: &SetSystem, p: f64) -> f64 {
    let k = upset.n() as i32;
    layer_profile(upset)
        .iter()
        .enumerate()
        .map(|(r, &c)| c as f64 * p.powi(r as i32) * (1.0 - p).powi(k - r as i32))
        .sum()
}

/// `10^{-12}`.
pub fn default_tolerance() -> BigRational {
    ratio(1, 1_000_000_000_000i64)
}

/// Result of bisecting `f(p) = α` on `[0, ½]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Threshold {
    /// Final bracket, `f(lo) ≤ α ≤ f(hi)`.
    #[serde(serialize_with = "crate::serde_exact::ratio")]
    pub lo: BigRational,
    #[serde(serialize_with = "crate::serde_exact::ratio")]
    pub hi: BigRational,
    /// Midpoint of the bracket.
    #[serde(serialize_with = "crate::serde_exact::ratio")]
    pub p: BigRational,
    #[serde(serialize_with = "crate::serde_exact::ratio")]
    pub f_at_p: BigRational,
    /// `½ − p`.
    #[serde(serialize_with = "crate::serde_exact::ratio")]
    pub gap: BigRational,
    pub iterations: usize,
}

impl Threshold {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn p_f64(&self) -> f64 {
        ratio_to_f64(&self.p)
    }
}

/// Bisects on `[0, ½]` at dyadic midpoints, evaluating `f` exactly, until the
/// bracket is at most `tol` wide.
pub fn solve_threshold(upset: &SetSystem, alpha: &BigRational, tol: &BigRational) -> Result<Threshold> {
    if !is_upset(upset) {
        return Err(Error::NotUpset);
    }
    if !tol.is_positive() {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let half = ratio(1, 2);
    let beta = f_eval(upset, &half);
    if !alpha.is_positive() || alpha >= &beta {
        return Err(Error::InvalidParameter(format!(
            "need 0 < α < β; α = {alpha}, β = {beta}"
        )));
    }
    let mut lo = BigRational::zero();
    let mut hi = half.clone();
    if f_eval(upset, &lo) > *alpha {
        return Err(Error::InvalidParameter(format!("f(0) > α = {alpha}; no threshold below ½")));
    }
    let mut iterations = 0;
    while &(&hi - &lo) > tol {
        iterations += 1;
        let mid = (&lo + &hi) / BigInt::from(2);
        let fm = f_eval(upset, &mid);
        if fm == *alpha {
            lo = mid.clone();
            hi = mid;
            break;
        }
        if fm < *alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = (&lo + &hi) / BigInt::from(2);
    let f_at_p = f_eval(upset, &p);
    let gap = &half - &p;
    Ok(Threshold { lo, hi, p, f_at_p, gap, iterations })
}

fn check_params(n: usize, upset: &SetSystem, m: usize) -> Result<usize> {
    let k = upset.n();
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    if m > n {
        return Err(Error::InvalidParameter(format!("m = {m} exceeds n = {n}")));
    }
    Ok(k)
}

/// Probability that a uniform random permutation of `[n]` has the elements of
/// `[k]` among its first `m` entries forming a member of `U`:
/// `Σ_{Y∈U} C(m,|Y|)·C(n−m,k−|Y|) / (C(n,k)·C(k,|Y|))`.
pub fn exact_membership_probability(n: usize, upset: &SetSystem, m: usize) -> Result<BigRational> {
    let k = check_params(n, upset, m)?;
    let total = binomial(n, k);
    let mut p = BigRational::zero();
    for (j, &count) in layer_profile(upset).iter().enumerate() {
        if count == 0 {
            continue;
        }
        let num = BigUint::from(count) * binomial(m, j) * binomial(n - m, k - j);
        let den = &total * binomial(k, j);
        p += BigRational::new(BigInt::from(num), BigInt::from(den));
    }
    Ok(p)
}

/// `|B| = P(σ ∈ B) · n!`.
pub fn family_size(n: usize, upset: &SetSystem, m: usize) -> Result<BigUint> {
    let p = exact_membership_probability(n, upset, m)?;
    ratio_to_count(&(p * ratio_from_count(&factorial(n))))
        .ok_or_else(|| Error::Inconsistent("|B| is not an integer".into()))
}

/// Whether `S` lies on the prefix chain of some permutation in `B`.
/// Needs `k ≤ n`, `m ≤ n`.
pub fn in_union(n: usize, upset: &SetSystem, m: usize, s: SubsetMask) -> bool {
    let k = upset.n();
    let low = (1u32 << k) - 1;
    let trace = SubsetMask(s.bits() & low);
    let outside = s.rank() - trace.rank();
    member_by_class(n, k, upset, m, trace, outside)
}

fn member_by_class(n: usize, k: usize, upset: &SetSystem, m: usize, trace: SubsetMask, outside: usize) -> bool {
    let r = trace.rank() + outside;
    if r <= m {
        // S is an initial segment; the rest of the first m entries comes from
        // [k] ∖ S (completing the trace to Y) and from outside [k] ∖ S.
        let spare_outside = (n - k) - outside;
        upset.iter().any(|y| {
            trace.is_subset_of(y) && {
                let extra = y.rank() - trace.rank();
                extra <= m - r && (m - r - extra) <= spare_outside
            }
        })
    } else {
        // The first m entries form an m-subset of S with trace Y ⊆ S ∩ [k].
        upset.iter().any(|y| y.is_subset_of(trace) && y.rank() <= m && m - y.rank() <= outside)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnionReport {
    /// `|⋃_{σ∈B} I(σ)|`.
    #[serde(serialize_with = "crate::serde_exact::count")]
    pub exact: BigUint,
    /// `|U|·2^{n−k} + Σ_{i≤m} C(n,i)`.
    #[serde(serialize_with = "crate::serde_exact::count")]
    pub bound: BigUint,
    pub holds: bool,
}

/// Exact size of the union of the prefix chains of `B`, with the upper bound
/// `β·2^n + Σ_{i≤m} C(n,i)`. Requires `k ≤ m`.
///
/// Membership depends only on `S ∩ [k]` and `|S ∖ [k]|`, so subsets are
/// tallied by those two quantities.
pub fn union_size(n: usize, upset: &SetSystem, m: usize) -> Result<UnionReport> {
    let k = check_params(n, upset, m)?;
    if k > m {
        return Err(Error::InvalidParameter(format!("union size needs k ≤ m, got k = {k}, m = {m}")));
    }
    let mut exact = BigUint::zero();
    for trace in 0..1u32 << k {
        for outside in 0..=n - k {
            if member_by_class(n, k, upset, m, SubsetMask(trace), outside) {
                exact += binomial(n - k, outside);
            }
        }
    }
    let bound = (BigUint::from(upset.len()) << (n - k)) + (0..=m).map(|i| binomial(n, i)).sum::<BigUint>();
    let holds = exact <= bound;
    Ok(UnionReport { exact, bound, holds })
}

/// Permutations of `[n]` in `B`, enumerated directly (n ≤ 8).
fn members_of_b(n: usize, upset: &SetSystem, m: usize) -> Result<Vec<Vec<usize>>> {
    check_params(n, upset, m)?;
    if n > 8 {
        return Err(Error::TooLarge(format!("permutation enumeration needs n ≤ 8, got {n}")));
    }
    let k = upset.n();
    let mut word: Vec<usize> = (1..=n).collect();
    let mut out = Vec::new();
    loop {
        let trace = word[..m].iter().filter(|&&a| a <= k).fold(SubsetMask::EMPTY, |t, &a| t.with(a));
        if upset.contains(trace) {
            out.push(word.clone());
        }
        if !next_permutation(&mut word) {
            return Ok(out);
        }
    }
}

/// `|B| / n!` by enumerating permutations (n ≤ 8).
pub fn membership_probability_by_enumeration(n: usize, upset: &SetSystem, m: usize) -> Result<BigRational> {
    let members = members_of_b(n, upset, m)?;
    Ok(BigRational::new(BigInt::from(members.len()), BigInt::from(factorial(n))))
}

/// The union of prefix chains of `B`, collected from every member (n ≤ 8).
pub fn union_by_enumeration(n: usize, upset: &SetSystem, m: usize) -> Result<SetSystem> {
    let mut union = SetSystem::empty(n)?;
    for word in members_of_b(n, upset, m)? {
        let mut acc = SubsetMask::EMPTY;
        union.insert(acc);
        for a in word {
            acc = acc.with(a);
            union.insert(acc);
        }
    }
    Ok(union)
}

/// Smallest `k ≥ 1` with `2^{−k} < ε/2`.
pub fn choose_k(epsilon: &BigRational) -> Result<usize> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidParameter("ε must be positive".into()));
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let mut k = 1;
    while BigRational::from_integer(BigInt::one() << k) * epsilon <= two {
        k += 1;
    }
    Ok(k)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdPlan {
    #[serde(serialize_with = "crate::serde_exact::ratio")]
    pub alpha: BigRational,
    #[serde(serialize_with = "crate::serde_exact::ratio")]
    pub epsilon: BigRational,
    pub k: usize,
    pub upset: SetSystem,
    /// `|U| / 2^k`.
    #[serde(serialize_with = "crate::serde_exact::ratio")]
    pub beta: BigRational,
    pub threshold: Threshold,
    pub p_approx: f64,
}

impl ThresholdPlan {
    /// `⌊p·n⌋`.
    pub fn prefix_length(&self, n: usize) -> usize {
        let pn = &self.threshold.p * BigRational::from_integer(BigInt::from(n));
        pn.floor().to_integer().to_usize().expect("0 ≤ p·n ≤ n")
    }
}

/// Chooses `k`, the up-set and `p` for target fraction `α` and slack `ε`.
pub fn theorem3_plan(alpha: &BigRational, epsilon: &BigRational) -> Result<ThresholdPlan> {
    if !alpha.is_positive() || alpha >= &BigRational::one() {
        return Err(Error::InvalidParameter(format!("need 0 < α < 1, got {alpha}")));
    }
    if !epsilon.is_positive() || alpha + epsilon > BigRational::one() {
        return Err(Error::InvalidParameter(format!("need ε > 0 and α + ε ≤ 1, got ε = {epsilon}")));
    }
    let k = choose_k(epsilon)?;
    if k > crate::lattice::MAX_N {
        return Err(Error::TooLarge(format!("ε = {epsilon} needs k = {k}")));
    }
    let cube = BigRational::from_integer(BigInt::one() << k);
    // Least |U| with |U|/2^k > α.
    let size = (alpha * &cube).floor().to_integer() + BigInt::one();
    let size = size.to_usize().expect("size ≤ 2^k");
    let beta = BigRational::new(BigInt::from(size), BigInt::one() << k);
    if beta > alpha + epsilon / BigInt::from(2) {
        return Err(Error::Inconsistent(format!("β = {beta} exceeds α + ε/2")));
    }
    let upset = build_upset(k, size)?;
    let threshold = solve_threshold(&upset, alpha, &default_tolerance())?;
    let p_approx = threshold.p_f64();
    Ok(ThresholdPlan { alpha: alpha.clone(), epsilon: epsilon.clone(), k, upset, beta, threshold, p_approx })
}

/// Exact finite-`n` values of the construction for a plan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Realization {
    pub n: usize,
    pub m: usize,
    #[serde(serialize_with = "crate::serde_exact::ratio")]
    pub probability: BigRational,
    #[serde(serialize_with = "crate::serde_exact::count")]
    pub family_size: BigUint,
    /// Absent when `m < k`.
    pub union: Option<UnionReport>,
    /// `(α + ε)·2^n`.
    #[serde(serialize_with = "crate::serde_exact::ratio")]
    pub size_target: BigRational,
    /// `|⋃ I(σ)| ≤ (α + ε)·2^n`.
    pub size_ok: bool,
    /// `|B| ≥ α·n!`.
    pub chains_at_least_alpha: bool,
    /// `|B| ≥ (α − ε)·n!`.
    pub chains_at_least_alpha_minus_epsilon: bool,
}

pub fn realize(plan: &ThresholdPlan, n: usize) -> Result<Realization> {
    if n < plan.k {
        return Err(Error::InvalidParameter(format!("n = {n} is below k = {}", plan.k)));
    }
    let m = plan.prefix_length(n);
    let probability = exact_membership_probability(n, &plan.upset, m)?;
    let family_size = family_size(n, &plan.upset, m)?;
    let union = if m >= plan.k { Some(union_size(n, &plan.upset, m)?) } else { None };
    let size_target = (&plan.alpha + &plan.epsilon) * BigRational::from_integer(BigInt::one() << n);
    let size_ok = union.as_ref().is_some_and(|u| ratio_from_count(&u.exact) <= size_target);
    let nf = ratio_from_count(&factorial(n));
    let fam = ratio_from_count(&family_size);
    Ok(Realization {
        n,
        m,
        probability,
        family_size,
        union,
        size_target,
        size_ok,
        chains_at_least_alpha: fam >= &plan.alpha * &nf,
        chains_at_least_alpha_minus_epsilon: fam >= (&plan.alpha - &plan.epsilon) * nf,
    })
}

/// Least `n ≤ n_max` from which both the size bound and the relaxed chain
/// bound hold for every larger `n` up to `n_max`.
pub fn least_n(plan: &ThresholdPlan, n_max: usize) -> Result<Option<usize>> {
    let mut least = None;
    for n in plan.k..=n_max {
        let r = realize(plan, n)?;
        if r.size_ok && r.chains_at_least_alpha_minus_epsilon {
            least.get_or_insert(n);
        } else {
            least = None;
        }
    }
    Ok(least)
}

/// `|P(σ ∈ B) − f(m/n)|`, the finite-`n` deviation from the limit.
pub fn finite_n_gap(n: usize, upset: &SetSystem, m: usize) -> Result<BigRational> {
    let p = exact_membership_probability(n, upset, m)?;
    let limit = f_eval(upset, &ratio(m as i64, n as i64));
    Ok((p - limit).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u12() -> SetSystem {
        SetSystem::from_sets(2, &[&[1], &[1, 2]]).unwrap()
    }

    #[test]
    fn upset_building() {
        assert_eq!(build_upset(2, 2).unwrap(), u12());
        assert_eq!(build_upset(2, 4).unwrap(), SetSystem::full(2).unwrap());
        assert_eq!(build_upset(3, 1).unwrap(), SetSystem::from_sets(3, &[&[1, 2, 3]]).unwrap());
        assert!(build_upset(3, 0).unwrap().is_empty());
        assert!(build_upset(2, 5).is_err());
        for k in 1..=6 {
            for size in 0..=1 << k {
                let u = build_upset(k, size).unwrap();
                assert_eq!(u.len(), size);
                assert!(is_upset(&u), "k={k} size={size}");
            }
        }
    }

    #[test]
    fn f_examples() {
        let u = u12();
        for (num, den) in [(3, 10), (0, 1), (1, 1), (7, 9)] {
            assert_eq!(f_eval(&u, &ratio(num, den)), ratio(num, den));
        }
        assert_eq!(f_eval(&SetSystem::full(3).unwrap(), &ratio(2, 7)), ratio(1, 1));
        let top = SetSystem::from_sets(2, &[&[1, 2]]).unwrap();
        assert_eq!(f_eval(&top, &ratio(1, 2)), ratio(1, 4));
        assert!((f_eval_f64(&top, 0.3) - 0.09).abs() < 1e-15);
    }

    #[test]
    fn thresholds() {
        let t = solve_threshold(&u12(), &ratio(2, 5), &default_tolerance()).unwrap();
        assert!((t.p_f64() - 0.4).abs() < 1e-12);
        assert!(t.width() <= default_tolerance());

        let top = SetSystem::from_sets(2, &[&[1, 2]]).unwrap();
        let t = solve_threshold(&top, &ratio(1, 8), &default_tolerance()).unwrap();
        assert!((t.p_f64() - (0.125f64).sqrt()).abs() < 1e-12);
        assert!(t.f_at_p < ratio(1, 4));

        let full = SetSystem::full(2).unwrap();
        assert!(solve_threshold(&full, &ratio(1, 1), &default_tolerance()).is_err());
        assert!(solve_threshold(&full, &ratio(1, 2), &default_tolerance()).is_err());
        let not_up = SetSystem::from_sets(2, &[&[1]]).unwrap();
        assert_eq!(solve_threshold(&not_up, &ratio(1, 8), &default_tolerance()), Err(Error::NotUpset));
        assert!(solve_threshold(&u12(), &ratio(0, 1), &default_tolerance()).is_err());
    }

    #[test]
    fn membership_examples() {
        assert_eq!(exact_membership_probability(5, &u12(), 2).unwrap(), ratio(2, 5));
        assert_eq!(membership_probability_by_enumeration(5, &u12(), 2).unwrap(), ratio(2, 5));
        assert_eq!(exact_membership_probability(6, &SetSystem::full(3).unwrap(), 6).unwrap(), ratio(1, 1));
        assert_eq!(exact_membership_probability(6, &build_upset(3, 7).unwrap(), 0).unwrap(), ratio(0, 1));
        assert!(exact_membership_probability(2, &build_upset(3, 2).unwrap(), 1).is_err());
        assert!(exact_membership_probability(5, &u12(), 6).is_err());
    }

    #[test]
    fn family_sizes() {
        assert_eq!(family_size(5, &u12(), 2).unwrap(), BigUint::from(48u32));
        assert_eq!(family_size(6, &SetSystem::full(2).unwrap(), 6).unwrap(), factorial(6));
        assert_eq!(family_size(6, &SetSystem::empty(2).unwrap(), 3).unwrap(), BigUint::zero());
    }

    #[test]
    fn union_examples() {
        let r = union_size(5, &u12(), 2).unwrap();
        assert_eq!(BigUint::from(union_by_enumeration(5, &u12(), 2).unwrap().len()), r.exact);
        assert!(r.holds);
        let full = union_size(6, &SetSystem::full(2).unwrap(), 6).unwrap();
        assert_eq!(full.exact, BigUint::from(64u32));
        assert_eq!(union_size(6, &SetSystem::empty(2).unwrap(), 3).unwrap().exact, BigUint::zero());
        assert!(union_size(6, &u12(), 1).is_err());
    }

    #[test]
    fn k_choice() {
        assert_eq!(choose_k(&ratio(1, 4)).unwrap(), 4);
        assert_eq!(choose_k(&ratio(1, 2)).unwrap(), 3);
        assert_eq!(choose_k(&ratio(2, 1)).unwrap(), 1);
        assert_eq!(choose_k(&ratio(5, 1)).unwrap(), 1);
        assert!(choose_k(&ratio(0, 1)).is_err());
    }

    #[test]
    fn plans() {
        let plan = theorem3_plan(&ratio(1, 2), &ratio(1, 4)).unwrap();
        assert_eq!(plan.k, 4);
        assert_eq!(plan.upset.len(), 9);
        assert_eq!(plan.beta, ratio(9, 16));
        assert!(plan.threshold.p < ratio(1, 2));
        let plan = theorem3_plan(&ratio(1, 2), &ratio(1, 2)).unwrap();
        assert_eq!(plan.k, 3);
        assert!(theorem3_plan(&ratio(1, 1), &ratio(1, 4)).is_err());
        assert!(theorem3_plan(&ratio(1, 2), &ratio(3, 4)).is_err());
    }
}

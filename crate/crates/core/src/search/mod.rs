//! Exact maximisation of `c(A)` over set systems of a given size.
//!
//! By the compression lemma every optimum can be moved to a left-compressed
//! system of the same size with at least as many chains, and any system
//! with a chain contains `∅` and `X`. The default search is restricted to
//! such systems; both restrictions can be switched off.
//!
//! Left-compressed systems are exactly those whose every layer is closed
//! under the moves `S ↦ S ∖ {j} ∪ {j−1}` (for `j ∈ S`, `j−1 ∉ S`), so the
//! restriction is enforced as a per-set prerequisite on those neighbours,
//! each of which precedes the set in (rank, mask) order.

pub(crate) mod engine;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

pub use engine::{CheckpointConfig, WITNESS_CAP};

use crate::compression::is_left_compressed;
use crate::constructions::{best_tower, tower_chain_count, tower_size, TowerChoice};
use crate::count::count_maximal_chains;
use crate::error::{Error, Result};
use crate::exact::factorial_u64;
use crate::lattice::{masks_in_rank_order, SetSystem, SubsetMask};
use crate::sample::random_system;
use engine::{Outcome, Problem, RankedDag, RunConfig};


/// Largest ground size searched without an explicit override.
pub const SEARCH_MAX_N: usize = 7;

/// Hard limit even with the override: path counts must fit in 64 bits.
pub const SEARCH_HARD_MAX_N: usize = 20;

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Only left-compressed systems.
    pub left_compressed: bool,
    /// Only systems containing `∅` and `X`.
    pub require_endpoints: bool,
    /// Exactly two sets in every layer `1 ≤ r ≤ n−1`.
    pub two_per_layer: bool,
    /// Lift the `n ≤ 7` guard.
    pub allow_large: bool,
    /// Seed the incumbent with the best padded tower.
    pub seed_with_towers: bool,
    pub workers: usize,
    pub witness_cap: usize,
    pub checkpoint: Option<CheckpointConfig>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            left_compressed: true,
            require_endpoints: true,
            two_per_layer: false,
            allow_large: false,
            seed_with_towers: true,
            workers: 1,
            witness_cap: WITNESS_CAP,
            checkpoint: None,
        }
    }
}

impl SearchOptions {
    pub fn unrestricted() -> Self {
        SearchOptions { left_compressed: false, require_endpoints: false, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Restrictions {
    pub left_compressed: bool,
    pub endpoints_required: bool,
    pub two_per_layer: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub n: usize,
    pub m: usize,
    #[serde(serialize_with = "crate::serde_exact::count")]
    pub max_chains: BigUint,
    /// Canonical-least optimal systems, at most the witness cap.
    pub witnesses: Vec<SetSystem>,
    /// Exact number of optimal systems in the searched class.
    #[serde(serialize_with = "crate::serde_exact::u64_str")]
    pub witness_count: u64,
    /// Search nodes visited; depends on scheduling when workers > 1.
    pub nodes_explored: u64,
    pub restricted: Restrictions,
}

impl SearchReport {
    /// The report with `nodes_explored` cleared, for comparing runs.
    pub fn without_stats(&self) -> SearchReport {
        SearchReport { nodes_explored: 0, ..self.clone() }
    }
}

fn boolean_dag(n: usize, left_compressed: bool) -> Result<(RankedDag, Vec<SubsetMask>)> {
    let order = masks_in_rank_order(n);
    let mut index_of = vec![0usize; 1 << n];
    for (i, m) in order.iter().enumerate() {
        index_of[m.index()] = i;
    }
    let rank = order.iter().map(|m| m.rank()).collect();
    let preds = order.iter().map(|m| m.elements().map(|e| index_of[m.without(e).index()]).collect()).collect();
    let requires = order
        .iter()
        .map(|m| {
            if !left_compressed {
                return Vec::new();
            }
            m.elements()
                .filter(|&e| e >= 2 && !m.contains(e - 1))
                .map(|e| index_of[m.without(e).with(e - 1).index()])
                .collect()
        })
        .collect();
    Ok((RankedDag::finish(rank, preds, requires)?, order))
}

fn check_instance(n: usize, m: usize, allow_large: bool) -> Result<()> {
    if n == 0 || n > SEARCH_HARD_MAX_N {
        return Err(Error::GroundSize { n, max: SEARCH_HARD_MAX_N });
    }
    if n > SEARCH_MAX_N && !allow_large {
        return Err(Error::TooLarge(format!("n = {n} exceeds {SEARCH_MAX_N}; pass the override to search anyway")));
    }
    if m > 1 << n {
        return Err(Error::InvalidParameter(format!("m = {m} exceeds 2^{n}")));
    }
    Ok(())
}

/// `[1, 2, 2, …, 2, 1]`.
pub fn two_per_layer_quota(n: usize) -> Vec<usize> {
    (0..=n).map(|r| if r == 0 || r == n { 1 } else { 2 }).collect()
}

/// The exact maximum of `c(A)` over systems `A ⊆ P([n])` with `|A| = m`,
/// within the class selected by `options`.
pub fn max_chains(n: usize, m: usize, options: &SearchOptions) -> Result<SearchReport> {
    check_instance(n, m, options.allow_large)?;
    let restricted = Restrictions {
        left_compressed: options.left_compressed,
        endpoints_required: options.require_endpoints,
        two_per_layer: options.two_per_layer,
    };
    let quota = options.two_per_layer.then(|| two_per_layer_quota(n));
    if let Some(q) = &quota {
        if n < 2 || q.iter().sum::<usize>() != m {
            return Err(Error::InvalidParameter(format!("two sets per layer needs n ≥ 2 and m = 2n, got n = {n}, m = {m}")));
        }
    }
    let empty = |nodes| SearchReport {
        n,
        m,
        max_chains: BigUint::zero(),
        witnesses: Vec::new(),
        witness_count: 0,
        nodes_explored: nodes,
        restricted: restricted.clone(),
    };
    // Every maximal chain has n + 1 sets.
    if m < n + 1 {
        return Ok(empty(0));
    }
    let (dag, order) = boolean_dag(n, options.left_compressed)?;
    let lower_bound = if options.seed_with_towers && quota.is_none() {
        best_tower(n, m, false, None).and_then(|t| t.chains.to_u64()).unwrap_or(0)
    } else {
        0
    };
    let problem = Problem { budget: m, force_endpoints: options.require_endpoints, quota };
    let cfg = RunConfig {
        workers: options.workers,
        witness_cap: options.witness_cap,
        lower_bound,
        checkpoint: options.checkpoint.clone(),
        fingerprint: format!(
            "boolean n={n} m={m} left_compressed={} endpoints={} two_per_layer={}",
            options.left_compressed, options.require_endpoints, options.two_per_layer
        ),
    };
    let Outcome { best, count, witnesses, nodes } = engine::run(&dag, &problem, &cfg)?;
    if best == 0 {
        return Ok(empty(nodes));
    }
    let witnesses = witnesses
        .into_iter()
        .map(|items| SetSystem::from_masks(n, items.into_iter().map(|i| order[i])))
        .collect::<Result<Vec<_>>>()?;
    Ok(SearchReport {
        n,
        m,
        max_chains: BigUint::from(best),
        witnesses,
        witness_count: count,
        nodes_explored: nodes,
        restricted,
    })
}

/// Sort key placing systems in canonical order: members listed in (rank, mask)
/// order, compared lexicographically by position in that order.
pub fn canonical_key(system: &SetSystem) -> Vec<(usize, u32)> {
    system.sorted_members().iter().map(|m| (m.rank(), m.bits())).collect()
}

/// Brute force over every `m`-subset of `P([n])`, for checking [`max_chains`].
/// Returns the maximum, the number of optimal systems and all of them in
/// canonical order.
pub fn exhaustive_max_chains(
    n: usize,
    m: usize,
    left_compressed: bool,
    require_endpoints: bool,
) -> Result<(BigUint, u64, Vec<SetSystem>)> {
    if n > 4 {
        return Err(Error::TooLarge(format!("exhaustive enumeration is limited to n ≤ 4, got {n}")));
    }
    check_instance(n, m, false)?;
    let total = 1usize << n;
    let mut best = BigUint::zero();
    let mut winners: Vec<SetSystem> = Vec::new();
    let mut pick: Vec<usize> = (0..m).collect();
    loop {
        let system = SetSystem::from_masks(n, pick.iter().map(|&i| SubsetMask(i as u32)))?;
        let eligible = (!require_endpoints
            || (system.contains(SubsetMask::EMPTY) && system.contains(SubsetMask::full(n))))
            && (!left_compressed || is_left_compressed(&system));
        if eligible {
            let c = count_maximal_chains(&system);
            if c > best {
                best = c.clone();
                winners.clear();
            }
            if c == best && !best.is_zero() {
                winners.push(system);
            }
        }
        // Next m-combination of 0..total.
        let Some(i) = (0..m).rev().find(|&i| pick[i] < total - m + i) else { break };
        pick[i] += 1;
        for k in i + 1..m {
            pick[k] = pick[k - 1] + 1;
        }
    }
    winners.sort_by_key(canonical_key);
    Ok((best, winners.len() as u64, winners))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct T2BoundReport {
    pub n: usize,
    pub samples: usize,
    /// Samples with at least one chain.
    pub with_chains: usize,
    /// Samples meeting `c(A) = 2^{|A|−(n+1)}`.
    pub tight: usize,
    pub violations: Vec<SetSystem>,
}

impl T2BoundReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Whether `c(A) ≤ 2^{|A|−(n+1)}`; trivially true when `c(A) = 0`.
/// Returns `(holds, tight)`.
pub fn check_t2_bound(system: &SetSystem) -> (bool, bool) {
    let c = count_maximal_chains(system);
    if c.is_zero() {
        return (true, false);
    }
    let exponent = system.len() - (system.n() + 1);
    let bound = BigUint::from(1u32) << exponent;
    (c <= bound, c == bound)
}

/// Samples random systems on `n ≤ 8` elements and checks the bound on each.
pub fn verify_t2_bound<R: Rng + ?Sized>(n: usize, samples: usize, rng: &mut R) -> Result<T2BoundReport> {
    if n == 0 || n > 8 {
        return Err(Error::TooLarge(format!("sampling is limited to 1 ≤ n ≤ 8, got {n}")));
    }
    let mut report = T2BoundReport { n, samples, with_chains: 0, tight: 0, violations: Vec::new() };
    for _ in 0..samples {
        let a = random_system(n, rng);
        let (holds, tight) = check_t2_bound(&a);
        if !count_maximal_chains(&a).is_zero() {
            report.with_chains += 1;
        }
        report.tight += tight as usize;
        if !holds {
            report.violations.push(a);
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjectureReport {
    pub block_sizes: Vec<usize>,
    pub m: usize,
    /// `Π t_i!`, the tower's own chain count.
    #[serde(serialize_with = "crate::serde_exact::count")]
    pub tower_chains: BigUint,
    pub search: SearchReport,
    /// The search maximum equals the tower's count.
    pub confirmed: bool,
    /// A system beating the tower, if one exists.
    pub refutation: Option<SetSystem>,
}

/// Compares the maximum over systems of the tower's size with the tower's count.
pub fn verify_generalized_tower_conjecture(block_sizes: &[usize], options: &SearchOptions) -> Result<ConjectureReport> {
    let n: usize = block_sizes.iter().sum();
    let m = tower_size(block_sizes)
        .to_usize()
        .ok_or_else(|| Error::TooLarge("tower size".into()))?;
    let tower_chains = tower_chain_count(block_sizes);
    let search = max_chains(n, m, options)?;
    let confirmed = search.max_chains == tower_chains;
    let refutation = (search.max_chains > tower_chains).then(|| search.witnesses[0].clone());
    Ok(ConjectureReport { block_sizes: block_sizes.to_vec(), m, tower_chains, search, confirmed, refutation })
}

/// The same check for the tower of `t`-cubes on `n` elements.
pub fn verify_tower_conjecture(n: usize, t: usize, options: &SearchOptions) -> Result<ConjectureReport> {
    if t == 0 || t > n || !n.is_multiple_of(t) {
        return Err(Error::InvalidTower(format!("{t} does not divide {n}")));
    }
    verify_generalized_tower_conjecture(&vec![t; n / t], options)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoPerLayerReport {
    pub search: SearchReport,
    /// Tower with blocks of sizes 2 and 3 and exactly `2n` sets, if any.
    pub tower_2_3: Option<TowerChoice>,
    /// Best tower of any block sizes with at most `2n` sets.
    pub best_tower_within: Option<TowerChoice>,
}

/// Maximum of `c(A)` over systems with `∅`, `X` and exactly two sets in each
/// other layer, alongside towers of comparable size.
pub fn two_per_layer_search(n: usize, options: &SearchOptions) -> Result<TwoPerLayerReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("two sets per layer needs n ≥ 2, got {n}")));
    }
    let opts = SearchOptions { two_per_layer: true, ..options.clone() };
    let search = max_chains(n, 2 * n, &opts)?;
    Ok(TwoPerLayerReport {
        search,
        tower_2_3: best_tower(n, 2 * n, true, Some(&[2, 3])),
        best_tower_within: best_tower(n, 2 * n, false, None),
    })
}

/// `n!`, the chain count of the full lattice, as `u64` (n ≤ 20).
pub fn full_chain_count(n: usize) -> Option<u64> {
    factorial_u64(n)
}

//! Named verification suites: exact finite-instance checks of the counting,
//! compression, construction, search, poset and grid layers.

use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compression::compress_system;
use crate::constructions::{generalized_tower, tower_of_cubes};
use crate::count::{check_lemma2, count_maximal_chains, count_maximal_chains_oracle};
use crate::error::{Error, Result};
use crate::exact::{binomial, factorial, ratio};
use crate::fraction::{
    build_upset, default_tolerance, exact_membership_probability, f_eval, family_size,
    membership_probability_by_enumeration, solve_threshold, theorem3_plan, union_by_enumeration, union_size,
};
use crate::grid::{
    anti_diagonal_bound, central_binomial_paths, count_grid_chains, count_grid_chains_oracle,
    grid_exhaustive_max_chains, grid_max_chains, random_grid, GridSystem,
};
use crate::lattice::{SetSystem, SubsetMask};
use crate::poset::{
    all_labeled_posets, count_antichains_oracle, count_linear_extensions_oracle, downset_family, random_poset,
    Poset,
};
use crate::sample::{random_pair, random_system, random_upset};
use crate::search::{exhaustive_max_chains, max_chains, verify_t2_bound, SearchOptions, WITNESS_CAP};

/// Suite names accepted by [`run_suite`], in criterion order.
pub const SUITES: [&str; 10] = [
    "counting",
    "lemma2",
    "towers",
    "compression",
    "search",
    "theorem3",
    "threshold",
    "poset",
    "grid",
    "determinism",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug)]
pub struct VerifyParams {
    /// Random trials per ground size; each suite has its own default.
    pub trials: Option<usize>,
    /// Restrict the sampled ground sizes to this one.
    pub n: Option<usize>,
    pub seed: u64,
    pub workers: usize,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams { trials: None, n: None, seed: 1, workers: 1 }
    }
}

impl VerifyParams {
    fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    fn sizes(&self, default: RangeInclusive<usize>) -> Vec<usize> {
        match self.n {
            Some(n) => vec![n],
            None => default.collect(),
        }
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
    }
}

/// Counts cases and keeps the first few failures.
#[derive(Default)]
struct Tally {
    cases: u64,
    failed: u64,
    examples: Vec<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failed += 1;
            if self.examples.len() < 3 {
                self.examples.push(describe());
            }
        }
    }

    fn finish(self, name: &str) -> Check {
        let passed = self.failed == 0 && self.cases > 0;
        let detail = if passed {
            format!("{} cases", self.cases)
        } else if self.cases == 0 {
            "no cases ran".to_string()
        } else {
            format!("{} of {} failed: {}", self.failed, self.cases, self.examples.join("; "))
        };
        Check { name: name.to_string(), passed, cases: self.cases, detail }
    }
}

fn single(name: &str, ok: bool, detail: impl Into<String>) -> Check {
    Check { name: name.to_string(), passed: ok, cases: 1, detail: detail.into() }
}

pub fn run_suite(name: &str, params: &VerifyParams) -> Result<SuiteReport> {
    let checks = match name {
        "counting" => counting(params)?,
        "lemma2" => lemma2(params)?,
        "towers" => towers()?,
        "compression" => compression(params)?,
        "search" => search(params)?,
        "theorem3" => theorem3()?,
        "threshold" => threshold(params)?,
        "poset" => poset(params)?,
        "grid" => grid(params)?,
        "determinism" => determinism()?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown suite {other:?}; expected one of {}",
                SUITES.join(", ")
            )))
        }
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { suite: name.to_string(), passed, checks })
}

fn all_systems(n: usize) -> impl Iterator<Item = SetSystem> {
    let cells = 1usize << n;
    (0u64..1 << cells).map(move |bits| {
        SetSystem::from_flags(n, (0..cells).map(|i| bits >> i & 1 == 1).collect()).expect("n ≤ 4")
    })
}

fn counting(params: &VerifyParams) -> Result<Vec<Check>> {
    let mut exhaustive = Tally::default();
    let mut random = Tally::default();
    let mut rng = params.rng(1);
    for n in params.sizes(1..=8) {
        if n <= 4 {
            for a in all_systems(n) {
                let oracle = count_maximal_chains_oracle(&a)?;
                exhaustive.record(count_maximal_chains(&a) == oracle, || format!("{a:?}"));
            }
        } else {
            for _ in 0..params.trials(1000) {
                let a = random_system(n, &mut rng);
                let oracle = count_maximal_chains_oracle(&a)?;
                random.record(count_maximal_chains(&a) == oracle, || format!("{a:?}"));
            }
        }
    }
    let mut checks = Vec::new();
    if exhaustive.cases > 0 {
        checks.push(exhaustive.finish("dp equals permutation oracle, every system n ≤ 4"));
    }
    if random.cases > 0 {
        checks.push(random.finish("dp equals permutation oracle, random systems"));
    }
    Ok(checks)
}

fn lemma2(params: &VerifyParams) -> Result<Vec<Check>> {
    let mut tally = Tally::default();
    let mut rng = params.rng(2);
    for n in params.sizes(4..=8) {
        for _ in 0..params.trials(1000) {
            let a = random_system(n, &mut rng);
            let c = count_maximal_chains(&a);
            let integer_form = &c << n <= BigUint::from(a.len()) * factorial(n);
            let check = check_lemma2(&a);
            tally.record(integer_form && check.holds, || format!("{a:?}: c = {c}"));
        }
    }
    Ok(vec![tally.finish("c(A)·2^n ≤ |A|·n!")])
}

fn towers() -> Result<Vec<Check>> {
    let mut tally = Tally::default();
    for blocks in [&[2, 2][..], &[2, 2, 2], &[3, 3], &[2, 3], &[4, 4], &[1, 1, 1, 1]] {
        let t = generalized_tower(blocks)?;
        let size: usize = blocks.iter().map(|&b| (1usize << b) - 1).sum::<usize>() + 1;
        let chains: BigUint = blocks.iter().map(|&b| factorial(b)).product();
        let got = count_maximal_chains(&t);
        tally.record(t.len() == size && got == chains, || {
            format!("{blocks:?}: |T| = {} (want {size}), c = {got} (want {chains})", t.len())
        });
    }
    let mut exponent = Tally::default();
    for n in 1..=12 {
        for t in (1..=n).filter(|t| n % t == 0) {
            let want = factorial(t).pow((n / t) as u32);
            let got = count_maximal_chains(&tower_of_cubes(n, t)?);
            exponent.record(got == want, || format!("n = {n}, t = {t}: c = {got}, (t!)^(n/t) = {want}"));
        }
    }
    Ok(vec![
        tally.finish("tower size and chain count formulas"),
        exponent.finish("tower of t-cubes has (t!)^(n/t) chains"),
    ])
}

fn compression(params: &VerifyParams) -> Result<Vec<Check>> {
    let mut exhaustive = Tally::default();
    let mut random = Tally::default();
    let mut rng = params.rng(4);
    let check = |tally: &mut Tally, a: &SetSystem, i: usize, j: usize| -> Result<()> {
        let c = compress_system(a, i, j)?;
        let ok = c.len() == a.len() && count_maximal_chains(&c) >= count_maximal_chains(a);
        tally.record(ok, || format!("{a:?} with (i, j) = ({i}, {j})"));
        Ok(())
    };
    for n in params.sizes(1..=6) {
        if n <= 3 {
            for a in all_systems(n) {
                for i in 1..=n {
                    for j in (1..=n).filter(|&j| j != i) {
                        check(&mut exhaustive, &a, i, j)?;
                    }
                }
            }
        } else {
            for _ in 0..params.trials(5000) {
                let a = random_system(n, &mut rng);
                let (i, j) = random_pair(n, &mut rng);
                check(&mut random, &a, i, j)?;
            }
        }
    }
    let mut checks = Vec::new();
    if exhaustive.cases > 0 {
        checks.push(exhaustive.finish("C_ij keeps size and never loses chains, every (A, i, j) n ≤ 3"));
    }
    if random.cases > 0 {
        checks.push(random.finish("C_ij keeps size and never loses chains, random (A, i, j)"));
    }
    Ok(checks)
}

fn search(params: &VerifyParams) -> Result<Vec<Check>> {
    let restricted = SearchOptions { workers: params.workers, ..SearchOptions::default() };
    let unrestricted = SearchOptions { workers: params.workers, ..SearchOptions::unrestricted() };
    let mut checks = Vec::new();

    let r = max_chains(4, 7, &restricted)?;
    let t2 = tower_of_cubes(4, 2)?;
    let bound = BigUint::one() << (7 - (4 + 1));
    checks.push(single(
        "max over |A| = 7 in P([4]) is 4 = 2^(|A|-(n+1)), attained by the tower of 2-cubes",
        r.max_chains == BigUint::from(4u32) && r.max_chains == bound && r.witnesses.contains(&t2),
        format!("max {}, {} witnesses", r.max_chains, r.witness_count),
    ));

    let r = max_chains(3, 5, &unrestricted)?;
    let towers = [generalized_tower(&[1, 2])?, generalized_tower(&[2, 1])?];
    checks.push(single(
        "max over |A| = 5 in P([3]) is 2, attained by generalised towers",
        r.max_chains == BigUint::from(2u32) && towers.iter().all(|t| r.witnesses.contains(t)),
        format!("max {}, {} witnesses", r.max_chains, r.witness_count),
    ));

    let mut agree = Tally::default();
    for n in 1..=4 {
        for m in 0..=1usize << n {
            for (opts, lc) in [(&restricted, true), (&unrestricted, false)] {
                let r = max_chains(n, m, opts)?;
                let (best, count, mut all) = exhaustive_max_chains(n, m, lc, lc)?;
                all.truncate(WITNESS_CAP);
                let ok = r.max_chains == best && r.witness_count == count && r.witnesses == all;
                agree.record(ok, || {
                    format!("n = {n}, m = {m}, restricted = {lc}: search {} vs exhaustive {best}", r.max_chains)
                });
            }
        }
    }
    checks.push(agree.finish("branch and bound equals exhaustive enumeration for n ≤ 4, every m"));

    let mut bound = Tally::default();
    let mut rng = params.rng(5);
    for n in params.sizes(4..=8).into_iter().filter(|&n| (1..=8).contains(&n)) {
        let report = verify_t2_bound(n, params.trials(1000), &mut rng)?;
        for _ in 0..report.samples {
            bound.record(true, String::new);
        }
        for v in &report.violations {
            bound.record(false, || format!("{v:?}"));
        }
    }
    checks.push(bound.finish("c(A) ≤ 2^(|A|-(n+1)) on random systems"));
    Ok(checks)
}

fn theorem3() -> Result<Vec<Check>> {
    let u = SetSystem::from_sets(2, &[&[1], &[1, 2]])?;
    let m_of = |n: usize| 2 * n / 5;
    let mut checks = Vec::new();

    let mut prob = Tally::default();
    for n in [5, 10, 15, 20] {
        let m = m_of(n);
        let p = exact_membership_probability(n, &u, m)?;
        prob.record(p == ratio(m as i64, n as i64), || format!("n = {n}: {p}"));
    }
    for n in 5..=8 {
        let m = m_of(n);
        let p = exact_membership_probability(n, &u, m)?;
        let e = membership_probability_by_enumeration(n, &u, m)?;
        prob.record(p == e, || format!("n = {n}: closed form {p}, enumeration {e}"));
    }
    checks.push(prob.finish("membership probability is m/n and matches enumeration"));

    let size = family_size(5, &u, m_of(5))?;
    checks.push(single("family size at n = 5 is 48", size == BigUint::from(48u32), format!("{size}")));

    let mut union = Tally::default();
    for n in [5, 6, 7] {
        let m = m_of(n);
        let exact = union_size(n, &u, m)?.exact;
        let oracle = BigUint::from(union_by_enumeration(n, &u, m)?.len());
        union.record(exact == oracle, || format!("n = {n}: {exact} vs {oracle}"));
    }
    checks.push(union.finish("union size equals enumeration"));

    let mut bound = Tally::default();
    for n in 5..=20 {
        let m = m_of(n);
        let r = union_size(n, &u, m)?;
        let direct = (BigUint::from(u.len()) << (n - 2)) + (0..=m).map(|i| binomial(n, i)).sum::<BigUint>();
        bound.record(r.holds && r.bound == direct && r.exact <= direct, || format!("n = {n}: {} > {direct}", r.exact));
    }
    checks.push(bound.finish("union size ≤ β·2^n + Σ_{i≤m} C(n,i)"));

    let plan = theorem3_plan(&ratio(1, 2), &ratio(1, 4))?;
    let ok = plan.beta > plan.alpha && plan.beta <= &plan.alpha + &plan.epsilon / BigInt::from(2);
    checks.push(single(
        "plan for α = 1/2, ε = 1/4 picks α < β ≤ α + ε/2",
        ok,
        format!("k = {}, β = {}, p ≈ {:.6}", plan.k, plan.beta, plan.p_approx),
    ));
    Ok(checks)
}

fn generated_upsets(params: &VerifyParams) -> Vec<SetSystem> {
    let mut rng = params.rng(7);
    (0..params.trials(50))
        .map(|i| {
            let k = 1 + i % 6;
            if i % 2 == 0 {
                build_upset(k, rng.gen_range(1..1usize << k)).expect("size below 2^k")
            } else {
                random_upset(k, &mut rng)
            }
        })
        .collect()
}

fn threshold(params: &VerifyParams) -> Result<Vec<Check>> {
    let half = ratio(1, 2);
    let grid: Vec<BigRational> = (0..=32).map(|j| ratio(j, 32)).collect();
    let mut beta = Tally::default();
    let mut monotone = Tally::default();
    let mut solved = Tally::default();
    for u in generated_upsets(params) {
        let k = u.n();
        let b = BigRational::new(u.len().into(), (BigUint::one() << k).into());
        let at_half = f_eval(&u, &half);
        beta.record(at_half == b, || format!("{u:?}: f(1/2) = {at_half}, β = {b}"));
        let values: Vec<BigRational> = grid.iter().map(|p| f_eval(&u, p)).collect();
        monotone.record(values.windows(2).all(|w| w[0] <= w[1]), || format!("{u:?}"));
        if u.contains(SubsetMask::EMPTY) {
            continue;
        }
        let alpha = &b / BigInt::from(2);
        let t = solve_threshold(&u, &alpha, &default_tolerance())?;
        let ok = t.width() <= default_tolerance() && t.f_at_p < at_half && t.lo <= t.p && t.p <= t.hi;
        solved.record(ok, || format!("{u:?}: width {}, f(p) = {}", t.width(), t.f_at_p));
    }
    Ok(vec![
        beta.finish("f(1/2) = |U|/2^k"),
        monotone.finish("f is nondecreasing on j/32"),
        solved.finish("threshold bracket ≤ 1e-12 wide with f(p) < f(1/2)"),
    ])
}

fn poset(params: &VerifyParams) -> Result<Vec<Check>> {
    let mut tally = Tally::default();
    let mut compare = |p: &Poset| -> Result<()> {
        let family = downset_family(p);
        let ext = count_linear_extensions_oracle(p)?;
        let anti = count_antichains_oracle(p)?;
        let ok = ext == count_maximal_chains(&family) && anti == BigUint::from(family.len());
        tally.record(ok, || format!("{p:?}"));
        Ok(())
    };
    if params.n.is_none_or(|n| n == 4) {
        for p in all_labeled_posets(4)? {
            compare(&p)?;
        }
    }
    let mut rng = params.rng(8);
    for n in params.sizes(5..=7) {
        if n == 4 {
            continue;
        }
        for _ in 0..params.trials(500) {
            let density = rng.gen_range(0.0..=1.0);
            compare(&random_poset(n, density, &mut rng))?;
        }
    }
    let mut towers = Tally::default();
    for blocks in [&[2, 2][..], &[1, 2], &[2, 1], &[3, 2], &[2, 2, 2], &[1, 1, 1, 1], &[4]] {
        let p = Poset::ordinal_sum_of_antichains(blocks)?;
        towers.record(downset_family(&p) == generalized_tower(blocks)?, || format!("{blocks:?}"));
    }
    Ok(vec![
        tally.finish("linear extensions and antichains match the down-set family"),
        towers.finish("ordinal sums of antichains give generalised towers"),
    ])
}

fn grid(params: &VerifyParams) -> Result<Vec<Check>> {
    let mut full = Tally::default();
    for k in 1..=8 {
        let c = count_grid_chains(&GridSystem::full(k, 2)?);
        full.record(c == central_binomial_paths(k), || format!("k = {k}: {c}"));
    }
    let mut oracle = Tally::default();
    let mut bound = Tally::default();
    let mut rng = params.rng(9);
    for i in 0..params.trials(1000) {
        let k = 1 + i % 4;
        let density = rng.gen_range(0.5..=1.0);
        let g = random_grid(k, 2, density, &mut rng)?;
        oracle.record(count_grid_chains(&g) == count_grid_chains_oracle(&g)?, || format!("{g:?}"));
        bound.record(anti_diagonal_bound(&g).holds, || format!("{g:?}"));
    }
    let mut cube = Tally::default();
    for n in 1..=6 {
        let full = GridSystem::full(2, n)?;
        cube.record(count_grid_chains(&full) == factorial(n), || format!("n = {n}"));
        for _ in 0..50 {
            let a = random_system(n, &mut rng);
            let g = GridSystem::from_set_system(&a);
            cube.record(count_grid_chains(&g) == count_maximal_chains(&a), || format!("{a:?}"));
        }
    }
    let mut search = Tally::default();
    for m in 0..=9 {
        let r = grid_max_chains(3, m, params.workers)?;
        let (best, winners) = grid_exhaustive_max_chains(3, m)?;
        search.record(r.max_chains == best && r.witnesses == winners, || {
            format!("m = {m}: search {} vs exhaustive {best}", r.max_chains)
        });
    }
    Ok(vec![
        full.finish("full [k]^2 has C(2k-2, k-1) chains, k ≤ 8"),
        oracle.finish("dp equals path enumeration on random [k]^2 subsets, k ≤ 4"),
        bound.finish("anti-diagonal bound holds on random [k]^2 subsets"),
        cube.finish("[2]^n count equals the Boolean-lattice count, n ≤ 6"),
        search.finish("grid search on [3]^2 equals exhaustive enumeration, every m"),
    ])
}

fn determinism() -> Result<Vec<Check>> {
    let mut boolean = Tally::default();
    let mut grids = Tally::default();
    let instances: Vec<(usize, usize)> =
        (1..=4).flat_map(|n| (0..=1usize << n).map(move |m| (n, m))).chain([(5, 11), (5, 12), (6, 15)]).collect();
    for (n, m) in instances {
        for base in [SearchOptions::default(), SearchOptions::unrestricted()] {
            if n > 4 && !base.left_compressed {
                continue;
            }
            let reference = max_chains(n, m, &SearchOptions { workers: 1, ..base.clone() })?.without_stats();
            for w in [2, 8] {
                let r = max_chains(n, m, &SearchOptions { workers: w, ..base.clone() })?.without_stats();
                boolean.record(r == reference, || format!("n = {n}, m = {m}, workers = {w}"));
            }
        }
    }
    for k in 2..=4 {
        for m in 0..=k * k {
            let reference = grid_max_chains(k, m, 1)?.without_stats();
            for w in [2, 8] {
                let r = grid_max_chains(k, m, w)?.without_stats();
                grids.record(r == reference, || format!("k = {k}, m = {m}, workers = {w}"));
            }
        }
    }
    Ok(vec![
        boolean.finish("set-system search identical at 1, 2 and 8 workers"),
        grids.finish("grid search identical at 1, 2 and 8 workers"),
    ])
}

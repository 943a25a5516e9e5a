//! Monotone chains in the grid `[k]^n` and the exhaustive `[k]²` extremal table.
//!
//! A maximal chain runs from `(1,…,1)` to `(k,…,k)` through `n(k−1)+1`
//! points, each obtained from its predecessor by adding 1 to one coordinate.
//! For `k = 2` the grid is the Boolean lattice: point `c` is the set
//! `{i : c_i = 2}` and its cell index equals the subset mask.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{binomial, factorial};
use crate::lattice::SetSystem;
use crate::search::engine::{self, Outcome, Problem, RankedDag, RunConfig};
use crate::search::WITNESS_CAP;

/// Largest grid (number of cells) held in memory.
pub const GRID_MAX_CELLS: usize = 1 << 26;

/// Largest side length for [`grid_max_chains`].
pub const GRID_SEARCH_MAX_K: usize = 5;

/// A subset of `[k]^n`, one flag per point; coordinate 1 is the least
/// significant digit of the cell index.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GridSystem {
    k: usize,
    n: usize,
    cells: Vec<bool>,
}

fn cell_count(k: usize, n: usize) -> Result<usize> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("grid needs k ≥ 1 and n ≥ 1, got k = {k}, n = {n}")));
    }
    (0..n)
        .try_fold(1usize, |acc, _| acc.checked_mul(k).filter(|&c| c <= GRID_MAX_CELLS))
        .ok_or_else(|| Error::TooLarge(format!("[{k}]^{n} exceeds {GRID_MAX_CELLS} cells")))
}

impl GridSystem {
    pub fn empty(k: usize, n: usize) -> Result<GridSystem> {
        Ok(GridSystem { k, n, cells: vec![false; cell_count(k, n)?] })
    }

    pub fn full(k: usize, n: usize) -> Result<GridSystem> {
        Ok(GridSystem { k, n, cells: vec![true; cell_count(k, n)?] })
    }

    pub fn from_flags(k: usize, n: usize, cells: Vec<bool>) -> Result<GridSystem> {
        if cells.len() != cell_count(k, n)? {
            return Err(Error::InvalidParameter(format!("expected {} flags for [{k}]^{n}", k.pow(n as u32))));
        }
        Ok(GridSystem { k, n, cells })
    }

    pub fn from_points<P: AsRef<[usize]>>(k: usize, n: usize, points: &[P]) -> Result<GridSystem> {
        let mut g = GridSystem::empty(k, n)?;
        for p in points {
            let i = g.index_of(p.as_ref())?;
            g.cells[i] = true;
        }
        Ok(g)
    }

    /// The Boolean lattice as `[2]^n`.
    pub fn from_set_system(system: &SetSystem) -> GridSystem {
        GridSystem { k: 2, n: system.n(), cells: system.flags().to_vec() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index_of(&self, point: &[usize]) -> Result<usize> {
        if point.len() != self.n {
            return Err(Error::InvalidParameter(format!("point {point:?} does not have {} coordinates", self.n)));
        }
        let mut index = 0;
        for &c in point.iter().rev() {
            if c == 0 || c > self.k {
                return Err(Error::ElementOutOfRange { element: c, n: self.k });
            }
            index = index * self.k + (c - 1);
        }
        Ok(index)
    }

    pub fn point_of(&self, mut index: usize) -> Vec<usize> {
        (0..self.n)
            .map(|_| {
                let c = index % self.k + 1;
                index /= self.k;
                c
            })
            .collect()
    }

    pub fn contains(&self, point: &[usize]) -> bool {
        self.index_of(point).is_ok_and(|i| self.cells[i])
    }

    pub fn insert(&mut self, point: &[usize]) -> Result<bool> {
        let i = self.index_of(point)?;
        Ok(!std::mem::replace(&mut self.cells[i], true))
    }

    /// Points in ascending cell index.
    pub fn points(&self) -> Vec<Vec<usize>> {
        (0..self.cells.len()).filter(|&i| self.cells[i]).map(|i| self.point_of(i)).collect()
    }

    /// Reflection swapping the first two coordinates.
    pub fn transpose(&self) -> GridSystem {
        assert!(self.n >= 2, "transpose needs two coordinates");
        let mut out = GridSystem { k: self.k, n: self.n, cells: vec![false; self.cells.len()] };
        for mut p in self.points() {
            p.swap(0, 1);
            let i = out.index_of(&p).expect("same grid");
            out.cells[i] = true;
        }
        out
    }

    /// Rank of a cell: its distance from `(1,…,1)`.
    fn rank(&self, index: usize) -> usize {
        self.point_of(index).iter().map(|c| c - 1).sum()
    }
}

impl fmt::Debug for GridSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GridSystem(k={}, n={}, {:?})", self.k, self.n, self.points())
    }
}

impl Serialize for GridSystem {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("GridSystem", 3)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("points", &self.points())?;
        st.end()
    }
}

/// Number of maximal chains of `[k]^n` lying inside `grid`.
pub fn count_grid_chains(grid: &GridSystem) -> BigUint {
    match grid_paths_u64(grid) {
        Some(c) => BigUint::from(c),
        None => grid_paths_big(grid),
    }
}

/// Strides of each coordinate in the cell index.
fn strides(k: usize, n: usize) -> Vec<usize> {
    (0..n).map(|i| k.pow(i as u32)).collect()
}

fn grid_paths_u64(grid: &GridSystem) -> Option<u64> {
    let stride = strides(grid.k, grid.n);
    let mut paths = vec![0u64; grid.cells.len()];
    for v in 0..grid.cells.len() {
        if !grid.cells[v] {
            continue;
        }
        if v == 0 {
            paths[0] = 1;
            continue;
        }
        let mut total = 0u64;
        for &s in &stride {
            if (v / s) % grid.k > 0 {
                total = total.checked_add(paths[v - s])?;
            }
        }
        paths[v] = total;
    }
    paths.last().copied()
}

fn grid_paths_big(grid: &GridSystem) -> BigUint {
    let stride = strides(grid.k, grid.n);
    let mut paths = vec![BigUint::zero(); grid.cells.len()];
    for v in 0..grid.cells.len() {
        if !grid.cells[v] {
            continue;
        }
        if v == 0 {
            paths[0] = BigUint::one();
            continue;
        }
        let mut total = BigUint::zero();
        for &s in &stride {
            if (v / s) % grid.k > 0 {
                total += &paths[v - s];
            }
        }
        paths[v] = total;
    }
    paths.pop().unwrap_or_default()
}

/// Largest number of monotone paths [`count_grid_chains_oracle`] will list.
pub const GRID_ORACLE_MAX_PATHS: u64 = 1 << 20;

/// Counts chains by listing every monotone path of `[k]^n` and testing
/// each of its points for membership.
pub fn count_grid_chains_oracle(grid: &GridSystem) -> Result<BigUint> {
    let total = multinomial(&vec![grid.k - 1; grid.n]);
    if total > BigUint::from(GRID_ORACLE_MAX_PATHS) {
        return Err(Error::TooLarge(format!("[{}]^{} has {total} monotone paths", grid.k, grid.n)));
    }
    let steps = grid.n * (grid.k - 1);
    let mut count = 0u64;
    let mut path = Vec::with_capacity(steps);
    list_paths(grid, &mut vec![0; grid.n], &mut path, steps, &mut count);
    Ok(BigUint::from(count))
}

fn list_paths(grid: &GridSystem, used: &mut Vec<usize>, path: &mut Vec<usize>, steps: usize, count: &mut u64) {
    if path.len() == steps {
        let mut point = vec![1; grid.n];
        let mut inside = grid.contains(&point);
        for &dir in path.iter() {
            point[dir] += 1;
            inside &= grid.contains(&point);
        }
        *count += inside as u64;
        return;
    }
    for dir in 0..grid.n {
        if used[dir] < grid.k - 1 {
            used[dir] += 1;
            path.push(dir);
            list_paths(grid, used, path, steps, count);
            path.pop();
            used[dir] -= 1;
        }
    }
}

fn multinomial(parts: &[usize]) -> BigUint {
    let total: usize = parts.iter().sum();
    parts.iter().fold(factorial(total), |acc, &p| acc / factorial(p))
}

/// Number of maximal chains of the full grid through `point`.
pub fn paths_through(k: usize, point: &[usize]) -> BigUint {
    let before: Vec<usize> = point.iter().map(|c| c - 1).collect();
    let after: Vec<usize> = point.iter().map(|c| k - c).collect();
    multinomial(&before) * multinomial(&after)
}

/// The full `[k]^n` count, `(n(k−1))! / ((k−1)!)^n`; for `n = 2` this is `C(2k−2, k−1)`.
pub fn full_grid_count(k: usize, n: usize) -> BigUint {
    multinomial(&vec![k - 1; n])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AntiDiagonalBound {
    #[serde(serialize_with = "crate::serde_exact::count")]
    pub chains: BigUint,
    /// `min_d Σ_{v ∈ G, |v| = d} paths_through(v)`.
    #[serde(serialize_with = "crate::serde_exact::count")]
    pub bound: BigUint,
    /// The anti-diagonal (rank) attaining the minimum.
    pub tightest: usize,
    pub holds: bool,
}

/// Each chain meets every anti-diagonal exactly once, so the chains inside
/// `G` are at most the full-grid chains through the cells of `G` on any one
/// anti-diagonal.
pub fn anti_diagonal_bound(grid: &GridSystem) -> AntiDiagonalBound {
    let ranks = grid.n * (grid.k - 1) + 1;
    let mut sums = vec![BigUint::zero(); ranks];
    for (i, &present) in grid.cells.iter().enumerate() {
        if present {
            sums[grid.rank(i)] += paths_through(grid.k, &grid.point_of(i));
        }
    }
    let (tightest, bound) = sums.into_iter().enumerate().min_by(|a, b| a.1.cmp(&b.1)).expect("at least one rank");
    let chains = count_grid_chains(grid);
    let holds = chains <= bound;
    AntiDiagonalBound { chains, bound, tightest, holds }
}

/// A uniformly random subset of `[k]^n` with each cell present with probability `density`.
pub fn random_grid<R: Rng + ?Sized>(k: usize, n: usize, density: f64, rng: &mut R) -> Result<GridSystem> {
    let cells = (0..cell_count(k, n)?).map(|_| rng.gen_bool(density)).collect();
    GridSystem::from_flags(k, n, cells)
}

/// Parses the grid text format: `k n`, then one point per line.
pub fn parse_grid(input: &str) -> Result<GridSystem> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (first_no, first) = lines.next().ok_or(Error::Parse { line: 1, message: "missing `k n` header".into() })?;
    let header: Vec<usize> = first
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse { line: first_no, message: format!("expected `k n`, found {first:?}") })?;
    let [k, n] = header[..] else {
        return Err(Error::Parse { line: first_no, message: format!("expected `k n`, found {first:?}") });
    };
    let mut grid = GridSystem::empty(k, n)?;
    for (no, line) in lines {
        let point: Vec<usize> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse { line: no, message: format!("expected coordinates, found {line:?}") })?;
        match grid.insert(&point) {
            Ok(true) => {}
            Ok(false) => return Err(Error::Parse { line: no, message: format!("duplicate point {line:?}") }),
            Err(e) => return Err(Error::Parse { line: no, message: e.to_string() }),
        }
    }
    Ok(grid)
}

pub fn grid_to_text(grid: &GridSystem) -> String {
    let mut out = format!("{} {}\n", grid.k, grid.n);
    for p in grid.points() {
        let coords: Vec<String> = p.iter().map(ToString::to_string).collect();
        out.push_str(&coords.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridSearchReport {
    pub k: usize,
    pub m: usize,
    #[serde(serialize_with = "crate::serde_exact::count")]
    pub max_chains: BigUint,
    /// Optimal systems in canonical order, at most the witness cap.
    pub witnesses: Vec<GridSystem>,
    /// Exact number of optimal systems.
    #[serde(serialize_with = "crate::serde_exact::u64_str")]
    pub witness_count: u64,
    /// One system per transpose orbit among `witnesses`.
    pub representatives: Vec<GridSystem>,
    pub nodes_explored: u64,
}

impl GridSearchReport {
    pub fn without_stats(&self) -> GridSearchReport {
        GridSearchReport { nodes_explored: 0, ..self.clone() }
    }
}

/// `[k]²` as a ranked DAG; items in (rank, cell index) order.
fn grid_dag(k: usize) -> Result<(RankedDag, Vec<usize>)> {
    let shape = GridSystem::empty(k, 2)?;
    let mut order: Vec<usize> = (0..k * k).collect();
    order.sort_by_key(|&i| (shape.rank(i), i));
    let mut item_of = vec![0; k * k];
    for (item, &cell) in order.iter().enumerate() {
        item_of[cell] = item;
    }
    let rank = order.iter().map(|&c| shape.rank(c)).collect();
    let preds = order
        .iter()
        .map(|&c| {
            let mut p = Vec::new();
            if c % k > 0 {
                p.push(item_of[c - 1]);
            }
            if c / k > 0 {
                p.push(item_of[c - k]);
            }
            p
        })
        .collect();
    Ok((RankedDag::finish(rank, preds, vec![Vec::new(); k * k])?, order))
}

/// Sort key for grid systems: cells in (rank, index) order.
fn grid_key(g: &GridSystem) -> Vec<(usize, usize)> {
    let mut key: Vec<(usize, usize)> =
        (0..g.cells.len()).filter(|&i| g.cells[i]).map(|i| (g.rank(i), i)).collect();
    key.sort();
    key
}

fn transpose_representatives(witnesses: &[GridSystem]) -> Vec<GridSystem> {
    let mut reps: Vec<GridSystem> = witnesses
        .iter()
        .map(|w| {
            let t = w.transpose();
            if grid_key(&t) < grid_key(w) { t } else { w.clone() }
        })
        .collect();
    reps.sort_by_key(grid_key);
    reps.dedup();
    reps
}

/// The exact maximum of `count_grid_chains` over `m`-cell subsets of `[k]²`.
pub fn grid_max_chains(k: usize, m: usize, workers: usize) -> Result<GridSearchReport> {
    if k == 0 || k > GRID_SEARCH_MAX_K {
        return Err(Error::TooLarge(format!("grid search needs 1 ≤ k ≤ {GRID_SEARCH_MAX_K}, got {k}")));
    }
    if m > k * k {
        return Err(Error::InvalidParameter(format!("m = {m} exceeds {} cells", k * k)));
    }
    let empty = |nodes| GridSearchReport {
        k,
        m,
        max_chains: BigUint::zero(),
        witnesses: Vec::new(),
        witness_count: 0,
        representatives: Vec::new(),
        nodes_explored: nodes,
    };
    if m < 2 * k - 1 {
        return Ok(empty(0));
    }
    let (dag, order) = grid_dag(k)?;
    let problem = Problem { budget: m, force_endpoints: true, quota: None };
    let cfg = RunConfig {
        workers,
        witness_cap: WITNESS_CAP,
        lower_bound: 0,
        checkpoint: None,
        fingerprint: format!("grid k={k} m={m}"),
    };
    let Outcome { best, count, witnesses, nodes } = engine::run(&dag, &problem, &cfg)?;
    if best == 0 {
        return Ok(empty(nodes));
    }
    let witnesses = witnesses
        .into_iter()
        .map(|items| {
            let mut cells = vec![false; k * k];
            for i in items {
                cells[order[i]] = true;
            }
            GridSystem::from_flags(k, 2, cells)
        })
        .collect::<Result<Vec<_>>>()?;
    let representatives = transpose_representatives(&witnesses);
    Ok(GridSearchReport {
        k,
        m,
        max_chains: BigUint::from(best),
        witnesses,
        witness_count: count,
        representatives,
        nodes_explored: nodes,
    })
}

/// Brute force over every `m`-cell subset of `[k]²` (k ≤ 4).
pub fn grid_exhaustive_max_chains(k: usize, m: usize) -> Result<(BigUint, Vec<GridSystem>)> {
    if k == 0 || k > 4 || m > k * k {
        return Err(Error::TooLarge(format!("exhaustive grid enumeration needs 1 ≤ k ≤ 4 and m ≤ k², got k = {k}, m = {m}")));
    }
    let cells = k * k;
    let mut best = BigUint::zero();
    let mut winners = Vec::new();
    for bits in 0u32..1 << cells {
        if bits.count_ones() as usize != m {
            continue;
        }
        let g = GridSystem::from_flags(k, 2, (0..cells).map(|i| bits >> i & 1 == 1).collect())?;
        let c = count_grid_chains(&g);
        if c > best {
            best = c.clone();
            winners.clear();
        }
        if c == best && !best.is_zero() {
            winners.push(g);
        }
    }
    winners.sort_by_key(grid_key);
    Ok((best, winners))
}

/// `C(2k−2, k−1)`.
pub fn central_binomial_paths(k: usize) -> BigUint {
    binomial(2 * k - 2, k - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count::count_maximal_chains;
    use crate::sample::random_system_with_density;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn indexing() {
        let g = GridSystem::empty(3, 2).unwrap();
        assert_eq!(g.index_of(&[1, 1]).unwrap(), 0);
        assert_eq!(g.index_of(&[2, 1]).unwrap(), 1);
        assert_eq!(g.index_of(&[1, 2]).unwrap(), 3);
        assert_eq!(g.point_of(5), vec![3, 2]);
        assert!(g.index_of(&[4, 1]).is_err());
        assert!(g.index_of(&[1]).is_err());
    }

    #[test]
    fn examples() {
        assert_eq!(count_grid_chains(&GridSystem::full(3, 2).unwrap()), BigUint::from(6u32));
        let mut g = GridSystem::full(3, 2).unwrap();
        g.cells[0] = false;
        assert_eq!(count_grid_chains(&g), BigUint::zero());
        for k in 1..=8 {
            assert_eq!(count_grid_chains(&GridSystem::full(k, 2).unwrap()), central_binomial_paths(k));
            assert_eq!(full_grid_count(k, 2), central_binomial_paths(k));
        }
        assert_eq!(count_grid_chains(&GridSystem::full(3, 3).unwrap()), BigUint::from(90u32));
    }

    #[test]
    fn big_counts_switch_precision() {
        let g = GridSystem::full(40, 2).unwrap();
        assert_eq!(count_grid_chains(&g), central_binomial_paths(40));
        assert!(grid_paths_u64(&g).is_none());
    }

    #[test]
    fn boolean_cube() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=6 {
            assert_eq!(count_grid_chains(&GridSystem::full(2, n).unwrap()), factorial(n));
            for _ in 0..20 {
                let s = random_system_with_density(n, 0.7, &mut rng);
                assert_eq!(count_grid_chains(&GridSystem::from_set_system(&s)), count_maximal_chains(&s));
            }
        }
    }

    #[test]
    fn dp_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (k, n) in [(2, 2), (3, 2), (4, 2), (3, 3), (2, 4)] {
            for _ in 0..30 {
                let g = random_grid(k, n, 0.8, &mut rng).unwrap();
                assert_eq!(count_grid_chains(&g), count_grid_chains_oracle(&g).unwrap());
                assert!(anti_diagonal_bound(&g).holds);
            }
        }
        assert!(count_grid_chains_oracle(&GridSystem::full(20, 2).unwrap()).is_err());
    }

    #[test]
    fn bound_is_tight_on_full_grid() {
        let b = anti_diagonal_bound(&GridSystem::full(4, 2).unwrap());
        assert_eq!(b.bound, b.chains);
    }

    #[test]
    fn search_examples() {
        let r = grid_max_chains(2, 4, 1).unwrap();
        assert_eq!(r.max_chains, BigUint::from(2u32));
        assert_eq!(r.witnesses, vec![GridSystem::full(2, 2).unwrap()]);
        assert_eq!(grid_max_chains(3, 9, 1).unwrap().max_chains, BigUint::from(6u32));
        assert_eq!(grid_max_chains(3, 4, 1).unwrap().max_chains, BigUint::zero());
        assert!(grid_max_chains(6, 10, 1).is_err());
    }

    #[test]
    fn search_matches_brute_force() {
        for k in 1..=3 {
            for m in 0..=k * k {
                let r = grid_max_chains(k, m, 2).unwrap();
                let (best, winners) = grid_exhaustive_max_chains(k, m).unwrap();
                assert_eq!(r.max_chains, best, "k={k} m={m}");
                assert_eq!(r.witnesses, winners, "k={k} m={m}");
                assert_eq!(r.witness_count, winners.len() as u64);
            }
        }
    }

    #[test]
    fn witnesses_closed_under_transpose() {
        for m in 5..=9 {
            let r = grid_max_chains(3, m, 1).unwrap();
            let mut transposed: Vec<GridSystem> = r.witnesses.iter().map(GridSystem::transpose).collect();
            transposed.sort_by_key(grid_key);
            assert_eq!(transposed, r.witnesses);
            assert!(r.representatives.len() * 2 >= r.witnesses.len());
        }
    }

    #[test]
    fn text_format() {
        let g = parse_grid("3 2\n1 1\n2 1\n2 2\n3 2\n3 3\n").unwrap();
        assert_eq!(count_grid_chains(&g), BigUint::one());
        assert_eq!(parse_grid(&grid_to_text(&g)).unwrap(), g);
        assert!(parse_grid("3 2\n1 1\n1 1\n").is_err());
        assert!(parse_grid("3 2\n4 1\n").is_err());
        assert!(parse_grid("3\n").is_err());
    }
}

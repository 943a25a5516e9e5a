//! Branch-and-bound over subfamilies of a graded DAG with a unique source
//! and sink: choose exactly `budget` items so as to maximise the number of
//! source→sink paths inside the chosen items.
//!
//! Items are decided one at a time in a fixed topological order (rank, then
//! index), include-first, so leaves are reached in lexicographic order of
//! their sorted item lists. Path counts are maintained incrementally: when an
//! item is decided all of its predecessors already are.
//!
//! Pruning is strict (`bound < incumbent`), so every optimal family is
//! reached no matter how the incumbent evolves. That makes the optimum, the
//! number of optimal families and the canonical-least witnesses independent
//! of the number of workers and of the order in which subtrees finish.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of witnesses retained.
pub const WITNESS_CAP: usize = 100;

/// Target number of independent subtrees handed to workers.
const TASK_TARGET: usize = 256;

/// A graded DAG, items sorted by rank. Item 0 is the source, the last item the sink.
#[derive(Clone, Debug)]
pub(crate) struct RankedDag {
    pub rank: Vec<usize>,
    pub preds: Vec<Vec<usize>>,
    /// Items that must already be chosen before this one may be chosen.
    pub requires: Vec<Vec<usize>>,
    /// Paths from the item to the sink in the full DAG.
    pub completions: Vec<u64>,
    /// Paths through the item in the full DAG.
    pub through: Vec<u64>,
    /// `rank_start[r]..rank_start[r + 1]` are the items of rank `r`.
    pub rank_start: Vec<usize>,
}

impl RankedDag {
    /// Fills `completions`, `through` and `rank_start` from `rank` and `preds`.
    /// Fails if the number of full source→sink paths overflows `u64`.
    pub fn finish(rank: Vec<usize>, preds: Vec<Vec<usize>>, requires: Vec<Vec<usize>>) -> Result<RankedDag> {
        let len = rank.len();
        debug_assert!(rank.windows(2).all(|w| w[0] <= w[1]));
        let overflow = || Error::TooLarge("path counts exceed 64 bits".into());
        let mut from_source = vec![0u64; len];
        from_source[0] = 1;
        for v in 1..len {
            from_source[v] = preds[v]
                .iter()
                .try_fold(0u64, |acc, &u| acc.checked_add(from_source[u]))
                .ok_or_else(overflow)?;
        }
        let mut completions = vec![0u64; len];
        completions[len - 1] = 1;
        for v in (0..len).rev() {
            for &u in &preds[v] {
                completions[u] = completions[u].checked_add(completions[v]).ok_or_else(overflow)?;
            }
        }
        let through = (0..len)
            .map(|v| from_source[v].checked_mul(completions[v]).ok_or_else(overflow))
            .collect::<Result<Vec<_>>>()?;
        let ranks = rank[len - 1] + 1;
        let rank_start = (0..=ranks).map(|r| rank.partition_point(|&x| x < r)).collect();
        Ok(RankedDag { rank, preds, requires, completions, through, rank_start })
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn ranks(&self) -> usize {
        self.rank_start.len() - 1
    }

    pub fn sink(&self) -> usize {
        self.len() - 1
    }
}

/// What to search for.
#[derive(Clone, Debug)]
pub(crate) struct Problem {
    pub budget: usize,
    pub force_endpoints: bool,
    /// Exact number of items to choose in each rank.
    pub quota: Option<Vec<usize>>,
}

/// Where and how often to checkpoint.
#[derive(Clone, Debug)]
pub struct CheckpointConfig {
    pub path: PathBuf,
    /// Write after this many finished subtrees.
    pub interval: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct RunConfig {
    pub workers: usize,
    pub witness_cap: usize,
    /// A value known to be attainable; seeds the incumbent.
    pub lower_bound: u64,
    pub checkpoint: Option<CheckpointConfig>,
    /// Identifies the instance inside checkpoint files.
    pub fingerprint: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct Outcome {
    pub best: u64,
    /// Number of families attaining `best` (zero when `best` is zero).
    pub count: u64,
    /// Canonical-least optimal families, as sorted item lists.
    pub witnesses: Vec<Vec<usize>>,
    pub nodes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TaskResult {
    task: usize,
    #[serde(flatten)]
    outcome: Outcome,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointFile {
    fingerprint: String,
    tasks: usize,
    completed: Vec<TaskResult>,
}

/// A subtree root: the first `pos` items decided, `chosen` of them included.
#[derive(Clone, Debug)]
struct Task {
    pos: usize,
    chosen: Vec<usize>,
}

/// Per-rank sorted prefix sums of `through`, largest first.
struct FutureBounds {
    prefix: Vec<Vec<u64>>,
}

impl FutureBounds {
    fn new(dag: &RankedDag) -> FutureBounds {
        let prefix = (0..dag.ranks())
            .map(|r| {
                let mut vals: Vec<u64> = dag.through[dag.rank_start[r]..dag.rank_start[r + 1]].to_vec();
                vals.sort_unstable_by(|a, b| b.cmp(a));
                let mut acc = vec![0u64];
                for v in vals {
                    acc.push(acc.last().unwrap().saturating_add(v));
                }
                acc
            })
            .collect();
        FutureBounds { prefix }
    }
}

struct Walker<'a> {
    dag: &'a RankedDag,
    problem: &'a Problem,
    future: &'a FutureBounds,
    included: Vec<bool>,
    paths: Vec<u64>,
    in_rank: Vec<usize>,
    /// Σ paths·completions over chosen items of each rank.
    through_rank: Vec<u64>,
    used: usize,
    scratch: Vec<u64>,
}

impl<'a> Walker<'a> {
    fn new(dag: &'a RankedDag, problem: &'a Problem, future: &'a FutureBounds) -> Walker<'a> {
        Walker {
            dag,
            problem,
            future,
            included: vec![false; dag.len()],
            paths: vec![0; dag.len()],
            in_rank: vec![0; dag.ranks()],
            through_rank: vec![0; dag.ranks()],
            used: 0,
            scratch: Vec::new(),
        }
    }

    fn rank_end(&self, pos: usize) -> usize {
        self.dag.rank_start[self.dag.rank[pos] + 1]
    }

    fn is_endpoint(&self, pos: usize) -> bool {
        pos == 0 || pos == self.dag.sink()
    }

    fn can_include(&self, pos: usize) -> bool {
        if self.used >= self.problem.budget {
            return false;
        }
        if let Some(q) = &self.problem.quota {
            if self.in_rank[self.dag.rank[pos]] >= q[self.dag.rank[pos]] {
                return false;
            }
        }
        self.dag.requires[pos].iter().all(|&u| self.included[u])
    }

    fn can_exclude(&self, pos: usize) -> bool {
        if self.problem.force_endpoints && self.is_endpoint(pos) {
            return false;
        }
        if let Some(q) = &self.problem.quota {
            let r = self.dag.rank[pos];
            let left_after = self.rank_end(pos) - pos - 1;
            if self.in_rank[r] + left_after < q[r] {
                return false;
            }
        }
        true
    }

    fn potential(&self, pos: usize) -> u64 {
        if pos == 0 {
            1
        } else {
            self.dag.preds[pos].iter().map(|&u| self.paths[u]).sum()
        }
    }

    fn include(&mut self, pos: usize) {
        let p = self.potential(pos);
        let r = self.dag.rank[pos];
        self.included[pos] = true;
        self.paths[pos] = p;
        self.in_rank[r] += 1;
        self.through_rank[r] += p * self.dag.completions[pos];
        self.used += 1;
    }

    fn undo_include(&mut self, pos: usize) {
        let r = self.dag.rank[pos];
        self.through_rank[r] -= self.paths[pos] * self.dag.completions[pos];
        self.included[pos] = false;
        self.paths[pos] = 0;
        self.in_rank[r] -= 1;
        self.used -= 1;
    }

    fn feasible(&self, pos: usize) -> bool {
        self.problem.budget - self.used <= self.dag.len() - pos
    }

    /// An upper bound on the sink's path count over all completions of the
    /// current partial choice, when the next item to decide is `pos`.
    fn bound(&mut self, pos: usize) -> u64 {
        let dag = self.dag;
        let r = dag.rank[pos];
        let budget_left = self.problem.budget - self.used;
        let mut best = u64::MAX;
        if r > 0 {
            best = best.min(self.through_rank[r - 1]);
        }
        // Chains through rank r: chosen items exactly, undecided ones by potential.
        let end = self.rank_end(pos);
        self.scratch.clear();
        for v in pos..end {
            if dag.requires[v].iter().any(|&u| u < pos && !self.included[u]) {
                continue;
            }
            let pot = self.potential(v);
            if pot > 0 {
                self.scratch.push(pot * dag.completions[v]);
            }
        }
        let take = match &self.problem.quota {
            Some(q) => budget_left.min(q[r] - self.in_rank[r]),
            None => budget_left,
        };
        if self.scratch.len() > take {
            self.scratch.sort_unstable_by(|a, b| b.cmp(a));
            self.scratch.truncate(take);
        }
        let current: u64 = self.through_rank[r] + self.scratch.iter().sum::<u64>();
        best = best.min(current);
        for later in r + 1..dag.ranks() {
            let cap = match &self.problem.quota {
                Some(q) => q[later],
                None => budget_left,
            };
            let sums = &self.future.prefix[later];
            best = best.min(sums[cap.min(sums.len() - 1)]);
        }
        best
    }

    fn quotas_met(&self) -> bool {
        match &self.problem.quota {
            Some(q) => q.iter().zip(&self.in_rank).all(|(want, have)| want == have),
            None => true,
        }
    }
}

struct Collector<'a> {
    incumbent: &'a AtomicU64,
    cap: usize,
    outcome: Outcome,
}

impl Collector<'_> {
    fn record(&mut self, value: u64, included: &[bool]) {
        if value == 0 || value < self.incumbent.load(Ordering::Relaxed) || value < self.outcome.best {
            return;
        }
        self.incumbent.fetch_max(value, Ordering::Relaxed);
        if value > self.outcome.best {
            self.outcome.best = value;
            self.outcome.count = 0;
            self.outcome.witnesses.clear();
        }
        self.outcome.count += 1;
        if self.outcome.witnesses.len() < self.cap {
            self.outcome
                .witnesses
                .push(included.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect());
        }
    }
}

fn dfs(w: &mut Walker<'_>, pos: usize, col: &mut Collector<'_>) {
    col.outcome.nodes += 1;
    if !w.feasible(pos) {
        return;
    }
    let n_items = w.dag.len();
    if w.used == w.problem.budget {
        // Everything left is excluded.
        let sink = w.dag.sink();
        if w.problem.force_endpoints && !w.included[sink] {
            return;
        }
        if !w.quotas_met() {
            return;
        }
        let value = if w.included[sink] { w.paths[sink] } else { 0 };
        col.record(value, &w.included);
        return;
    }
    if pos == n_items {
        if w.quotas_met() {
            let sink = w.dag.sink();
            col.record(w.paths[sink], &w.included);
        }
        return;
    }
    let incumbent = col.incumbent.load(Ordering::Relaxed).max(col.outcome.best);
    if incumbent > 0 && w.bound(pos) < incumbent {
        return;
    }
    if w.can_include(pos) {
        w.include(pos);
        dfs(w, pos + 1, col);
        w.undo_include(pos);
    }
    if w.can_exclude(pos) {
        dfs(w, pos + 1, col);
    }
}

/// Enumerates subtree roots at the first depth producing at least
/// [`TASK_TARGET`] of them, without any bound-based pruning.
fn make_tasks(dag: &RankedDag, problem: &Problem, future: &FutureBounds) -> Vec<Task> {
    fn expand(w: &mut Walker<'_>, pos: usize, depth: usize, out: &mut Vec<Task>) {
        if !w.feasible(pos) {
            return;
        }
        if pos == depth || pos == w.dag.len() || w.used == w.problem.budget {
            let chosen = w.included.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
            out.push(Task { pos, chosen });
            return;
        }
        if w.can_include(pos) {
            w.include(pos);
            expand(w, pos + 1, depth, out);
            w.undo_include(pos);
        }
        if w.can_exclude(pos) {
            expand(w, pos + 1, depth, out);
        }
    }
    let mut depth = 0;
    loop {
        let mut out = Vec::new();
        expand(&mut Walker::new(dag, problem, future), 0, depth, &mut out);
        if out.len() >= TASK_TARGET || depth >= dag.len() {
            return out;
        }
        depth += 1;
    }
}

fn run_task(
    dag: &RankedDag,
    problem: &Problem,
    future: &FutureBounds,
    task: &Task,
    incumbent: &AtomicU64,
    cap: usize,
) -> Outcome {
    let mut w = Walker::new(dag, problem, future);
    for &v in &task.chosen {
        w.include(v);
    }
    let mut col = Collector { incumbent, cap, outcome: Outcome { best: 0, count: 0, witnesses: Vec::new(), nodes: 0 } };
    dfs(&mut w, task.pos, &mut col);
    col.outcome
}

fn load_checkpoint(cfg: &CheckpointConfig, fingerprint: &str, tasks: usize) -> Result<BTreeMap<usize, Outcome>> {
    let text = match fs::read_to_string(&cfg.path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
        Err(e) => return Err(Error::Checkpoint(format!("{}: {e}", cfg.path.display()))),
    };
    let file: CheckpointFile =
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", cfg.path.display())))?;
    if file.fingerprint != fingerprint || file.tasks != tasks {
        return Err(Error::Checkpoint(format!(
            "{} belongs to a different search ({})",
            cfg.path.display(),
            file.fingerprint
        )));
    }
    Ok(file.completed.into_iter().map(|t| (t.task, t.outcome)).collect())
}

fn write_checkpoint(path: &PathBuf, fingerprint: &str, tasks: usize, done: &BTreeMap<usize, Outcome>) -> Result<()> {
    let file = CheckpointFile {
        fingerprint: fingerprint.to_string(),
        tasks,
        completed: done.iter().map(|(&task, o)| TaskResult { task, outcome: o.clone() }).collect(),
    };
    let body = serde_json::to_string(&file).expect("checkpoint serializes");
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, body)
        .and_then(|_| fs::rename(&tmp, path))
        .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
}

/// Merges per-subtree results in task order.
fn merge(results: &BTreeMap<usize, Outcome>, cap: usize) -> Outcome {
    let best = results.values().map(|o| o.best).max().unwrap_or(0);
    let mut merged = Outcome { best, count: 0, witnesses: Vec::new(), nodes: 0 };
    for o in results.values() {
        merged.nodes += o.nodes;
        if best > 0 && o.best == best {
            merged.count += o.count;
            merged.witnesses.extend(o.witnesses.iter().cloned());
        }
    }
    merged.witnesses.sort();
    merged.witnesses.truncate(cap);
    merged
}

pub(crate) fn run(dag: &RankedDag, problem: &Problem, cfg: &RunConfig) -> Result<Outcome> {
    if let Some(q) = &problem.quota {
        if q.len() != dag.ranks() || q.iter().sum::<usize>() != problem.budget {
            return Err(Error::InvalidParameter("layer quota does not match the budget".into()));
        }
        if q.iter().enumerate().any(|(r, &c)| c > dag.rank_start[r + 1] - dag.rank_start[r]) {
            return Err(Error::InvalidParameter("layer quota exceeds layer size".into()));
        }
    }
    let future = FutureBounds::new(dag);
    let tasks = make_tasks(dag, problem, &future);
    let mut done = match &cfg.checkpoint {
        Some(c) => load_checkpoint(c, &cfg.fingerprint, tasks.len())?,
        None => BTreeMap::new(),
    };
    let start = done.values().map(|o| o.best).max().unwrap_or(0).max(cfg.lower_bound);
    let incumbent = AtomicU64::new(start);
    let pending: Vec<(usize, &Task)> = tasks.iter().enumerate().filter(|(i, _)| !done.contains_key(i)).collect();

    let state = Mutex::new((std::mem::take(&mut done), 0usize));
    let work = || -> Result<()> {
        pending.par_iter().try_for_each(|&(id, task)| {
            let outcome = run_task(dag, problem, &future, task, &incumbent, cfg.witness_cap);
            let mut guard = state.lock().expect("checkpoint state");
            let (done, since) = &mut *guard;
            done.insert(id, outcome);
            *since += 1;
            if let Some(c) = &cfg.checkpoint {
                if *since >= c.interval.max(1) {
                    *since = 0;
                    write_checkpoint(&c.path, &cfg.fingerprint, tasks.len(), done)?;
                }
            }
            Ok(())
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    pool.install(work)?;

    let (done, _) = state.into_inner().expect("checkpoint state");
    if let Some(c) = &cfg.checkpoint {
        write_checkpoint(&c.path, &cfg.fingerprint, tasks.len(), &done)?;
    }
    let merged = merge(&done, cfg.witness_cap);
    if merged.best < cfg.lower_bound {
        return Err(Error::Inconsistent(format!(
            "search optimum {} is below the attainable value {}",
            merged.best, cfg.lower_bound
        )));
    }
    Ok(merged)
}

//! Rooted Redelmeier enumeration of bond animals containing the origin.
//!
//! Edges are the cells of the search. The untried set starts as the `2d` edges
//! at the origin; adding an edge appends its not-yet-seen neighbours (edges
//! sharing an endpoint) to the untried queue, and an edge that was skipped in a
//! branch stays marked so it is never offered again below that branch. Every
//! connected edge set touching the origin is produced exactly once.
//!
//! The outlying count is tracked through vertex degrees: an edge outside the
//! animal is outlying iff one of its endpoints has positive degree, so an
//! outlying edge touching the animal at both ends is counted once.
//!
//! For parallel drivers the tree can be cut at a fixed depth: [`Plan::tasks`]
//! lists the subtrees rooted at that depth and [`Plan::run_task`] counts one of
//! them. Partial counts add, so the merged table does not depend on scheduling.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::lattice::{max_outlying, BoxGeometry, LatticeConfig, MAX_DIM};
use crate::table::SvTable;

/// Largest `n_max` accepted per dimension (index = d). Dimensions above 4
/// are refused unless the caller raises their cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityCaps {
    pub max_edges: [usize; MAX_DIM + 1],
}

impl Default for FeasibilityCaps {
    fn default() -> Self {
        Self {
            max_edges: [0, 0, 14, 10, 7, 0, 0],
        }
    }
}

impl FeasibilityCaps {
    pub fn check(&self, d: usize, n_max: usize) -> Result<()> {
        let cap = self.max_edges.get(d).copied().unwrap_or(0);
        if n_max > cap {
            return Err(Error::Infeasible {
                d,
                n_max,
                cap,
                log10_estimated_nodes: log10_estimated_nodes(d, n_max),
            });
        }
        Ok(())
    }
}

/// Rough size of the search tree: every counted animal is one node.
///
/// Uses approximate bond-animal growth constants; good to an order of
/// magnitude for the dimensions the caps allow.
pub fn estimated_nodes(d: usize, n_max: usize) -> f64 {
    crate::math::powf(10.0, log10_estimated_nodes(d, n_max))
}

/// `log10` of [`estimated_nodes`], finite for any size.
pub fn log10_estimated_nodes(d: usize, n_max: usize) -> f64 {
    let mu = match d {
        2 => 5.21,
        3 => 10.5,
        4 => 16.0,
        _ => 1.35 * (4 * d - 2) as f64,
    };
    let ln_mu = crate::math::ln(mu);
    let terms = (1..=n_max).map(|n| crate::math::ln(0.25 * (n + 1) as f64) + n as f64 * ln_mu);
    crate::math::log_sum_exp(terms) / core::f64::consts::LN_10
}

/// Counts for one subtree (or the shallow part of the tree), `n`-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialCounts {
    n_max: usize,
    width: usize,
    cells: Vec<u64>,
}

impl PartialCounts {
    fn new(d: usize, n_max: usize) -> Self {
        let width = max_outlying(d, n_max) + 1;
        Self {
            n_max,
            width,
            cells: vec![0; (n_max + 1) * width],
        }
    }

    #[inline]
    fn bump(&mut self, n: usize, m: usize) {
        self.cells[n * self.width + m] += 1;
    }

    pub fn merge(&mut self, other: &PartialCounts) {
        assert_eq!(self.cells.len(), other.cells.len(), "merging incompatible counts");
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a = a.checked_add(*b).expect("animal count overflowed u64");
        }
    }

    pub fn get(&self, n: usize, m: usize) -> u64 {
        if n > self.n_max || m >= self.width {
            0
        } else {
            self.cells[n * self.width + m]
        }
    }

    /// Total number of animals counted (search nodes visited).
    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }

    pub fn into_table(self, config: LatticeConfig) -> Result<SvTable> {
        let width = self.width;
        let cells = self
            .cells
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(i, c)| ((i / width, i % width), BigUint::from(c)));
        SvTable::from_cells(config, self.n_max, cells)
    }
}

/// A subtree root: the queue positions chosen on the way down from the root.
pub type Task = Vec<u32>;

/// A validated enumeration job that can be run serially or split into tasks.
#[derive(Debug, Clone)]
pub struct Plan {
    config: LatticeConfig,
    n_max: usize,
    geometry: BoxGeometry,
    split_depth: usize,
}

/// Default depth at which parallel drivers cut the search tree.
pub const DEFAULT_SPLIT_DEPTH: usize = 4;

impl Plan {
    pub fn new(config: LatticeConfig, n_max: usize, caps: &FeasibilityCaps) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidConfig("n_max must be at least 1".into()));
        }
        caps.check(config.dim(), n_max)?;
        Ok(Self {
            config,
            n_max,
            // Animal vertices lie within L1 distance n_max of the origin; one more
            // layer holds the far ends of outlying edges.
            geometry: BoxGeometry::new(config.dim(), n_max + 1),
            split_depth: DEFAULT_SPLIT_DEPTH.min(n_max),
        })
    }

    pub fn with_split_depth(mut self, depth: usize) -> Self {
        self.split_depth = depth.clamp(1, self.n_max);
        self
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn search(&self) -> Search<'_> {
        Search::new(&self.geometry, self.n_max)
    }

    /// Counts every animal above the split depth and lists the subtrees below it.
    pub fn split(&self) -> (PartialCounts, Vec<Task>) {
        let mut s = self.search();
        let mut tasks = Vec::new();
        let mut path = Vec::with_capacity(self.split_depth);
        s.split(0, self.split_depth, &mut path, &mut tasks);
        (s.counts, tasks)
    }

    pub fn tasks(&self) -> Vec<Task> {
        self.split().1
    }

    /// Counts the subtree rooted at `task`, including the task's own animal.
    pub fn run_task(&self, task: &[u32]) -> PartialCounts {
        let mut s = self.search();
        s.replay_and_run(task);
        s.counts
    }

    /// Single-threaded full enumeration.
    pub fn run_serial(&self) -> Result<SvTable> {
        let mut s = self.search();
        s.recurse(0);
        s.counts.into_table(self.config)
    }
}

/// `sigma(n, m)` for all `n <= n_max`, single-threaded.
pub fn enumerate_table(config: LatticeConfig, n_max: usize) -> Result<SvTable> {
    Plan::new(config, n_max, &FeasibilityCaps::default())?.run_serial()
}

struct Search<'g> {
    g: &'g BoxGeometry,
    n_max: usize,
    queue: Vec<u32>,
    seen: Vec<bool>,
    degree: Vec<u8>,
    n: usize,
    m: usize,
    counts: PartialCounts,
}

impl<'g> Search<'g> {
    fn new(g: &'g BoxGeometry, n_max: usize) -> Self {
        let mut s = Self {
            g,
            n_max,
            queue: Vec::with_capacity(n_max * 4 * g.d + 2 * g.d),
            seen: vec![false; g.edge_count()],
            degree: vec![0; g.vertex_count],
            n: 0,
            m: 0,
            counts: PartialCounts::new(g.d, n_max),
        };
        let o = g.origin;
        for axis in 0..g.d {
            s.offer(g.edge_id(o, axis));
            s.offer(g.edge_id(o - g.strides[axis], axis));
        }
        s
    }

    #[inline]
    fn offer(&mut self, edge: u32) {
        let seen = &mut self.seen[edge as usize];
        if !*seen {
            *seen = true;
            self.queue.push(edge);
        }
    }

    /// Edges at `v` other than the one whose id is `skip`, with their far endpoints.
    #[inline]
    fn for_each_incident(g: &BoxGeometry, v: usize, skip: u32, mut f: impl FnMut(u32, usize)) {
        for axis in 0..g.d {
            let s = g.strides[axis];
            let up = g.edge_id(v, axis);
            if up != skip {
                f(up, v + s);
            }
            let down = g.edge_id(v - s, axis);
            if down != skip {
                f(down, v - s);
            }
        }
    }

    #[inline]
    fn add(&mut self, edge: u32) {
        let (u, w) = self.g.endpoints(edge);
        let degree = &self.degree;
        if degree[u] > 0 || degree[w] > 0 {
            self.m -= 1;
        }
        let mut gained = 0;
        for v in [u, w] {
            if degree[v] == 0 {
                Self::for_each_incident(self.g, v, edge, |_, far| {
                    if degree[far] == 0 {
                        gained += 1;
                    }
                });
            }
        }
        self.m += gained;
        self.degree[u] += 1;
        self.degree[w] += 1;
        self.n += 1;
    }

    #[inline]
    fn remove(&mut self, edge: u32, m_before: usize) {
        let (u, w) = self.g.endpoints(edge);
        self.degree[u] -= 1;
        self.degree[w] -= 1;
        self.n -= 1;
        self.m = m_before;
    }

    #[inline]
    fn offer_neighbours(&mut self, edge: u32) {
        let (u, w) = self.g.endpoints(edge);
        for v in [u, w] {
            for axis in 0..self.g.d {
                let s = self.g.strides[axis];
                self.offer(self.g.edge_id(v, axis));
                self.offer(self.g.edge_id(v - s, axis));
            }
        }
    }

    #[inline]
    fn retract(&mut self, mark: usize) {
        for &e in &self.queue[mark..] {
            self.seen[e as usize] = false;
        }
        self.queue.truncate(mark);
    }

    fn recurse(&mut self, start: usize) {
        let end = self.queue.len();
        for i in start..end {
            let edge = self.queue[i];
            let m_before = self.m;
            self.add(edge);
            self.counts.bump(self.n, self.m);
            if self.n < self.n_max {
                let mark = self.queue.len();
                self.offer_neighbours(edge);
                self.recurse(i + 1);
                self.retract(mark);
            }
            self.remove(edge, m_before);
        }
    }

    fn split(&mut self, start: usize, depth: usize, path: &mut Vec<u32>, tasks: &mut Vec<Task>) {
        let end = self.queue.len();
        for i in start..end {
            let edge = self.queue[i];
            let m_before = self.m;
            self.add(edge);
            path.push(i as u32);
            if self.n == depth {
                tasks.push(path.clone());
            } else {
                self.counts.bump(self.n, self.m);
                let mark = self.queue.len();
                self.offer_neighbours(edge);
                self.split(i + 1, depth, path, tasks);
                self.retract(mark);
            }
            path.pop();
            self.remove(edge, m_before);
        }
    }

    fn replay_and_run(&mut self, task: &[u32]) {
        let (&last, prefix) = task.split_last().expect("empty task");
        for &pos in prefix {
            let edge = self.queue[pos as usize];
            self.add(edge);
            self.offer_neighbours(edge);
        }
        let edge = self.queue[last as usize];
        self.add(edge);
        self.counts.bump(self.n, self.m);
        if self.n < self.n_max {
            self.offer_neighbours(edge);
            self.recurse(last as usize + 1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn cells(t: &SvTable) -> Vec<((usize, usize), u64)> {
        t.cells().map(|(k, c)| (k, c.to_u64().unwrap())).collect()
    }

    #[test]
    fn single_edge_tables() {
        let t = enumerate_table(LatticeConfig::square(), 1).unwrap();
        assert_eq!(cells(&t), [((1, 6), 4)]);
        let t = enumerate_table(LatticeConfig::new(3, 0.25).unwrap(), 1).unwrap();
        assert_eq!(cells(&t), [((1, 10), 6)]);
    }

    #[test]
    fn two_edges_square_lattice() {
        let t = enumerate_table(LatticeConfig::square(), 2).unwrap();
        assert_eq!(cells(&t), [((1, 6), 4), ((2, 8), 18)]);
    }

    #[test]
    fn split_tasks_reassemble_serial_counts() {
        let plan = Plan::new(LatticeConfig::square(), 7, &FeasibilityCaps::default())
            .unwrap()
            .with_split_depth(3);
        let (mut acc, tasks) = plan.split();
        for t in &tasks {
            acc.merge(&plan.run_task(t));
        }
        let merged = acc.into_table(*plan.config()).unwrap();
        assert_eq!(merged, plan.run_serial().unwrap());
    }

    #[test]
    fn infeasible_sizes_are_refused() {
        let err = enumerate_table(LatticeConfig::square(), 10_000).unwrap_err();
        match err {
            Error::Infeasible { cap, log10_estimated_nodes, .. } => {
                assert_eq!(cap, 14);
                assert!(log10_estimated_nodes > 100.0 && log10_estimated_nodes.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(enumerate_table(LatticeConfig::new(5, 0.1).unwrap(), 2).is_err());
        assert!(enumerate_table(LatticeConfig::square(), 0).is_err());
    }
}

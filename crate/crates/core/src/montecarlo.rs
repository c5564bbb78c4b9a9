//! Seeded bond percolation: samples the origin's cluster and records its edge
//! count `n` and outlying-edge count `m`.
//!
//! Sample `i` of a run draws from ChaCha8 seeded with the run seed on stream
//! `i`, so any subset of samples can be reproduced independently and parallel
//! workers agree with a serial run bit for bit.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Range;

use hashbrown::HashSet;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::lattice::{Edge, LatticeConfig, MAX_DIM, ORIGIN};

/// Recorded in output metadata so that runs can be reproduced elsewhere.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng(seed_from_u64, stream=sample_index); open iff (u64>>11)*2^-53 < p";

pub const DEFAULT_EDGE_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub config: LatticeConfig,
    pub p: f64,
    pub seed: u64,
    pub edge_cap: usize,
    pub sample_count: u64,
}

impl McConfig {
    pub fn new(config: LatticeConfig, p: f64, seed: u64, sample_count: u64) -> Result<Self> {
        let mc = Self {
            config,
            p,
            seed,
            edge_cap: DEFAULT_EDGE_CAP,
            sample_count,
        };
        mc.validate()?;
        Ok(mc)
    }

    pub fn with_edge_cap(mut self, edge_cap: usize) -> Result<Self> {
        self.edge_cap = edge_cap;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::domain(alloc::format!("p must lie in [0, 1], got {}", self.p)));
        }
        if self.edge_cap < 1 {
            return Err(Error::InvalidConfig("edge_cap must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClusterSample {
    pub n_edges: usize,
    pub m_outlying: usize,
    pub truncated: bool,
}

const UNIT: f64 = 1.0 / (1u64 << 53) as f64;

/// Reusable exploration buffers.
#[derive(Debug, Default)]
pub struct Explorer {
    sampled: HashSet<Edge>,
    visited: HashSet<[i32; MAX_DIM]>,
    frontier: Vec<[i32; MAX_DIM]>,
}

impl Explorer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Breadth-first exploration of the origin's cluster. Each edge touching
    /// the cluster is sampled once, when first reached; open ones extend the
    /// cluster and closed ones are its outlying edges.
    pub fn sample(&mut self, mc: &McConfig, index: u64) -> ClusterSample {
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        rng.set_stream(index);
        let d = mc.config.dim();
        self.sampled.clear();
        self.visited.clear();
        self.frontier.clear();
        self.visited.insert(ORIGIN);
        self.frontier.push(ORIGIN);
        let (mut n, mut m) = (0usize, 0usize);
        let mut head = 0;
        while head < self.frontier.len() {
            let v = self.frontier[head];
            head += 1;
            for e in Edge::incident(v, d) {
                if !self.sampled.insert(e) {
                    continue;
                }
                let open = ((rng.next_u64() >> 11) as f64) * UNIT < mc.p;
                if !open {
                    m += 1;
                    continue;
                }
                n += 1;
                if n > mc.edge_cap {
                    return ClusterSample {
                        n_edges: n,
                        m_outlying: m,
                        truncated: true,
                    };
                }
                let (a, b) = e.endpoints();
                let w = if a == v { b } else { a };
                if self.visited.insert(w) {
                    self.frontier.push(w);
                }
            }
        }
        ClusterSample {
            n_edges: n,
            m_outlying: m,
            truncated: false,
        }
    }
}

/// Sample `index` of the run described by `mc`.
pub fn sample_cluster(mc: &McConfig, index: u64) -> ClusterSample {
    Explorer::new().sample(mc, index)
}

/// Joint counts of `(n, m)` over a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    n_max: usize,
    cells: BTreeMap<(usize, usize), u64>,
    /// Finite clusters with more than `n_max` edges.
    beyond: u64,
    truncated: u64,
    total: u64,
}

impl Histogram {
    pub fn new(n_max: usize) -> Self {
        Self {
            n_max,
            cells: BTreeMap::new(),
            beyond: 0,
            truncated: 0,
            total: 0,
        }
    }

    /// Rebuilds a histogram from stored counts, checking conservation.
    pub fn from_parts(
        n_max: usize,
        cells: impl IntoIterator<Item = ((usize, usize), u64)>,
        beyond: u64,
        truncated: u64,
        total: u64,
    ) -> Result<Self> {
        let mut hist = Self::new(n_max);
        for ((n, m), c) in cells {
            if n > n_max {
                return Err(Error::OutOfRange { n, n_max });
            }
            if c > 0 && hist.cells.insert((n, m), c).is_some() {
                return Err(Error::Table(alloc::format!("duplicate histogram cell ({n}, {m})")));
            }
        }
        hist.beyond = beyond;
        hist.truncated = truncated;
        hist.total = total;
        if !hist.is_conserved() {
            return Err(Error::Table("histogram counts do not add up to the total".into()));
        }
        Ok(hist)
    }

    pub fn record(&mut self, s: ClusterSample) {
        self.total += 1;
        if s.truncated {
            self.truncated += 1;
        } else if s.n_edges > self.n_max {
            self.beyond += 1;
        } else {
            *self.cells.entry((s.n_edges, s.m_outlying)).or_insert(0) += 1;
        }
    }

    /// Adds another histogram over the same `n_max`.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if other.n_max != self.n_max {
            return Err(Error::InvalidConfig(alloc::format!(
                "cannot merge histograms with n_max {} and {}",
                self.n_max, other.n_max
            )));
        }
        for (&k, &c) in &other.cells {
            *self.cells.entry(k).or_insert(0) += c;
        }
        self.beyond += other.beyond;
        self.truncated += other.truncated;
        self.total += other.total;
        Ok(())
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.cells.iter().map(|(&k, &c)| (k, c))
    }

    pub fn count(&self, n: usize, m: usize) -> u64 {
        self.cells.get(&(n, m)).copied().unwrap_or(0)
    }

    pub fn frequency(&self, n: usize, m: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(n, m) as f64 / self.total as f64
        }
    }

    pub fn beyond(&self) -> u64 {
        self.beyond
    }

    pub fn truncated(&self) -> u64 {
        self.truncated
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Cell counts plus the beyond and truncated buckets equal the total.
    pub fn is_conserved(&self) -> bool {
        let cells: u64 = self.cells.values().sum();
        cells + self.beyond + self.truncated == self.total
    }
}

/// Histogram of the samples with indices in `range`.
pub fn empirical_pmf_range(mc: &McConfig, n_max: usize, range: Range<u64>) -> Histogram {
    let mut explorer = Explorer::new();
    let mut hist = Histogram::new(n_max);
    for i in range {
        hist.record(explorer.sample(mc, i));
    }
    hist
}

pub fn empirical_pmf(mc: &McConfig, n_max: usize) -> Histogram {
    empirical_pmf_range(mc, n_max, 0..mc.sample_count)
}

pub const RATIO_QUANTILES: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

/// Statistics of `m/n` over conditioned samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSummary {
    pub count: u64,
    pub mean: f64,
    /// `(level, value)` pairs, nearest-rank.
    pub quantiles: Vec<(f64, f64)>,
    pub empty: bool,
}

impl RatioSummary {
    pub fn from_ratios(mut ratios: Vec<f64>) -> Self {
        if ratios.is_empty() {
            return Self {
                count: 0,
                mean: f64::NAN,
                quantiles: Vec::new(),
                empty: true,
            };
        }
        ratios.sort_by(|a, b| a.total_cmp(b));
        let len = ratios.len();
        let mean = ratios.iter().sum::<f64>() / len as f64;
        let quantiles = RATIO_QUANTILES
            .iter()
            .map(|&q| {
                let rank = libm::ceil(q * len as f64) as usize;
                (q, ratios[rank.clamp(1, len) - 1])
            })
            .collect();
        Self {
            count: len as u64,
            mean,
            quantiles,
            empty: false,
        }
    }
}

/// `m/n` ratios of the untruncated samples in `range` with `n` in `n_window`.
pub fn conditional_ratios_range(
    mc: &McConfig,
    n_window: (usize, usize),
    range: Range<u64>,
) -> Vec<f64> {
    let (lo, hi) = n_window;
    let mut explorer = Explorer::new();
    let mut out = Vec::new();
    for i in range {
        let s = explorer.sample(mc, i);
        if !s.truncated && s.n_edges >= lo.max(1) && s.n_edges <= hi {
            out.push(s.m_outlying as f64 / s.n_edges as f64);
        }
    }
    out
}

pub fn conditional_ratio(mc: &McConfig, n_window: (usize, usize)) -> Result<RatioSummary> {
    if n_window.0 > n_window.1 {
        return Err(Error::domain(alloc::format!(
            "empty size window {}:{}",
            n_window.0, n_window.1
        )));
    }
    Ok(RatioSummary::from_ratios(conditional_ratios_range(
        mc,
        n_window,
        0..mc.sample_count,
    )))
}

/// The samples with indices in `range`, in order.
pub fn samples(mc: &McConfig, range: Range<u64>) -> Vec<ClusterSample> {
    let mut explorer = Explorer::new();
    range.map(|i| explorer.sample(mc, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mc(p: f64, samples: u64) -> McConfig {
        McConfig::new(LatticeConfig::square(), p, 7, samples).unwrap()
    }

    #[test]
    fn closed_everywhere() {
        let s = sample_cluster(&mc(0.0, 1), 0);
        assert_eq!(s, ClusterSample { n_edges: 0, m_outlying: 4, truncated: false });
        let h = empirical_pmf(&mc(0.0, 50), 5);
        assert_eq!(h.count(0, 4), 50);
        assert!(h.is_conserved());
    }

    #[test]
    fn open_everywhere_truncates() {
        let cfg = mc(1.0, 1).with_edge_cap(100).unwrap();
        let s = sample_cluster(&cfg, 0);
        assert!(s.truncated);
        assert_eq!(s.n_edges, 101);
    }

    #[test]
    fn deterministic_and_splittable() {
        let cfg = mc(0.4, 400);
        let whole = empirical_pmf(&cfg, 8);
        let mut parts = empirical_pmf_range(&cfg, 8, 0..123);
        parts.merge(&empirical_pmf_range(&cfg, 8, 123..400)).unwrap();
        assert_eq!(whole, parts);
        assert!(whole.is_conserved());
        assert_eq!(whole.total(), 400);
    }

    #[test]
    fn two_edge_clusters_have_eight_outlying() {
        let cfg = mc(0.3, 5000);
        for s in samples(&cfg, 0..5000) {
            if !s.truncated && s.n_edges >= 1 {
                assert!(s.m_outlying <= 2 * s.n_edges + 4);
            }
            if s.n_edges == 2 {
                assert_eq!(s.m_outlying, 8);
            }
            if s.n_edges == 1 {
                assert_eq!(s.m_outlying, 6);
            }
        }
    }

    #[test]
    fn ratio_summary() {
        let s = RatioSummary::from_ratios(alloc::vec![3.0, 1.0, 2.0, 4.0]);
        assert_eq!(s.count, 4);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.quantiles[2], (0.5, 2.0));
        assert!(RatioSummary::from_ratios(Vec::new()).empty);
        let e = conditional_ratio(&mc(0.0, 10), (1, 3)).unwrap();
        assert!(e.empty);
    }
}

//! Thread-pool drivers for enumeration and Monte Carlo. Results do not depend
//! on the number of threads: enumeration merges exact partial counts, and
//! every Monte Carlo sample has its own RNG stream.

use rayon::prelude::*;
use svperc_core::enumerate::{FeasibilityCaps, PartialCounts, Plan, DEFAULT_SPLIT_DEPTH};
use svperc_core::montecarlo::{conditional_ratios_range, empirical_pmf_range, Histogram, McConfig};
use svperc_core::{LatticeConfig, Result, SvTable};

/// Samples per Monte Carlo work unit.
pub const MC_CHUNK: u64 = 1 << 14;

/// Runs `f` on a pool of `threads` workers (`0` lets rayon choose).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("building thread pool");
    pool.install(f)
}

pub fn enumerate_parallel(
    config: LatticeConfig,
    n_max: usize,
    caps: &FeasibilityCaps,
    split_depth: Option<usize>,
) -> Result<SvTable> {
    let plan = Plan::new(config, n_max, caps)?
        .with_split_depth(split_depth.unwrap_or(DEFAULT_SPLIT_DEPTH));
    let (shallow, tasks) = plan.split();
    let deep = tasks
        .par_iter()
        .map(|task| plan.run_task(task))
        .reduce_with(|mut a, b| {
            a.merge(&b);
            a
        });
    let mut total: PartialCounts = shallow;
    if let Some(deep) = deep {
        total.merge(&deep);
    }
    total.into_table(config)
}

fn chunks(count: u64) -> Vec<std::ops::Range<u64>> {
    (0..count.div_ceil(MC_CHUNK))
        .map(|i| i * MC_CHUNK..((i + 1) * MC_CHUNK).min(count))
        .collect()
}

pub fn empirical_pmf_parallel(mc: &McConfig, n_max: usize) -> Histogram {
    chunks(mc.sample_count)
        .into_par_iter()
        .map(|r| empirical_pmf_range(mc, n_max, r))
        .reduce(
            || Histogram::new(n_max),
            |mut a, b| {
                a.merge(&b).expect("same n_max");
                a
            },
        )
}

/// Ratios `m/n` of conditioned samples, in sample order.
pub fn conditional_ratios_parallel(mc: &McConfig, n_window: (usize, usize)) -> Vec<f64> {
    chunks(mc.sample_count)
        .into_par_iter()
        .map(|r| conditional_ratios_range(mc, n_window, r))
        .collect::<Vec<_>>()
        .concat()
}

/// Edge counts of all untruncated samples with at least one edge, sorted.
pub fn observed_sizes(mc: &McConfig) -> Vec<usize> {
    let mut sizes: Vec<usize> = chunks(mc.sample_count)
        .into_par_iter()
        .map(|r| {
            svperc_core::montecarlo::samples(mc, r)
                .into_iter()
                .filter(|s| !s.truncated && s.n_edges > 0)
                .map(|s| s.n_edges)
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat();
    sizes.sort_unstable();
    sizes
}

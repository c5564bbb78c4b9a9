//! Invariant suites behind `svperc check`: weight identities on grids, table
//! invariants, and the agreement between Monte Carlo histograms and the exact
//! cluster law.

use serde::Serialize;
use svperc_core::analysis::{
    big_phi, compute_tn, decompose_c123, log_delyon_growth, phi, sup_weight,
};
use svperc_core::montecarlo::Histogram;
use svperc_core::table::verify_table;
use svperc_core::{Result, SvTable};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

pub const IDENTITY_TOL: f64 = 1e-12;
pub const SUP_WEIGHT_TOL: f64 = 1e-8;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn direct_weight(p: f64, n: usize, m: usize) -> f64 {
    p.powi(n as i32) * (1.0 - p).powi(m as i32)
}

/// `p^n (1-p)^m` against its phi form over 10 values of `a = 1/p - 1` and the
/// 100 cells `1 <= n, m <= 10`.
pub fn phi_weight_identity() -> Check {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for i in 0..10 {
        let a = 0.2 + 0.5 * i as f64;
        let p = 1.0 / (1.0 + a);
        for n in 1..=10usize {
            for m in 1..=10usize {
                let beta = m as f64 / n as f64;
                let lhs = direct_weight(p, n, m);
                let rhs = (n as f64 * (phi(a, beta).unwrap() - log_delyon_growth(beta))).exp();
                worst = worst.max(rel(lhs, rhs));
                points += 1;
            }
        }
    }
    Check::new(
        "phi_weight_identity",
        worst <= IDENTITY_TOL,
        format!("{points} points, max relative error {worst:.3e}"),
    )
}

/// `t^n (1-t)^m = a^m / (1+a)^(n+m) exp(n big_phi(g, a, m/n))`, `t = 1/(1+g)`,
/// over 10 values each of `g` and `a` and 10 cells.
pub fn big_phi_identity() -> Check {
    let cells = [(1, 6), (2, 8), (3, 1), (4, 2), (5, 9), (6, 14), (7, 3), (8, 16), (9, 5), (10, 20)];
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for i in 0..10 {
        let g = 0.15 + 0.7 * i as f64;
        let t = 1.0 / (1.0 + g);
        for j in 0..10 {
            let a = 0.25 + 0.45 * j as f64;
            for &(n, m) in &cells {
                let beta = m as f64 / n as f64;
                let lhs = direct_weight(t, n, m);
                let rhs = a.powi(m as i32) / (1.0 + a).powi((n + m) as i32)
                    * (n as f64 * big_phi(g, a, beta).unwrap()).exp();
                worst = worst.max(rel(lhs, rhs));
                points += 1;
            }
        }
    }
    Check::new(
        "big_phi_identity",
        worst <= IDENTITY_TOL,
        format!("{points} points, max relative error {worst:.3e}"),
    )
}

/// `phi < 0` off the diagonal and `phi = 0` on it, over a 32 x 32 grid.
pub fn phi_sign() -> Check {
    let values: Vec<f64> = (0..32).map(|i| 0.05 * 1.2f64.powi(i)).collect();
    let mut bad = Vec::new();
    for &a in &values {
        for &b in &values {
            let v = phi(a, b).unwrap();
            let ok = if a == b { v == 0.0 } else { v < 0.0 };
            if !ok {
                bad.push((a, b, v));
            }
        }
    }
    Check::new(
        "phi_sign",
        bad.is_empty(),
        format!("{} points, violations {:?}", values.len() * values.len(), bad.first()),
    )
}

/// `sup_weight` against the best of a million-point grid over `(0, p_c)`.
pub fn sup_weight_vs_grid(p_c: f64) -> Check {
    const POINTS: usize = 1_000_000;
    let cells = [(1, 6), (2, 8), (3, 0), (4, 2), (3, 7), (6, 4), (5, 12), (8, 8)];
    let mut worst: f64 = 0.0;
    for &(n, m) in &cells {
        let mut best: f64 = 0.0;
        for k in 1..POINTS {
            let p = p_c * k as f64 / POINTS as f64;
            best = best.max(direct_weight(p, n, m));
        }
        best = best.max(direct_weight(p_c, n, m));
        worst = worst.max(rel(sup_weight(n, m, p_c).unwrap(), best));
    }
    Check::new(
        "sup_weight_grid",
        worst <= SUP_WEIGHT_TOL,
        format!("{} cells, max relative error {worst:.3e}", cells.len()),
    )
}

pub fn identity_suite() -> Vec<Check> {
    vec![
        phi_weight_identity(),
        big_phi_identity(),
        phi_sign(),
        sup_weight_vs_grid(0.5),
    ]
}

/// Table invariants plus, per row, a maximizer and an exact three-way split.
pub fn table_suite(table: &SvTable) -> Result<Vec<Check>> {
    let mut checks: Vec<Check> = verify_table(table)
        .checks
        .into_iter()
        .map(|c| Check::new(&c.name, c.passed, c.detail))
        .collect();
    let p_c = table.config().p_c();
    let mut tn_bad = Vec::new();
    let mut split_worst: f64 = 0.0;
    for n in 1..=table.n_max() {
        let tn = compute_tn(table, n, p_c)?;
        if !(tn.t_n > 0.0 && tn.t_n <= p_c) {
            tn_bad.push(n);
        }
        let d = decompose_c123(table, n, 1.0, p_c)?;
        split_worst = split_worst.max(rel(d.c1 + d.c2 + d.c3, d.pmf_at_tn));
        if d.residual != 0.0 {
            split_worst = f64::INFINITY;
        }
    }
    checks.push(Check::new(
        "tn_in_range",
        tn_bad.is_empty(),
        format!("rows outside (0, p_c]: {tn_bad:?}"),
    ));
    checks.push(Check::new(
        "c123_partition",
        split_worst <= IDENTITY_TOL,
        format!("max relative error {split_worst:.3e}"),
    ));
    Ok(checks)
}

#[derive(Debug, Clone, Serialize)]
pub struct BridgeCell {
    pub n: usize,
    pub m: usize,
    pub count: u64,
    pub expected: f64,
    pub frequency: f64,
    pub stderr: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BridgeReport {
    pub p: f64,
    pub samples: u64,
    pub n_max: usize,
    pub z_limit: f64,
    pub conserved: bool,
    pub cells: Vec<BridgeCell>,
    pub max_abs_z: f64,
    /// Cells the exact law forbids but the histogram contains.
    pub impossible_cells: Vec<(usize, usize)>,
    pub passed: bool,
}

/// Cell-by-cell comparison of a histogram with `sigma(n,m) p^n (1-p)^m` for
/// `n <= n_max`, including the empty cluster `(0, 2d)`.
pub fn bridge(table: &SvTable, hist: &Histogram, p: f64, n_max: usize, z_limit: f64) -> BridgeReport {
    let d = table.config().dim();
    let n_max = n_max.min(table.n_max()).min(hist.n_max());
    let total = hist.total() as f64;
    let mut cells = Vec::new();
    let mut push = |n: usize, m: usize, expected: f64| {
        let count = hist.count(n, m);
        let frequency = count as f64 / total;
        let stderr = (expected * (1.0 - expected) / total).sqrt();
        let z = if stderr > 0.0 {
            (frequency - expected) / stderr
        } else if count == 0 {
            0.0
        } else {
            f64::INFINITY
        };
        cells.push(BridgeCell { n, m, count, expected, frequency, stderr, z });
    };
    push(0, 2 * d, (1.0 - p).powi(2 * d as i32));
    for n in 1..=n_max {
        for (m, count) in table.row(n).expect("n within table") {
            let c: f64 = svperc_core::math::ln_big(count).exp();
            push(n, m, c * direct_weight(p, n, m));
        }
    }
    let impossible_cells: Vec<(usize, usize)> = hist
        .cells()
        .filter(|&((n, m), c)| {
            c > 0
                && n <= n_max
                && if n == 0 { m != 2 * d } else { table.sigma(n, m).map(|s| s == 0u32.into()).unwrap_or(true) }
        })
        .map(|(k, _)| k)
        .collect();
    let max_abs_z = cells.iter().map(|c| c.z.abs()).fold(0.0, f64::max);
    let conserved = hist.is_conserved();
    BridgeReport {
        p,
        samples: hist.total(),
        n_max,
        z_limit,
        conserved,
        max_abs_z,
        passed: conserved && impossible_cells.is_empty() && max_abs_z <= z_limit,
        impossible_cells,
        cells,
    }
}

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, exp, ln};
use crate::table::SvTable;

/// Coarse bracketing grid on `(0, p_c]`.
pub const TN_GRID_POINTS: usize = 1024;
/// Absolute accuracy of `t_n`.
pub const TN_TOLERANCE: f64 = 1e-10;

/// The least maximizer `t_n` of `p -> P_p(|C(0)| = n)` on `(0, p_c]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TnRecord {
    pub n: usize,
    pub t_n: f64,
    /// `1/t_n - 1`
    pub alpha_n: f64,
    /// The unconstrained maximizer lies beyond `p_c`.
    pub clamped: bool,
    /// Relaxation factor: `t_n` is the least `p` reaching `rho` times the supremum.
    pub rho: f64,
}

/// Row `n` prepared for repeated evaluation at different `p`.
struct Objective {
    n: f64,
    row: Vec<(f64, f64)>, // (m, ln sigma)
}

impl Objective {
    fn new(table: &SvTable, n: usize) -> Result<Self> {
        let row: Vec<(f64, f64)> = table
            .row_logs(n)?
            .into_iter()
            .map(|(m, ls)| (m as f64, ls))
            .collect();
        if row.is_empty() {
            return Err(Error::NoMaximizer { n });
        }
        Ok(Self { n: n as f64, row })
    }

    fn log_value(&self, p: f64) -> f64 {
        let (lp, lq) = (ln(p), math::ln_1p(-p));
        math::log_sum_exp(self.row.iter().map(|&(m, ls)| ls + self.n * lp + m * lq))
    }

    /// Sign-faithful multiple of the derivative: `sum_m w_m (n (1-p) - m p)`
    /// with weights normalised by the largest term.
    fn slope(&self, p: f64) -> f64 {
        let (lp, lq) = (ln(p), math::ln_1p(-p));
        let logs = || self.row.iter().map(|&(m, ls)| ls + self.n * lp + m * lq);
        let top = logs().fold(f64::NEG_INFINITY, f64::max);
        self.row
            .iter()
            .zip(logs())
            .map(|(&(m, _), l)| exp(l - top) * (self.n * (1.0 - p) - m * p))
            .sum()
    }
}

/// `t_n` per the default definition (`rho = 1`).
pub fn compute_tn(table: &SvTable, n: usize, p_c: f64) -> Result<TnRecord> {
    compute_tn_relaxed(table, n, p_c, 1.0)
}

/// `t_n` as the least `p` in `(0, p_c]` with `P_p(n) >= rho sup P(n)`.
///
/// The maximum is bracketed on a 1024-point grid (leftmost grid maximum) and
/// refined by bisection on the sign of the derivative. Golden-section search
/// on the values cannot resolve a quadratic peak below ~1e-8, so it is only a
/// fallback for brackets without a clean sign change.
pub fn compute_tn_relaxed(table: &SvTable, n: usize, p_c: f64, rho: f64) -> Result<TnRecord> {
    if !(p_c > 0.0 && p_c < 1.0) {
        return Err(Error::domain("p_c must lie in (0, 1)"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::domain(alloc::format!("rho={rho} must lie in (0, 1]")));
    }
    table.check_n(n)?;
    let obj = Objective::new(table, n)?;

    let grid: Vec<f64> = (1..=TN_GRID_POINTS)
        .map(|k| p_c * k as f64 / TN_GRID_POINTS as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&p| obj.log_value(p)).collect();
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = k;
        }
    }

    let last = TN_GRID_POINTS - 1;
    let (peak, clamped) = if best == last && obj.slope(p_c) > 0.0 {
        (p_c, true)
    } else {
        let lo = if best == 0 { grid[0] * 1e-6 } else { grid[best - 1] };
        let hi = if best == last { p_c } else { grid[best + 1] };
        let peak = if obj.slope(lo) > 0.0 && obj.slope(hi) <= 0.0 {
            math::bisect_sign(|p| obj.slope(p), lo, hi, 1e-15)
        } else {
            math::golden_section_minimize(|p| -obj.log_value(p), lo, hi, TN_TOLERANCE * 0.1, 400).0
        };
        (peak, false)
    };

    let t_n = if rho == 1.0 {
        peak
    } else {
        let target = ln(rho) + obj.log_value(peak);
        let first = grid
            .iter()
            .zip(&values)
            .position(|(&p, &v)| p <= peak && v >= target)
            .unwrap_or(best);
        let lo = if first == 0 { 0.0 } else { grid[first - 1] };
        let hi = grid[first].min(peak);
        if obj.log_value(hi) < target {
            peak
        } else {
            math::bisect_sign(
                |p| if p <= 0.0 { -1.0 } else { obj.log_value(p) - target },
                lo,
                hi,
                1e-15,
            )
        }
    };

    Ok(TnRecord {
        n,
        t_n,
        alpha_n: 1.0 / t_n - 1.0,
        clamped,
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeConfig;
    use num_bigint::BigUint;

    fn single(n: usize, m: usize) -> SvTable {
        SvTable::from_cells(LatticeConfig::square(), n, [((n, m), BigUint::from(3u32))]).unwrap()
    }

    #[test]
    fn single_term_rows_peak_at_n_over_n_plus_m() {
        let t = single(1, 6);
        let r = compute_tn(&t, 1, 0.5).unwrap();
        assert!((r.t_n - 1.0 / 7.0).abs() < 1e-12);
        assert!(!r.clamped);
        assert!((r.alpha_n - 6.0).abs() < 1e-10);

        let t = single(2, 8);
        assert!((compute_tn(&t, 2, 0.5).unwrap().t_n - 0.2).abs() < 1e-12);
    }

    #[test]
    fn clamps_at_critical_point() {
        // 4/(4+2) = 2/3 > 1/2
        let t = single(4, 2);
        let r = compute_tn(&t, 4, 0.5).unwrap();
        assert_eq!(r.t_n, 0.5);
        assert!(r.clamped);
        assert_eq!(r.alpha_n, 1.0);
    }

    #[test]
    fn empty_row_has_no_maximizer() {
        let t = SvTable::empty(LatticeConfig::square(), 3).unwrap();
        assert!(matches!(compute_tn(&t, 2, 0.5), Err(Error::NoMaximizer { n: 2 })));
        assert!(compute_tn(&single(1, 6), 2, 0.5).is_err());
    }

    #[test]
    fn relaxation_moves_left() {
        let t = single(1, 6);
        let r = compute_tn_relaxed(&t, 1, 0.5, 0.5).unwrap();
        assert!(r.t_n < 1.0 / 7.0);
        // p (1-p)^6 at the relaxed point is half the peak value.
        let f = |p: f64| p * (1.0 - p).powi(6);
        assert!((f(r.t_n) / f(1.0 / 7.0) - 0.5).abs() < 1e-9);
        assert!(compute_tn_relaxed(&t, 1, 0.5, 0.0).is_err());
    }
}

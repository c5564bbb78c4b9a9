use alloc::vec::Vec;
use core::cmp::Ordering;

use super::cluster::term;
use super::tn::{compute_tn, TnRecord};
use super::weights::sup_weight;
use crate::error::{Error, Result};
use crate::math::{self, exp, ln, sqrt};
use crate::table::SvTable;

/// An open interval `(lo, hi)` of ratios; `lo == hi` is the empty interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::domain(alloc::format!("interval ({lo}, {hi}) has lo > hi")))
        }
    }

    /// `(center - halfwidth, center + halfwidth)`
    pub fn ball(center: f64, halfwidth: f64) -> Result<Self> {
        if !(halfwidth >= 0.0) {
            return Err(Error::domain("ball halfwidth must be >= 0"));
        }
        Self::new(center - halfwidth, center + halfwidth)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    /// Whether `m/n` lies strictly inside, decided in exact arithmetic.
    pub fn contains_ratio(&self, m: usize, n: usize) -> bool {
        math::cmp_ratio(m as u64, n as u64, self.lo) == Ordering::Greater
            && math::cmp_ratio(m as u64, n as u64, self.hi) == Ordering::Less
    }

    /// Integers `m` with `m/n` inside, as an inclusive range (possibly empty).
    pub fn scaled_members(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        let start = math::floor(self.lo.max(0.0) * n as f64).max(0.0) as usize;
        let end = math::floor(self.hi.max(0.0) * n as f64) as usize + 1;
        (start.saturating_sub(1)..=end).filter(move |&m| self.contains_ratio(m, n))
    }
}

fn halfwidth(n: usize, g: f64) -> f64 {
    g * sqrt(ln(n as f64) / n as f64)
}

/// The window `(a_n - G sqrt(ln n / n), a_n + G sqrt(ln n / n))` around
/// `alpha_n = 1/t_n - 1`. The starred form raises the left end to `alpha`.
/// Returns `None` when the starred window is empty.
pub fn window_dn(n: usize, g: f64, alpha_n: f64, star: bool, alpha: f64) -> Result<Option<Interval>> {
    if n < 2 {
        return Err(Error::domain("window needs n >= 2 (ln n / n vanishes at n = 1)"));
    }
    if !(g > 0.0) {
        return Err(Error::domain(alloc::format!("window width G={g} must be > 0")));
    }
    let h = halfwidth(n, g);
    let mut lo = alpha_n - h;
    let hi = alpha_n + h;
    if star {
        lo = lo.max(alpha);
    }
    Ok(if lo > hi { None } else { Some(Interval { lo, hi }) })
}

/// Split of `P_{t_n}(|C(0)| = n)` by the ratio `m/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub n: usize,
    pub g: f64,
    pub tn: TnRecord,
    /// `D_n`; degenerate (empty) at `n = 1`.
    pub window: Interval,
    /// `m/n` inside `D_n`.
    pub c1: f64,
    /// `m/n` in `(0, 2(d-1))` outside `D_n`.
    pub c2: f64,
    /// `m` in `2(d-1)n ..= 2(d-1)n + 2d`, not already in `C1`.
    pub c3: f64,
    /// Mass at ratios none of the three sets cover; zero for a valid table.
    pub residual: f64,
    pub pmf_at_tn: f64,
    /// `sum_{m in n D_n} g_n(m/n)^n`, the finite-n window sum.
    pub g_window_sum: f64,
}

/// `C1 + C2 + C3` decomposition at `t_n`. Cells on a window boundary go to the
/// first matching set in the order C1, C2, C3.
pub fn decompose_c123(table: &SvTable, n: usize, g: f64, p_c: f64) -> Result<Decomposition> {
    if !(g > 0.0) {
        return Err(Error::domain(alloc::format!("window width G={g} must be > 0")));
    }
    let tn = compute_tn(table, n, p_c)?;
    let h = halfwidth(n, g);
    let window = Interval {
        lo: tn.alpha_n - h,
        hi: tn.alpha_n + h,
    };
    let d = table.config().dim();
    let ratio_limit = 2 * (d - 1) * n;
    let top = crate::lattice::max_outlying(d, n);

    let (mut c1, mut c2, mut c3, mut residual, mut pmf, mut g_window_sum) =
        (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (m, count) in table.row(n)? {
        let w = term(count, tn.t_n, n, m);
        pmf += w;
        if window.contains_ratio(m, n) {
            c1 += w;
            g_window_sum += entropy_ratio(count, n, m);
        } else if m > 0 && m < ratio_limit {
            c2 += w;
        } else if (ratio_limit..=top).contains(&m) {
            c3 += w;
        } else {
            residual += w;
        }
    }
    Ok(Decomposition {
        n,
        g,
        tn,
        window,
        c1,
        c2,
        c3,
        residual,
        pmf_at_tn: pmf,
        g_window_sum,
    })
}

/// `sigma n^n m^m / (n+m)^(n+m)`, which equals `g_n(m/n)^n`.
pub(crate) fn entropy_ratio(count: &num_bigint::BigUint, n: usize, m: usize) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let total = nf + mf;
    exp(math::ln_big(count) + nf * ln(nf / total) + if m == 0 { 0.0 } else { mf * ln(mf / total) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma33Report {
    /// `(n, r_n)`; `r_n = 0` when the top band of row `n` is empty.
    pub rows: Vec<(usize, f64)>,
    pub decreasing: bool,
    /// Every `r_n` in the upper half of the range is below one.
    pub eventually_below_one: bool,
}

/// `r_n = max_m [sigma(n,m) (m/n)^m / (1+m/n)^(n+m)]^(1/n)` over the top band
/// `m in 2(d-1)n ..= 2(d-1)n + 2d`.
pub fn lemma33_probe(table: &SvTable, n_lo: usize, n_hi: usize) -> Result<Lemma33Report> {
    if n_lo == 0 || n_lo > n_hi {
        return Err(Error::domain(alloc::format!("bad range {n_lo}..={n_hi}")));
    }
    table.check_n(n_hi)?;
    let d = table.config().dim();
    let mut rows = Vec::new();
    for n in n_lo..=n_hi {
        let band = 2 * (d - 1) * n..=crate::lattice::max_outlying(d, n);
        let r = table
            .row(n)?
            .filter(|(m, _)| band.contains(m))
            .map(|(m, c)| exp(ln(entropy_ratio(c, n, m)) / n as f64))
            .fold(0.0, f64::max);
        rows.push((n, r));
    }
    let decreasing = rows.windows(2).all(|w| w[1].1 < w[0].1);
    let half = rows.len() / 2;
    let eventually_below_one = rows[half..].iter().all(|&(_, r)| r < 1.0);
    Ok(Lemma33Report {
        rows,
        decreasing,
        eventually_below_one,
    })
}

/// `(n, sum_m sigma(n,m) sup_{p<p_c} p^n (1-p)^m)` for each enumerated row: the
/// summands of the uniform-convergence series.
pub fn sup_weight_sums(table: &SvTable, p_c: f64) -> Result<Vec<(usize, f64)>> {
    (1..=table.n_max())
        .map(|n| {
            let mut s = 0.0;
            for (m, c) in table.row(n)? {
                s += exp(math::ln_big(c) + ln(sup_weight(n, m, p_c)?));
            }
            Ok((n, s))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeConfig;
    use num_bigint::BigUint;

    #[test]
    fn window_arithmetic() {
        let w = window_dn(7, 1.0, 1.0, false, 1.0).unwrap().unwrap();
        let h = (7f64.ln() / 7.0).sqrt();
        assert_eq!((w.lo(), w.hi()), (1.0 - h, 1.0 + h));
        assert!((w.lo() - 0.472).abs() < 1e-3 && (w.hi() - 1.528).abs() < 1e-3);
        assert_eq!(window_dn(7, 1.0, 1.0, true, 2.0).unwrap(), None);
        let starred = window_dn(7, 1.0, 1.0, true, 0.8).unwrap().unwrap();
        assert_eq!(starred.lo(), 0.8);
        assert!(window_dn(7, 0.0, 1.0, false, 1.0).is_err());
        assert!(window_dn(1, 1.0, 1.0, false, 1.0).is_err());
    }

    #[test]
    fn exact_membership() {
        let w = Interval::new(0.5, 1.0).unwrap();
        assert!(!w.contains_ratio(1, 2));
        assert!(w.contains_ratio(2, 3));
        assert!(!w.contains_ratio(3, 3));
        assert_eq!(w.scaled_members(6).collect::<Vec<_>>(), [4, 5]);
        assert_eq!(Interval::new(1.0, 1.0).unwrap().scaled_members(5).count(), 0);
        assert!(Interval::new(2.0, 1.0).is_err());
    }

    #[test]
    fn single_edge_row_lands_in_top_band() {
        let t = SvTable::from_cells(LatticeConfig::square(), 1, [((1, 6), BigUint::from(4u32))])
            .unwrap();
        let dec = decompose_c123(&t, 1, 1.0, 0.5).unwrap();
        assert_eq!(dec.c1, 0.0);
        assert_eq!(dec.c2, 0.0);
        assert_eq!(dec.c3, dec.pmf_at_tn);
        assert!(dec.c3 > 0.0);
    }

    #[test]
    fn lemma33_single_edge() {
        let t = SvTable::from_cells(LatticeConfig::square(), 1, [((1, 6), BigUint::from(4u32))])
            .unwrap();
        let r = lemma33_probe(&t, 1, 1).unwrap();
        assert!((r.rows[0].1 - 4.0 * 6f64.powi(6) / 7f64.powi(7)).abs() < 1e-14);
        let empty = SvTable::empty(LatticeConfig::square(), 2).unwrap();
        assert!(lemma33_probe(&empty, 1, 2).unwrap().rows.iter().all(|r| r.1 == 0.0));
    }
}

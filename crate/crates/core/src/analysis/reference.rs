use alloc::sync::Arc;
use core::fmt;

use super::cluster::{cluster_size_pmf, f_n};
use super::tn::compute_tn;
use super::weights::log_delyon_growth;
use super::windows::Interval;
use crate::error::{Error, Result};
use crate::math::{self, exp, ln, sqrt};
use crate::table::SvTable;

/// Which stand-in is used for the asymptotic growth rate `f`, which no finite
/// computation can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FRefMode {
    /// `(b+1)^(b+1) / b^b`: exact up to `alpha`, an upper bound beyond.
    DelyonClosedForm,
    /// Closed form up to `alpha`; beyond it `f_n(b)` at the largest enumerated
    /// `n` whose cell `floor(b n)` is nonzero.
    TableExtrapolation,
    /// A caller-supplied correction factor `g(alpha + delta)`.
    Synthetic,
}

impl FRefMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FRefMode::DelyonClosedForm => "delyon_closed_form",
            FRefMode::TableExtrapolation => "table_extrapolation",
            FRefMode::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for FRefMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

type SyntheticG = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Reference growth rate `f(b) = g(b) (b+1)^(b+1) / b^b`.
#[derive(Clone)]
pub struct FRef<'t> {
    mode: FRefMode,
    alpha: f64,
    table: Option<&'t SvTable>,
    /// `-ln g(alpha + delta)` as a function of `delta >= 0`.
    synthetic: Option<SyntheticG>,
}

impl fmt::Debug for FRef<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FRef")
            .field("mode", &self.mode)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl<'t> FRef<'t> {
    pub fn delyon(alpha: f64) -> Self {
        Self {
            mode: FRefMode::DelyonClosedForm,
            alpha,
            table: None,
            synthetic: None,
        }
    }

    pub fn table_extrapolation(table: &'t SvTable) -> Self {
        Self {
            mode: FRefMode::TableExtrapolation,
            alpha: table.config().alpha(),
            table: Some(table),
            synthetic: None,
        }
    }

    /// `neg_log_g(delta) = -ln g(alpha + delta)` for `delta >= 0`; `g = 1` below `alpha`.
    pub fn synthetic(alpha: f64, neg_log_g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            mode: FRefMode::Synthetic,
            alpha,
            table: None,
            synthetic: Some(Arc::new(neg_log_g)),
        }
    }

    pub fn mode(&self) -> FRefMode {
        self.mode
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Whether the value at `beta` is the true `f` rather than a proxy.
    pub fn is_exact_at(&self, beta: f64) -> bool {
        beta <= self.alpha
    }

    /// `-ln g(alpha + delta)`; `+inf` where the reference vanishes.
    pub fn neg_log_g_offset(&self, delta: f64) -> Result<f64> {
        if delta <= 0.0 {
            return Ok(0.0);
        }
        let beta = self.alpha + delta;
        match self.mode {
            FRefMode::DelyonClosedForm => Ok(0.0),
            FRefMode::Synthetic => Ok((self.synthetic.as_ref().expect("synthetic g"))(delta)),
            FRefMode::TableExtrapolation => {
                let f = self.f(beta)?;
                Ok(if f > 0.0 {
                    log_delyon_growth(beta) - ln(f)
                } else {
                    f64::INFINITY
                })
            }
        }
    }

    /// `g(beta)`
    pub fn g(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0) {
            return Err(Error::domain(alloc::format!("reference needs beta > 0, got {beta}")));
        }
        Ok(exp(-self.neg_log_g_offset(beta - self.alpha)?))
    }

    /// `f(beta)`
    pub fn f(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::domain(alloc::format!("reference needs beta > 0, got {beta}")));
        }
        let closed = exp(log_delyon_growth(beta));
        if beta <= self.alpha {
            return Ok(closed);
        }
        match self.mode {
            FRefMode::DelyonClosedForm => Ok(closed),
            FRefMode::Synthetic => Ok(closed * exp(-self.neg_log_g_offset(beta - self.alpha)?)),
            FRefMode::TableExtrapolation => {
                let table = self.table.expect("table reference");
                for n in (1..=table.n_max()).rev() {
                    let f = f_n(table, n, beta)?;
                    if f > 0.0 {
                        return Ok(f);
                    }
                }
                Ok(0.0)
            }
        }
    }
}

/// `a_n(beta) = sigma(n, floor(beta n)) / f_ref(beta)^n`.
pub fn a_n_ratio(table: &SvTable, n: usize, beta: f64, f_ref: &FRef<'_>) -> Result<f64> {
    table.check_n(n)?;
    let f = f_ref.f(beta)?;
    if f == 0.0 {
        return Err(Error::UndefinedRatio { beta });
    }
    let m = math::floor_ratio(beta, n);
    Ok(match table.sigma_ref(n, m) {
        Some(c) => exp(math::ln_big(c) - n as f64 * ln(f)),
        None => 0.0,
    })
}

/// `sum_{m/n in (center - halfwidth, center + halfwidth)} a_n(m/n)`.
pub fn window_sums(
    table: &SvTable,
    n: usize,
    center: f64,
    halfwidth: f64,
    f_ref: &FRef<'_>,
) -> Result<f64> {
    table.check_n(n)?;
    let window = Interval::ball(center, halfwidth)?;
    let mut sum = 0.0;
    for (m, _) in table.row(n)? {
        if m > 0 && window.contains_ratio(m, n) {
            sum += a_n_ratio(table, n, m as f64 / n as f64, f_ref)?;
        }
    }
    Ok(sum)
}

/// Both sides of the two-sided window bounds at `p_c` and at `t_n`:
/// narrow sums over `B(center, n^-1/2)`, the probability in the middle, and
/// wide sums over `B(center, C sqrt(ln n / n))`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowInequalities {
    pub n: usize,
    pub c: f64,
    pub f_ref_mode: FRefMode,
    pub alpha: f64,
    pub alpha_n: f64,
    pub narrow_at_alpha: f64,
    pub pmf_at_pc: f64,
    pub wide_at_alpha: f64,
    pub narrow_at_alpha_n: f64,
    pub pmf_at_tn: f64,
    pub wide_at_alpha_n: f64,
}

impl WindowInequalities {
    /// Largest `eps` for which `eps * narrow <= pmf` holds at `p_c`.
    pub fn implied_eps_at_pc(&self) -> f64 {
        self.pmf_at_pc / self.narrow_at_alpha
    }

    pub fn implied_eps_at_tn(&self) -> f64 {
        self.pmf_at_tn / self.narrow_at_alpha_n
    }

    /// `wide - pmf`: the additive slack the upper bound needs.
    pub fn upper_slack_at_pc(&self) -> f64 {
        self.wide_at_alpha - self.pmf_at_pc
    }

    pub fn upper_slack_at_tn(&self) -> f64 {
        self.wide_at_alpha_n - self.pmf_at_tn
    }
}

pub fn window_inequalities(
    table: &SvTable,
    n: usize,
    c: f64,
    f_ref: &FRef<'_>,
) -> Result<WindowInequalities> {
    let p_c = table.config().p_c();
    let alpha = table.config().alpha();
    let tn = compute_tn(table, n, p_c)?;
    let nf = n as f64;
    let narrow = 1.0 / sqrt(nf);
    let wide = c * sqrt(ln(nf) / nf);
    Ok(WindowInequalities {
        n,
        c,
        f_ref_mode: f_ref.mode(),
        alpha,
        alpha_n: tn.alpha_n,
        narrow_at_alpha: window_sums(table, n, alpha, narrow, f_ref)?,
        pmf_at_pc: cluster_size_pmf(table, p_c, n)?,
        wide_at_alpha: window_sums(table, n, alpha, wide, f_ref)?,
        narrow_at_alpha_n: window_sums(table, n, tn.alpha_n, narrow, f_ref)?,
        pmf_at_tn: cluster_size_pmf(table, tn.t_n, n)?,
        wide_at_alpha_n: window_sums(table, n, tn.alpha_n, wide, f_ref)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeConfig;
    use num_bigint::BigUint;

    fn tiny() -> SvTable {
        SvTable::from_cells(
            LatticeConfig::square(),
            2,
            [((1, 6), BigUint::from(4u32)), ((2, 8), BigUint::from(18u32))],
        )
        .unwrap()
    }

    #[test]
    fn delyon_is_closed_form() {
        let f = FRef::delyon(1.0);
        assert_eq!(f.f(1.0).unwrap(), 4.0);
        assert!((f.f(0.5).unwrap() - 1.5f64.powf(1.5) / 0.5f64.powf(0.5)).abs() < 1e-14);
        assert_eq!(f.g(0.7).unwrap(), 1.0);
        assert!(f.is_exact_at(1.0) && !f.is_exact_at(1.5));
    }

    #[test]
    fn a_n_against_extrapolated_reference() {
        let t = tiny();
        let ext = FRef::table_extrapolation(&t);
        assert!((ext.f(4.0).unwrap() - 18f64.sqrt()).abs() < 1e-14);
        assert!((a_n_ratio(&t, 2, 4.0, &ext).unwrap() - 1.0).abs() < 1e-13);
        // no row has a nonzero cell at these ratios
        assert!(matches!(a_n_ratio(&t, 2, 3.0, &ext), Err(Error::UndefinedRatio { .. })));
        assert!(matches!(a_n_ratio(&t, 1, 9.0, &ext), Err(Error::UndefinedRatio { .. })));
        let delyon = FRef::delyon(1.0);
        assert_eq!(a_n_ratio(&t, 2, 3.0, &delyon).unwrap(), 0.0);
    }

    #[test]
    fn window_sum_cases() {
        let t = tiny();
        let ext = FRef::table_extrapolation(&t);
        assert_eq!(window_sums(&t, 2, 1.0, 0.1, &ext).unwrap(), 0.0);
        let single = window_sums(&t, 2, 4.0, 0.1, &ext).unwrap();
        assert_eq!(single, a_n_ratio(&t, 2, 4.0, &ext).unwrap());
    }

    #[test]
    fn synthetic_reference() {
        let f = FRef::synthetic(1.0, |d| d * d);
        assert_eq!(f.neg_log_g_offset(-0.5).unwrap(), 0.0);
        assert!((f.g(1.5).unwrap() - (-0.25f64).exp()).abs() < 1e-15);
        assert_eq!(f.mode().as_str(), "synthetic");
    }
}

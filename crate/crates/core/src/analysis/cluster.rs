use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::weights::{log_delyon_growth, weight};
use crate::error::{Error, Result};
use crate::math::{self, exp, ln};
use crate::table::SvTable;

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(alloc::format!("probability p={p} must lie in (0, 1)")))
    }
}

/// `sigma(n, floor(beta n))^(1/n)`, zero when the cell is empty.
pub fn f_n(table: &SvTable, n: usize, beta: f64) -> Result<f64> {
    table.check_n(n)?;
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::domain(alloc::format!("beta={beta} must be >= 0")));
    }
    let m = math::floor_ratio(beta, n);
    Ok(match table.sigma_ref(n, m) {
        Some(c) => exp(math::ln_big(c) / n as f64),
        None => 0.0,
    })
}

/// `f_n(beta) beta^beta / (beta+1)^(beta+1)`: the finite-n correction factor
/// against the closed-form growth rate.
pub fn g_n(table: &SvTable, n: usize, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::domain(alloc::format!("g_n needs beta > 0, got {beta}")));
    }
    let f = f_n(table, n, beta)?;
    if f == 0.0 {
        return Ok(0.0);
    }
    Ok(exp(ln(f) - log_delyon_growth(beta)))
}

/// `P_p(|C(0)| = n) = sum_m sigma(n, m) p^n (1-p)^m`.
pub fn cluster_size_pmf(table: &SvTable, p: f64, n: usize) -> Result<f64> {
    check_probability(p)?;
    Ok(table
        .row(n)?
        .map(|(m, c)| term(c, p, n, m))
        .sum())
}

#[inline]
pub(crate) fn term(count: &BigUint, p: f64, n: usize, m: usize) -> f64 {
    if n + m <= 64 {
        count.to_f64().unwrap_or(f64::INFINITY) * weight(p, 1.0 - p, n, m)
    } else {
        exp(math::ln_big(count) + n as f64 * ln(p) + m as f64 * math::ln_1p(-p))
    }
}

/// `ln P_p(|C(0)| = n)`, accumulated in the log domain; `-inf` for an empty row.
pub fn log_cluster_size_pmf(table: &SvTable, p: f64, n: usize) -> Result<f64> {
    check_probability(p)?;
    let (lp, lq) = (ln(p), math::ln_1p(-p));
    let logs = table.row_logs(n)?;
    Ok(math::log_sum_exp(
        logs.iter().map(|&(m, ls)| ls + n as f64 * lp + m as f64 * lq),
    ))
}

/// Exact rational value of the cluster-size law at rational `p = num/den`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactProbability {
    pub numerator: BigUint,
    pub denominator: BigUint,
}

impl ExactProbability {
    pub fn to_f64(&self) -> f64 {
        math::ratio_to_f64(&self.numerator, &self.denominator)
    }
}

/// `P_p(|C(0)| = n)` at `p = num/den` in exact rational arithmetic.
pub fn cluster_size_pmf_exact(
    table: &SvTable,
    num: u64,
    den: u64,
    n: usize,
) -> Result<ExactProbability> {
    if num == 0 || num >= den {
        return Err(Error::domain(alloc::format!("p={num}/{den} must lie in (0, 1)")));
    }
    let m_top = table.row(n)?.map(|(m, _)| m).max().unwrap_or(0);
    let (a, b, den) = (BigUint::from(num), BigUint::from(den - num), BigUint::from(den));
    let pn = a.pow(n as u32);
    let mut numerator = BigUint::zero();
    for (m, c) in table.row(n)? {
        // c a^n b^m den^(m_top - m) over den^(n + m_top)
        numerator += c * &pn * b.pow(m as u32) * den.pow((m_top - m) as u32);
    }
    let denominator = if numerator.is_zero() {
        BigUint::one()
    } else {
        den.pow((n + m_top) as u32)
    };
    Ok(ExactProbability {
        numerator,
        denominator,
    })
}

/// `sigma_N(p) = sum_{n <= N} P_p(|C(0)| = n)`; `N = 0` is the empty sum.
pub fn sigma_partial(table: &SvTable, p: f64, upto: usize) -> Result<f64> {
    check_probability(p)?;
    if upto > table.n_max() {
        return Err(Error::OutOfRange {
            n: upto,
            n_max: table.n_max(),
        });
    }
    (1..=upto).map(|n| cluster_size_pmf(table, p, n)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeConfig;

    fn tiny() -> SvTable {
        SvTable::from_cells(
            LatticeConfig::square(),
            2,
            [((1, 6), BigUint::from(4u32)), ((2, 8), BigUint::from(18u32))],
        )
        .unwrap()
    }

    #[test]
    fn growth_rates() {
        let t = tiny();
        assert_eq!(f_n(&t, 1, 0.5).unwrap(), 0.0);
        assert!((f_n(&t, 2, 4.0).unwrap() - 18f64.sqrt()).abs() < 1e-14);
        assert!((f_n(&t, 2, 4.0).unwrap() - 4.242_641).abs() < 1e-6);
        assert!((f_n(&t, 1, 6.0).unwrap() - 4.0).abs() < 1e-14);
        assert!(f_n(&t, 3, 1.0).is_err());

        let g2 = g_n(&t, 2, 4.0).unwrap();
        assert!((g2 - 18f64.sqrt() * 256.0 / 3125.0).abs() < 1e-14);
        assert!((g2 - 0.347_557).abs() < 1e-6);
        let g1 = g_n(&t, 1, 6.0).unwrap();
        assert!((g1 - 4.0 * 6f64.powi(6) / 7f64.powi(7)).abs() < 1e-15);
        assert!((g1 - 0.226_611).abs() < 1e-6);
        assert_eq!(g_n(&t, 1, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn pmf_values() {
        let t = tiny();
        assert_eq!(cluster_size_pmf(&t, 0.5, 1).unwrap(), 0.03125);
        let v = cluster_size_pmf(&t, 0.3, 2).unwrap();
        assert!((v - 18.0 * 0.09 * 0.7f64.powi(8)).abs() < 1e-16);
        assert!((v - 0.093_389_8).abs() < 1e-7);
        assert!(cluster_size_pmf(&t, 1.0, 1).is_err());

        let empty = SvTable::empty(LatticeConfig::square(), 3).unwrap();
        assert_eq!(cluster_size_pmf(&empty, 0.4, 3).unwrap(), 0.0);
        assert_eq!(log_cluster_size_pmf(&empty, 0.4, 3).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn exact_rational_pmf() {
        let t = tiny();
        let e = cluster_size_pmf_exact(&t, 3, 10, 2).unwrap();
        // 18 * 3^2 * 7^8 / 10^10
        assert_eq!(e.numerator, BigUint::from(18u64 * 9 * 5_764_801));
        assert_eq!(e.denominator, BigUint::from(10u64).pow(10));
        let float = cluster_size_pmf(&t, 0.3, 2).unwrap();
        assert!((e.to_f64() - float).abs() <= 1e-12 * float);
    }

    #[test]
    fn partial_sums() {
        let t = tiny();
        assert_eq!(sigma_partial(&t, 0.5, 0).unwrap(), 0.0);
        assert_eq!(sigma_partial(&t, 0.5, 1).unwrap(), 0.03125);
        assert!(sigma_partial(&t, 0.5, 3).is_err());
    }
}

//! The exact count table `sigma(n, m)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::LatticeConfig;
use crate::math;

/// Exact counts of origin-containing bond animals by `(n, m)`: `n` edges and
/// `m` outlying edges. Only nonzero cells are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SvTable {
    config: LatticeConfig,
    n_max: usize,
    counts: BTreeMap<(usize, usize), BigUint>,
}

impl SvTable {
    pub fn empty(config: LatticeConfig, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::Table("n_max must be at least 1".into()));
        }
        Ok(Self {
            config,
            n_max,
            counts: BTreeMap::new(),
        })
    }

    /// Builds a table from raw cells. Cells must have `1 <= n <= n_max`;
    /// zero counts are dropped and repeated cells are rejected.
    pub fn from_cells(
        config: LatticeConfig,
        n_max: usize,
        cells: impl IntoIterator<Item = ((usize, usize), BigUint)>,
    ) -> Result<Self> {
        let mut table = Self::empty(config, n_max)?;
        for ((n, m), count) in cells {
            if n == 0 || n > n_max {
                return Err(Error::Table(format!("cell ({n},{m}) outside 1..={n_max}")));
            }
            if count.is_zero() {
                continue;
            }
            if table.counts.insert((n, m), count).is_some() {
                return Err(Error::Table(format!("duplicate cell ({n},{m})")));
            }
        }
        Ok(table)
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_max {
            Err(Error::OutOfRange {
                n,
                n_max: self.n_max,
            })
        } else {
            Ok(())
        }
    }

    /// `sigma(n, m)`; zero for an absent cell, an error for unenumerated `n`.
    pub fn sigma(&self, n: usize, m: usize) -> Result<BigUint> {
        self.check_n(n)?;
        Ok(self.counts.get(&(n, m)).cloned().unwrap_or_default())
    }

    pub(crate) fn sigma_ref(&self, n: usize, m: usize) -> Option<&BigUint> {
        self.counts.get(&(n, m))
    }

    /// Nonzero cells of row `n` in increasing `m`.
    pub fn row(&self, n: usize) -> Result<impl Iterator<Item = (usize, &BigUint)> + '_> {
        self.check_n(n)?;
        Ok(self
            .counts
            .range((n, 0)..=(n, usize::MAX))
            .map(|(&(_, m), c)| (m, c)))
    }

    /// Row `n` as `(m, ln sigma)` pairs.
    pub fn row_logs(&self, n: usize) -> Result<Vec<(usize, f64)>> {
        Ok(self.row(n)?.map(|(m, c)| (m, math::ln_big(c))).collect())
    }

    /// All nonzero cells sorted by `(n, m)`.
    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), &BigUint)> + '_ {
        self.counts.iter().map(|(&k, v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Sum of a row, i.e. the number of `n`-edge animals containing the origin.
    pub fn row_total(&self, n: usize) -> Result<BigUint> {
        Ok(self.row(n)?.map(|(_, c)| c).sum())
    }

    /// Overwrites one cell. Used to audit corrupted tables; a zero count removes the cell.
    pub fn set_cell(&mut self, n: usize, m: usize, count: BigUint) -> Result<()> {
        self.check_n(n)?;
        if count.is_zero() {
            self.counts.remove(&(n, m));
        } else {
            self.counts.insert((n, m), count);
        }
        Ok(())
    }
}

/// `(n+m)^(n+m) / (n^n m^m)` compared exactly: true when `count` is within it.
pub fn within_entropy_bound(count: &BigUint, n: usize, m: usize) -> bool {
    let pow = |b: usize, e: usize| -> BigUint {
        if e == 0 {
            BigUint::one()
        } else {
            BigUint::from(b).pow(e as u32)
        }
    };
    count * pow(n, n) * pow(m, m) <= pow(n + m, n + m)
}

/// One line of an audit report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Largest `n` the audit compares against the brute-force enumerator.
pub const ORACLE_MAX_N: usize = 6;

/// Audits a table: support bound, binomial-entropy bound, and cell-by-cell
/// agreement with [`crate::naive`] for `n <= min(n_max, 6)`. Failures are
/// reported, never raised.
pub fn verify_table(table: &SvTable) -> VerifyReport {
    let d = table.config().dim();
    let mut checks = Vec::new();

    let support_violations: Vec<(usize, usize)> = table
        .cells()
        .filter(|&((n, m), _)| m > crate::lattice::max_outlying(d, n))
        .map(|(k, _)| k)
        .collect();
    checks.push(CheckOutcome {
        name: "support_bound".into(),
        passed: support_violations.is_empty(),
        detail: if support_violations.is_empty() {
            format!("all {} cells satisfy m <= 2(d-1)n + 2d", table.len())
        } else {
            format!("cells beyond 2(d-1)n + 2d: {support_violations:?}")
        },
    });

    let entropy_violations: Vec<(usize, usize)> = table
        .cells()
        .filter(|&((n, m), c)| !within_entropy_bound(c, n, m))
        .map(|(k, _)| k)
        .collect();
    checks.push(CheckOutcome {
        name: "entropy_bound".into(),
        passed: entropy_violations.is_empty(),
        detail: if entropy_violations.is_empty() {
            format!("all {} cells satisfy sigma <= (n+m)^(n+m)/(n^n m^m)", table.len())
        } else {
            format!("cells above the binomial-entropy bound: {entropy_violations:?}")
        },
    });

    let upto = table.n_max().min(ORACLE_MAX_N);
    let oracle = crate::naive::count_animals(d, upto);
    let mut mismatches = Vec::new();
    for n in 1..=upto {
        let mut ms: Vec<usize> = table.row(n).expect("n in range").map(|(m, _)| m).collect();
        ms.extend(oracle.keys().filter(|k| k.0 == n).map(|k| k.1));
        ms.sort_unstable();
        ms.dedup();
        for m in ms {
            let got = table.sigma_ref(n, m).cloned().unwrap_or_default();
            let want = oracle.get(&(n, m)).map(|&c| BigUint::from(c)).unwrap_or_default();
            if got != want {
                mismatches.push(format!("({n},{m}): table {got} vs oracle {want}"));
            }
        }
    }
    checks.push(CheckOutcome {
        name: "naive_oracle".into(),
        passed: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            format!("rows n <= {upto} agree with the brute-force enumerator")
        } else {
            mismatches.join("; ")
        },
    });

    VerifyReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SvTable {
        SvTable::from_cells(
            LatticeConfig::square(),
            2,
            [((1, 6), BigUint::from(4u32)), ((2, 8), BigUint::from(18u32))],
        )
        .unwrap()
    }

    #[test]
    fn sigma_lookup_and_range() {
        let t = tiny();
        assert_eq!(t.sigma(1, 6).unwrap(), BigUint::from(4u32));
        assert_eq!(t.sigma(1, 5).unwrap(), BigUint::zero());
        assert_eq!(t.sigma(2, 8).unwrap(), BigUint::from(18u32));
        assert!(matches!(t.sigma(3, 8), Err(Error::OutOfRange { n: 3, n_max: 2 })));
        assert!(t.sigma(0, 0).is_err());
    }

    #[test]
    fn rejects_bad_cells() {
        let c = LatticeConfig::square();
        assert!(SvTable::from_cells(c, 1, [((2, 8), BigUint::one())]).is_err());
        assert!(SvTable::from_cells(
            c,
            1,
            [((1, 6), BigUint::one()), ((1, 6), BigUint::one())]
        )
        .is_err());
        assert!(SvTable::empty(c, 0).is_err());
    }

    #[test]
    fn entropy_bound_edges() {
        // 7^7 / 6^6 = 17.65..., so 17 fits and 18 does not.
        assert!(within_entropy_bound(&BigUint::from(17u32), 1, 6));
        assert!(!within_entropy_bound(&BigUint::from(18u32), 1, 6));
        assert!(within_entropy_bound(&BigUint::one(), 3, 0));
        assert!(!within_entropy_bound(&BigUint::from(2u32), 3, 0));
    }

    #[test]
    fn perturbed_count_fails_only_the_oracle() {
        let mut t = tiny();
        t.set_cell(1, 6, BigUint::from(5u32)).unwrap();
        let report = verify_table(&t);
        let by_name = |n: &str| report.checks.iter().find(|c| c.name == n).unwrap().passed;
        assert!(by_name("support_bound"));
        assert!(by_name("entropy_bound"));
        assert!(!by_name("naive_oracle"));
    }

    #[test]
    fn out_of_support_cell_fails_support() {
        let mut t = tiny();
        t.set_cell(1, 7, BigUint::one()).unwrap();
        let report = verify_table(&t);
        assert!(!report.checks[0].passed);
        assert!(!report.all_passed());
    }
}

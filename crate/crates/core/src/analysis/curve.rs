use alloc::vec::Vec;

use super::cluster::g_n;
use crate::error::{Error, Result};
use crate::table::SvTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GSample {
    pub beta: f64,
    pub n: usize,
    pub g_value: f64,
}

/// Samples of finite-n correction factors `g_n(beta)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GCurve {
    samples: Vec<GSample>,
}

impl GCurve {
    /// Validates positivity and strictly increasing `beta` within each `n`.
    pub fn from_samples(samples: Vec<GSample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if !(s.g_value > 0.0) || !(s.beta > 0.0) {
                return Err(Error::domain(alloc::format!("sample {i} has nonpositive beta or g")));
            }
            if let Some(prev) = samples[..i].iter().rev().find(|p| p.n == s.n) {
                if prev.beta >= s.beta {
                    return Err(Error::domain(alloc::format!(
                        "betas not increasing within n={} at sample {i}",
                        s.n
                    )));
                }
            }
        }
        Ok(Self { samples })
    }

    /// `g_n(m/n)` at every nonzero cell of row `n`.
    pub fn from_table_row(table: &SvTable, n: usize) -> Result<Self> {
        let mut samples = Vec::new();
        for (m, _) in table.row(n)? {
            if m == 0 {
                continue;
            }
            let beta = m as f64 / n as f64;
            samples.push(GSample {
                beta,
                n,
                g_value: g_n(table, n, beta)?,
            });
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[GSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

//! Serializable views of the core result types.

use serde::Serialize;
use svperc_core::analysis::{Decomposition, TnRecord, WindowInequalities};
use svperc_core::exponents::{ExponentFit, QRecord, ScalingProbe};

pub const PROXY_LABEL: &str = "finite-n proxy";

#[derive(Debug, Clone, Serialize)]
pub struct TableInfo {
    pub source: String,
    pub sha256: String,
    pub d: usize,
    pub n_max: usize,
    pub p_c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tn {
    pub n: usize,
    pub t_n: f64,
    pub alpha_n: f64,
    pub clamped: bool,
    pub rho: f64,
}

impl From<&TnRecord> for Tn {
    fn from(r: &TnRecord) -> Self {
        Self {
            n: r.n,
            t_n: r.t_n,
            alpha_n: r.alpha_n,
            clamped: r.clamped,
            rho: r.rho,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Split {
    pub n: usize,
    pub g: f64,
    pub t_n: f64,
    pub alpha_n: f64,
    pub window: (f64, f64),
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub residual: f64,
    pub pmf_at_tn: f64,
    pub g_window_sum: f64,
}

impl From<&Decomposition> for Split {
    fn from(d: &Decomposition) -> Self {
        Self {
            n: d.n,
            g: d.g,
            t_n: d.tn.t_n,
            alpha_n: d.tn.alpha_n,
            window: (d.window.lo(), d.window.hi()),
            c1: d.c1,
            c2: d.c2,
            c3: d.c3,
            residual: d.residual,
            pmf_at_tn: d.pmf_at_tn,
            g_window_sum: d.g_window_sum,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Inequalities {
    pub n: usize,
    pub c: f64,
    pub f_ref_mode: String,
    pub alpha: f64,
    pub alpha_n: f64,
    pub narrow_at_alpha: f64,
    pub pmf_at_pc: f64,
    pub wide_at_alpha: f64,
    pub narrow_at_alpha_n: f64,
    pub pmf_at_tn: f64,
    pub wide_at_alpha_n: f64,
    pub implied_eps_at_pc: f64,
    pub implied_eps_at_tn: f64,
}

impl From<&WindowInequalities> for Inequalities {
    fn from(w: &WindowInequalities) -> Self {
        Self {
            n: w.n,
            c: w.c,
            f_ref_mode: w.f_ref_mode.to_string(),
            alpha: w.alpha,
            alpha_n: w.alpha_n,
            narrow_at_alpha: w.narrow_at_alpha,
            pmf_at_pc: w.pmf_at_pc,
            wide_at_alpha: w.wide_at_alpha,
            narrow_at_alpha_n: w.narrow_at_alpha_n,
            pmf_at_tn: w.pmf_at_tn,
            wide_at_alpha_n: w.wide_at_alpha_n,
            implied_eps_at_pc: w.implied_eps_at_pc(),
            implied_eps_at_tn: w.implied_eps_at_tn(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Fit {
    pub exponent: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub window: String,
    pub r_squared: f64,
    pub n_points: usize,
    pub dropped: usize,
    pub label: &'static str,
}

impl From<&ExponentFit> for Fit {
    fn from(f: &ExponentFit) -> Self {
        Self {
            exponent: f.exponent,
            stderr: f.stderr,
            intercept: f.intercept,
            window: f.window.to_string(),
            r_squared: f.r_squared,
            n_points: f.n_points,
            dropped: f.dropped,
            label: PROXY_LABEL,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Q {
    pub p: f64,
    pub q_limit: Option<f64>,
    pub q_variational: Option<f64>,
    pub beta_p: Option<f64>,
    pub beta_p_offset: Option<f64>,
    pub f_ref_mode: Option<String>,
    pub interior: bool,
    pub within_expected: bool,
}

impl From<&QRecord> for Q {
    fn from(r: &QRecord) -> Self {
        Self {
            p: r.p,
            q_limit: r.q_limit,
            q_variational: r.q_variational,
            beta_p: r.beta_p,
            beta_p_offset: r.beta_p_offset,
            f_ref_mode: r.f_ref_mode.map(|m| m.to_string()),
            interior: r.interior,
            within_expected: r.within_expected,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Scaling {
    pub p: f64,
    pub y_p: f64,
    pub sigma_p: Option<f64>,
    pub sigma_p_prime: Option<f64>,
    pub skipped: Option<String>,
}

impl From<&ScalingProbe> for Scaling {
    fn from(s: &ScalingProbe) -> Self {
        Self {
            p: s.p,
            y_p: s.y_p,
            sigma_p: s.sigma_p,
            sigma_p_prime: s.sigma_p_prime,
            skipped: s.skipped.clone(),
        }
    }
}

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::math::{self, exp, ln, ln_1p, xlnx};

/// `(b+1) ln(b+1) - b ln b`, the log of the closed-form growth rate
/// `(b+1)^(b+1) / b^b`.
#[inline]
pub fn log_delyon_growth(beta: f64) -> f64 {
    xlnx(beta + 1.0) - xlnx(beta)
}

/// `phi(a, b)` given the difference `gap = b - a` separately, so that callers
/// holding `a` and `b` as offsets from a common base keep full precision.
///
/// Near the diagonal the two logarithms cancel to second order, so there the
/// value comes from the series
/// `sum_k (-1)^(k+1) gap^(k+1) ((a+1)^-k - a^-k) / (k(k+1))`.
#[inline]
pub(crate) fn phi_with_gap(a: f64, b: f64, gap: f64) -> f64 {
    let u = gap / a;
    if u.abs() > 0.1 {
        return (b + 1.0) * ln_1p(gap / (a + 1.0)) - b * ln_1p(u);
    }
    let v = gap / (a + 1.0);
    let (mut vk, mut uk) = (v, u);
    let mut sum = 0.0;
    for k in 1..64 {
        let kf = k as f64;
        let term = gap * (vk - uk) / (kf * (kf + 1.0));
        sum += if k % 2 == 1 { term } else { -term };
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        vk *= v;
        uk *= u;
    }
    sum
}

/// `(b+1) ln(b+1) - b ln b + b ln a - (b+1) ln(a+1)`.
///
/// Nonpositive, zero exactly on the diagonal. For `p = 1/(1+a)` and `b = m/n`,
/// `p^n (1-p)^m = (b^b / (b+1)^(b+1))^n exp(n phi(a, b))`.
pub fn phi(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::domain(alloc::format!(
            "phi needs positive arguments, got ({alpha}, {beta})"
        )));
    }
    Ok(phi_with_gap(alpha, beta, beta - alpha))
}

/// `b ln g - (b+1) ln(g+1) - b ln a + (b+1) ln(a+1)`.
///
/// With `t = 1/(1+g)`: `t^n (1-t)^m = a^m / (1+a)^(n+m) exp(n big_phi(g, a, m/n))`.
pub fn big_phi(gamma: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(gamma > 0.0 && alpha > 0.0 && beta > 0.0) {
        return Err(Error::domain(alloc::format!(
            "big_phi needs positive arguments, got ({gamma}, {alpha}, {beta})"
        )));
    }
    let gap = gamma - alpha;
    Ok(beta * ln_1p(gap / alpha) - (beta + 1.0) * ln_1p(gap / (alpha + 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorPoint {
    pub gamma: f64,
    /// `phi(a, a + gamma) + gamma^2 / (2 a (a+1))`
    pub remainder: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorCheck {
    pub alpha: f64,
    pub points: Vec<TaylorPoint>,
    /// Log-log slope of `|remainder|` against `gamma`; 3 for a cubic remainder.
    pub slope: f64,
    pub r_squared: f64,
}

/// Fits the order of the remainder of the quadratic expansion of `phi` about
/// the diagonal.
pub fn phi_taylor_check(alpha: f64, gammas: &[f64]) -> Result<TaylorCheck> {
    if !(alpha > 0.0) {
        return Err(Error::domain("taylor check needs alpha > 0"));
    }
    if gammas.len() < 3 {
        return Err(Error::InsufficientData {
            context: "phi taylor check",
            needed: 3,
            got: gammas.len(),
        });
    }
    let mut points = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        if !(gamma > 0.0 && gamma <= alpha / 2.0) {
            return Err(Error::domain(alloc::format!(
                "gamma={gamma} must lie in (0, alpha/2]"
            )));
        }
        let remainder = phi(alpha, alpha + gamma)? + gamma * gamma / (2.0 * alpha * (alpha + 1.0));
        points.push(TaylorPoint { gamma, remainder });
    }
    let xs: Vec<f64> = points.iter().map(|p| ln(p.gamma)).collect();
    let ys: Vec<f64> = points.iter().map(|p| ln(p.remainder.abs())).collect();
    let fit = math::fit_line(&xs, &ys).ok_or(Error::InsufficientData {
        context: "phi taylor check (distinct gammas)",
        needed: 2,
        got: 1,
    })?;
    Ok(TaylorCheck {
        alpha,
        points,
        slope: fit.slope,
        r_squared: fit.r_squared,
    })
}

/// `sup_{p in (0, p_c)} p^n (1-p)^m`: the interior maximum `(n/(n+m))^n (m/(n+m))^m`
/// when `n/(n+m) <= p_c`, otherwise the endpoint value `p_c^n (1-p_c)^m`.
pub fn sup_weight(n: usize, m: usize, p_c: f64) -> Result<f64> {
    if n == 0 || !(p_c > 0.0 && p_c < 1.0) {
        return Err(Error::domain(alloc::format!(
            "sup_weight needs n >= 1 and p_c in (0,1), got n={n}, p_c={p_c}"
        )));
    }
    let total = (n + m) as f64;
    let (base, tail) = if math::cmp_ratio(n as u64, (n + m) as u64, p_c) != Ordering::Greater {
        (n as f64 / total, m as f64 / total)
    } else {
        (p_c, 1.0 - p_c)
    };
    Ok(weight(base, tail, n, m))
}

/// `base^n tail^m`, in the log domain once `n + m > 64`.
#[inline]
pub(crate) fn weight(base: f64, tail: f64, n: usize, m: usize) -> f64 {
    if n + m <= 64 {
        math::powf(base, n as f64) * if m == 0 { 1.0 } else { math::powf(tail, m as f64) }
    } else {
        exp(n as f64 * ln(base) + if m == 0 { 0.0 } else { m as f64 * ln(tail) })
    }
}

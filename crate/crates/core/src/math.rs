//! Float helpers over `libm`, exact big-integer conversions, least squares and
//! one-dimensional search.

use core::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// `x ln x` with the continuous extension `0 ln 0 = 0`.
#[inline]
pub fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * ln(x)
    }
}

/// Natural log of a big integer; `-inf` for zero.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return ln(x.to_f64().unwrap_or(f64::INFINITY));
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    ln(top) + shift as f64 * core::f64::consts::LN_2
}

/// `num / den` rounded to a double with ~64 bits of intermediate precision.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "ratio_to_f64: zero denominator");
    if num.is_zero() {
        return 0.0;
    }
    let shift = 64 + den.bits() as i64 - num.bits() as i64;
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let q = q.to_f64().unwrap_or(f64::INFINITY);
    q * libm::exp2(-(shift as f64))
}

/// Exact comparison of the rational `num / den` with a finite double.
pub fn cmp_ratio(num: u64, den: u64, x: f64) -> Ordering {
    assert!(den > 0 && x.is_finite());
    let q = num as f64 / den as f64;
    // Correct rounding is monotone, so a strict float inequality is decisive.
    if q < x {
        return Ordering::Less;
    }
    if q > x {
        return Ordering::Greater;
    }
    // x > 0 here, because q == x and num, den are nonnegative.
    if x == 0.0 {
        return if num == 0 { Ordering::Equal } else { Ordering::Greater };
    }
    let (mantissa, exponent) = decompose(x);
    // num / den  vs  mantissa * 2^exponent
    let lhs = BigUint::from(num);
    let rhs = BigUint::from(mantissa) * BigUint::from(den);
    if exponent >= 0 {
        lhs.cmp(&(rhs << exponent as u64))
    } else {
        (lhs << (-exponent) as u64).cmp(&rhs)
    }
}

/// Positive finite `x` as `mantissa * 2^exponent`.
fn decompose(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_field == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_field - 1075)
    }
}

/// `floor(beta * n)`, reading `beta` as the ratio `m / n` when it is the
/// double nearest one: `(1.0 / 3.0) * 3` floors to 1, not 0.
pub fn floor_ratio(beta: f64, n: usize) -> usize {
    let scaled = beta * n as f64;
    let nearest = libm::round(scaled);
    if nearest >= 0.0 && (scaled - nearest).abs() <= 4.0 * f64::EPSILON * nearest.max(1.0) {
        return nearest as usize;
    }
    let guess = floor(beta * n as f64).max(0.0) as u64;
    let mut k = guess.saturating_sub(1);
    // Largest k with k / n <= beta, searched around the float guess.
    while cmp_ratio(k + 1, n as u64, beta) != Ordering::Greater {
        k += 1;
    }
    while k > 0 && cmp_ratio(k, n as u64, beta) == Ordering::Greater {
        k -= 1;
    }
    k as usize
}

/// `log(sum(exp(v)))` over a slice; `-inf` when empty.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = values.into_iter().map(|v| exp(v - max)).sum();
    max + ln(sum)
}

/// Ordinary least squares `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - intercept - slope * xi;
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let (slope_stderr, intercept_stderr) = if n > 2 {
        let s2 = ss_res / (nf - 2.0);
        let se_slope = sqrt(s2 / sxx);
        let se_icpt = sqrt(s2 * (1.0 / nf + mean_x * mean_x / sxx));
        (se_slope, se_icpt)
    } else {
        (0.0, 0.0)
    };
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
        intercept_stderr,
        r_squared,
        n_points: n,
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of `f` on `[a, b]`. Returns `(x, f(x))`.
pub fn golden_section_minimize(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, given `f(lo)` and `f(hi)`
/// of opposite sign (zero counts as the `hi` side).
pub fn bisect_sign(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let lo_positive = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

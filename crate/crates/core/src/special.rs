//! Standard normal helpers that stay finite far into the tails.

use libm::erfc;

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// The horseshoe log-pole constant `(2π³)^(-1/2)`.
pub const K_POLE: f64 = 0.126_987_271_868_481_9;

#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn norm_ln_pdf(x: f64) -> f64 {
    -LN_SQRT_2PI - 0.5 * x * x
}

/// Density of `N(0, var)` at `x`.
#[inline]
pub fn normal_pdf_var(x: f64, var: f64) -> f64 {
    (-0.5 * x * x / var).exp() * FRAC_1_SQRT_2PI / var.sqrt()
}

/// Upper tail `P(Z > x)`.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub fn norm_cdf(x: f64) -> f64 {
    norm_sf(-x)
}

/// Mills ratio `R(x) = Φ̄(x) / φ(x)`.
///
/// Continued fraction for `x > 5`, direct ratio otherwise; the direct form is
/// only used where neither factor underflows.
pub fn mills_ratio(x: f64) -> f64 {
    if x > 5.0 {
        mills_cf(x)
    } else if x > -37.0 {
        norm_sf(x) / norm_pdf(x)
    } else {
        f64::INFINITY
    }
}

/// `ln R(x)`, finite for every real `x`.
pub fn ln_mills_ratio(x: f64) -> f64 {
    if x > 5.0 {
        mills_cf(x).ln()
    } else if x > -37.0 {
        (norm_sf(x) / norm_pdf(x)).ln()
    } else {
        // Φ̄(x) ≈ 1 for very negative x
        -norm_ln_pdf(x)
    }
}

// Lentz evaluation of R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...))))
fn mills_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// `ln Φ̄(x)`; switches to the Mills-ratio form where `erfc` would underflow.
pub fn norm_ln_sf(x: f64) -> f64 {
    if x > 8.0 {
        norm_ln_pdf(x) + mills_cf(x).ln()
    } else {
        norm_sf(x).ln()
    }
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

//! Moderate-deviation and universal thresholds, the equiboundary and
//! saddle-point equations, and the oracle testing risk.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::bracketed_root;
use crate::special::{norm_ln_pdf, norm_ln_sf, norm_pdf, FRAC_1_SQRT_2PI, K_POLE};

pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub t_mdp: f64,
    pub t_abos: f64,
    pub t_equiboundary: f64,
    pub n: u64,
    pub p0: u64,
}

impl ThresholdReport {
    pub fn new(n: u64, p0: u64, root_tol: f64) -> Result<Self> {
        Ok(Self {
            t_mdp: mdp_threshold(n)?,
            t_abos: abos_threshold(n, p0)?,
            t_equiboundary: equiboundary_solve(n, root_tol)?,
            n,
            p0,
        })
    }
}

/// `√ln(πn/2)`.
pub fn mdp_threshold(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::DomainError(format!("mdp threshold needs n >= 2, got {n}")));
    }
    Ok((PI * n as f64 / 2.0).ln().sqrt())
}

/// `√(2 ln(n/p₀))`.
pub fn abos_threshold(n: u64, p0: u64) -> Result<f64> {
    if p0 == 0 || p0 >= n {
        return Err(Error::DomainError(format!("need 1 <= p0 < n, got p0 = {p0}, n = {n}")));
    }
    Ok((2.0 * (n as f64 / p0 as f64).ln()).sqrt())
}

/// Two-sided normal tail `2Φ̄(t)` and its Mills approximation `2φ(t)/t`.
pub fn mills_tail(t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::OutOfDomain {
            value: t,
            domain: "t > 0",
        });
    }
    let exact = 2.0 * norm_ln_sf(t).exp();
    let approx = 2.0 * norm_pdf(t) / t;
    Ok((exact, approx))
}

// (√(2/π)/t) e^{-t²/2} - 2K t |ln t|
fn equiboundary_gap(t: f64) -> f64 {
    2.0 * FRAC_1_SQRT_2PI / t * (-0.5 * t * t).exp() - 2.0 * K_POLE * t * t.ln().abs()
}

/// Root of `(√(2/π)/t) e^{-t²/2} = 2K t |ln(1/t)|` on `(1, √(4 ln n))`.
///
/// The absolute value replaces `ln(1/t)`, which is negative on the whole
/// bracket. The equation does not involve `n`; `n` only sets the bracket.
pub fn equiboundary_solve(n: u64, root_tol: f64) -> Result<f64> {
    if n < 10 {
        return Err(Error::DomainError(format!("equiboundary needs n >= 10, got {n}")));
    }
    let hi = (4.0 * (n as f64).ln()).sqrt();
    bracketed_root(equiboundary_gap, 1.0 + 1e-12, hi, root_tol)
}

/// Residual of the equiboundary equation at `t`.
pub fn equiboundary_residual(t: f64) -> f64 {
    equiboundary_gap(t)
}

/// Root of `(1 - p₀/n) 2φ(t) = (p₀/n) 2π(t) φ(0)` on `(0.5, √(6 ln n))`.
///
/// Solved in log form so the residual is comparable across `n`; the
/// returned root satisfies `|lhs - rhs| < root_tol` in that scale whenever
/// the bracket holds a sign change.
pub fn saddle_point_threshold<F: Fn(f64) -> f64>(
    n: u64,
    p0: u64,
    prior_density_at: F,
    root_tol: f64,
) -> Result<f64> {
    if p0 == 0 || p0 >= n {
        return Err(Error::DomainError(format!("need 1 <= p0 < n, got p0 = {p0}, n = {n}")));
    }
    let w = p0 as f64 / n as f64;
    let ln_phi0 = norm_ln_pdf(0.0);
    let g = |t: f64| {
        let lhs = (1.0 - w).ln() + norm_ln_pdf(t);
        let rhs = w.ln() + prior_density_at(t).ln() + ln_phi0;
        lhs - rhs
    };
    let hi = (6.0 * (n as f64).ln()).sqrt();
    bracketed_root(g, 0.5, hi, root_tol)
}

/// Residual `(1 - p₀/n) 2φ(t) - (p₀/n) 2π(t) φ(0)` in the linear scale.
pub fn saddle_point_residual<F: Fn(f64) -> f64>(n: u64, p0: u64, prior_density_at: F, t: f64) -> f64 {
    let w = p0 as f64 / n as f64;
    (1.0 - w) * 2.0 * norm_pdf(t) - w * 2.0 * prior_density_at(t) * FRAC_1_SQRT_2PI
}

/// `(p₀/n) (π ln(n/p₀))^(-1/2)`.
pub fn oracle_bayes_risk(n: u64, p0: u64) -> Result<f64> {
    if p0 == 0 || p0 >= n || p0 as f64 / n as f64 > 0.1 {
        return Err(Error::DomainError(format!(
            "oracle risk needs 1 <= p0 and p0/n <= 0.1, got p0 = {p0}, n = {n}"
        )));
    }
    let w = p0 as f64 / n as f64;
    Ok(w / (PI * (1.0 / w).ln()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((mdp_threshold(2000).unwrap() - (1000.0 * PI).ln().sqrt()).abs() < 1e-15);
        assert!((mdp_threshold(2000).unwrap() - 2.83769).abs() < 1e-5);
        assert!((mdp_threshold(2).unwrap() - 1.06992).abs() < 1e-5);
        assert!(mdp_threshold(1).is_err());
        assert!((abos_threshold(2000, 10).unwrap() - 3.25525).abs() < 1e-5);
        assert!(abos_threshold(10, 10).is_err());
        assert!((oracle_bayes_risk(2000, 10).unwrap() - 1.2256e-3).abs() < 1e-7);
        assert!(oracle_bayes_risk(100, 20).is_err());
    }

    #[test]
    fn mills() {
        let (e, a) = mills_tail(3.0).unwrap();
        assert!((e - 2.699_796_063_260_19e-3).abs() < 1e-15);
        assert!(a > e);
        let (e, a) = mills_tail(6.0).unwrap();
        assert!((1.0..=1.05).contains(&(a / e)));
        let (e, a) = mills_tail(0.5).unwrap();
        assert!(a > e);
        assert!(mills_tail(37.0).unwrap().0 > 0.0);
    }
}

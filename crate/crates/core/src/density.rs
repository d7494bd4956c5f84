//! Marginal prior densities: horseshoe and horseshoe+ by adaptive quadrature
//! over the local scale, closed forms for the comparison priors.

use std::f64::consts::{FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};
use libm::lgamma as ln_gamma;

use crate::error::{Error, Result};
use crate::prior::{PriorKind, PriorSpec};
use crate::quad::{integrate_pieces, QuadratureSpec};
use crate::special::{normal_pdf_var, FRAC_1_SQRT_2PI, K_POLE, LN_SQRT_2PI};

/// Two-sided bounds on the unit-scale horseshoe density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBounds {
    pub lower: f64,
    pub upper: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

impl DensityBounds {
    pub fn ratio(&self) -> f64 {
        self.upper / self.lower
    }

    /// `lower < x < upper`, each side relaxed by `slack` relative.
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        self.lower * (1.0 - slack) < x && x < self.upper * (1.0 + slack)
    }
}

/// `(K/2) ln(1 + 4/θ²) < π_H(θ) < K ln(1 + 2/θ²)` at `τ = 1`.
pub fn hs_density_bounds(theta: f64) -> Result<DensityBounds> {
    if theta == 0.0 {
        return Err(Error::DivergesAtOrigin);
    }
    let t2 = theta * theta;
    Ok(DensityBounds {
        lower: 0.5 * K_POLE * (4.0 / t2).ln_1p(),
        upper: K_POLE * (2.0 / t2).ln_1p(),
        k: K_POLE,
    })
}

// breakpoints in λ around the Gaussian knee λ = |x| and at every decade
// between the knee and the half-Cauchy scale
fn lambda_breakpoints(knee: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = (-3..=3).map(|j| knee * 10f64.powi(j)).collect();
    let lo = knee.min(1.0).log10().floor() as i32;
    let hi = knee.max(1.0).log10().ceil() as i32 + 3;
    pts.extend((lo..=hi).map(|j| 10f64.powi(j)));
    pts.retain(|p| p.is_finite() && *p > 0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a / *b - 1.0).abs() < 1e-9);
    pts
}

// u = λ / (1 + λ) breakpoints for the knee at `knee`
fn u_breakpoints(knee: f64) -> Vec<f64> {
    let mut u = vec![0.0];
    u.extend(lambda_breakpoints(knee).into_iter().map(|l| l / (1.0 + l)));
    u.push(1.0);
    u.dedup();
    u
}

#[inline]
fn ln_half_cauchy(l: f64) -> f64 {
    FRAC_2_PI.ln() - (l * l).ln_1p()
}

/// Integrand over `u` of `N(x; 0, λ²) p(λ) dλ/du`, evaluated in log space.
fn u_integrand<L: Fn(f64) -> f64>(x: f64, ln_law: &L, u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let one_minus = 1.0 - u;
    let l = u / one_minus;
    let ln_normal = -0.5 * (x / l) * (x / l) - l.ln() - LN_SQRT_2PI;
    let v = (ln_normal + ln_law(l) - 2.0 * one_minus.ln()).exp();
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

fn unit_scale_density<L: Fn(f64) -> f64>(x: f64, ln_law: L, quad: &QuadratureSpec) -> Result<f64> {
    let pts = u_breakpoints(x.abs());
    integrate_pieces(&|u| u_integrand(x, &ln_law, u), &pts, quad)
}

/// Horseshoe marginal `π_H(θ; τ) = ∫ N(θ; 0, λ²τ²) C⁺(λ; 0, 1) dλ`.
pub fn hs_marginal_density(theta: f64, tau: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_args(theta, tau)?;
    let x = theta / tau;
    Ok(unit_scale_density(x, ln_half_cauchy, quad)? / tau)
}

fn check_args(theta: f64, tau: f64) -> Result<()> {
    if theta == 0.0 {
        return Err(Error::DivergesAtOrigin);
    }
    if !(tau > 0.0) {
        return Err(Error::OutOfDomain {
            value: tau,
            domain: "tau > 0",
        });
    }
    Ok(())
}

/// Density of `λ` under the two-layer half-Cauchy, integrating η numerically
/// on a log scale.
pub fn hsplus_local_density(lambda: f64, quad: &QuadratureSpec) -> Result<f64> {
    // ∫ C⁺(λ; 0, η) C⁺(η; 0, 1) dη with η = e^s
    let l2 = lambda * lambda;
    let f = |s: f64| {
        let eta = s.exp();
        let e2 = eta * eta;
        FRAC_2_PI * FRAC_2_PI * e2 / ((l2 + e2) * (1.0 + e2))
    };
    let c = lambda.ln();
    let mut pts = vec![-60.0, c.min(0.0) - 5.0, c.min(0.0), c.max(0.0), c.max(0.0) + 5.0, 60.0];
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    integrate_pieces(&f, &pts, quad)
}

/// Horseshoe+ marginal by nested quadrature: η innermost, λ outermost.
pub fn hsplus_marginal_density(theta: f64, tau: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_args(theta, tau)?;
    let x = theta / tau;
    let inner = quad
        .with_rel_tol((quad.rel_tol * 1e-2).max(1e-13))
        .with_abs_tol(f64::MIN_POSITIVE);
    let failure = std::cell::Cell::new(None);
    let ln_law = |l: f64| match hsplus_local_density(l, &inner) {
        Ok(v) => v.ln(),
        Err(e) => {
            failure.set(Some(e));
            f64::NEG_INFINITY
        }
    };
    let v = unit_scale_density(x, ln_law, quad)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(v / tau)
}

/// Closed-form densities of the comparison priors (Laplace, ridge, Cauchy,
/// Student-t); all are finite at the origin.
pub fn comparison_density(spec: &PriorSpec, theta: f64) -> Result<f64> {
    spec.validate()?;
    match spec.kind {
        PriorKind::Laplace => {
            let b = spec.aux;
            Ok((-theta.abs() / b).exp() / (2.0 * b))
        }
        PriorKind::Ridge => Ok(normal_pdf_var(theta, spec.aux * spec.aux)),
        PriorKind::Cauchy => Ok(1.0 / (PI * (1.0 + theta * theta))),
        PriorKind::StudentT => {
            let nu = spec.aux;
            let ln_c = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
            Ok((ln_c - 0.5 * (nu + 1.0) * (theta * theta / nu).ln_1p()).exp())
        }
        k @ (PriorKind::Horseshoe | PriorKind::HorseshoePlus) => Err(Error::UnsupportedKind(k)),
    }
}

/// Prior density at zero induced by a variance-mixing measure `ν(ds)`
/// truncated to `[s_min, s_max]`: `(2π)^(-1/2) ∫ s^(-1/2) ν(ds)`.
pub fn origin_density_from_mixing<F: Fn(f64) -> f64>(
    mixing_density: F,
    s_min: f64,
    s_max: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(s_min > 0.0) || !(s_max > s_min) {
        return Err(Error::DomainError(format!(
            "need 0 < s_min < s_max, got [{s_min}, {s_max}]"
        )));
    }
    // decade breakpoints so a 1/s-type measure over many decades resolves
    let mut pts = vec![s_min];
    let mut p = 10f64.powf(s_min.log10().floor() + 1.0);
    while p < s_max {
        pts.push(p);
        p *= 10.0;
    }
    pts.push(s_max);
    let v = integrate_pieces(&|s: f64| mixing_density(s) / s.sqrt(), &pts, quad)?;
    Ok(FRAC_1_SQRT_2PI * v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_at_one() {
        let b = hs_density_bounds(1.0).unwrap();
        assert!((b.lower - 0.5 * K_POLE * 5f64.ln()).abs() < 1e-15);
        assert!((b.upper - K_POLE * 3f64.ln()).abs() < 1e-15);
        assert!((b.lower - 0.10218).abs() < 1e-5);
        assert!((b.upper - 0.13951).abs() < 1e-5);
    }

    #[test]
    fn origin_is_an_error() {
        let q = QuadratureSpec::default();
        assert_eq!(hs_marginal_density(0.0, 1.0, &q), Err(Error::DivergesAtOrigin));
        assert_eq!(hsplus_marginal_density(0.0, 1.0, &q), Err(Error::DivergesAtOrigin));
        assert_eq!(hs_density_bounds(0.0), Err(Error::DivergesAtOrigin));
    }

    #[test]
    fn hsplus_local_density_closed_form() {
        let q = QuadratureSpec::default().with_rel_tol(1e-12).with_abs_tol(1e-300);
        for l in [1e-3, 0.5, 1.0, 2.0, 1e4] {
            let closed = if l == 1.0 {
                2.0 / (PI * PI)
            } else {
                4.0 * f64::ln(l) / (PI * PI * (l * l - 1.0))
            };
            let num = hsplus_local_density(l, &q).unwrap();
            assert!((num / closed - 1.0).abs() < 1e-10, "{l}: {num} {closed}");
        }
    }

    #[test]
    fn comparison_modes() {
        assert!((comparison_density(&PriorSpec::laplace(1.0), 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((comparison_density(&PriorSpec::cauchy(), 0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!(
            (comparison_density(&PriorSpec::ridge(1.0), 0.0).unwrap() - FRAC_1_SQRT_2PI).abs()
                < 1e-15
        );
        // t with 1 dof is Cauchy
        let t1 = comparison_density(&PriorSpec::student_t(1.0), 0.7).unwrap();
        let c = comparison_density(&PriorSpec::cauchy(), 0.7).unwrap();
        assert!((t1 - c).abs() < 1e-14);
        assert!(matches!(
            comparison_density(&PriorSpec::horseshoe(1.0), 1.0),
            Err(Error::UnsupportedKind(PriorKind::Horseshoe))
        ));
    }
}

//! The shrinkage weight κ: prior law, posterior given one observation, and
//! posterior functionals under the horseshoe.
//!
//! With noise sd σ the weight is `κ = σ² / (σ² + λ²τ²)`, and the posterior
//! obtained by changing variables from λ is
//!
//! `p(κ | y) ∝ (1 - κ)^(-1/2) exp(-y²κ / 2σ²) / (1 - κ(1 - τ²/σ²))`,
//!
//! which reduces to `Beta(1/2, 1/2)` times the likelihood only when `τ = σ`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{LocalLaw, MixtureKernel};
use crate::quad::{integrate_pieces, QuadratureSpec};
use crate::roots::bisect_switch;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkageSummary {
    pub e_kappa: f64,
    pub var_kappa: f64,
    pub post_mean_theta: f64,
}

pub fn kappa_from_lambda(lambda: f64, tau: f64) -> f64 {
    let lt = lambda * tau;
    1.0 / (1.0 + lt * lt)
}

/// Inverse of [`kappa_from_lambda`] on `κ ∈ (0, 1]`.
pub fn lambda_from_kappa(kappa: f64, tau: f64) -> f64 {
    ((1.0 - kappa) / kappa).sqrt() / tau
}

/// Arcsine density `π⁻¹ κ^(-1/2) (1 - κ)^(-1/2)`.
pub fn kappa_prior_density(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::OutOfDomain {
            value: kappa,
            domain: "(0, 1)",
        });
    }
    Ok(1.0 / (PI * (kappa * (1.0 - kappa)).sqrt()))
}

/// Arcsine CDF `(2/π) asin(√κ)`.
pub fn kappa_prior_cdf(kappa: f64) -> f64 {
    2.0 / PI * kappa.clamp(0.0, 1.0).sqrt().asin()
}

/// Posterior on κ (or φ with κ = sin²φ) for one observation.
struct KappaPosterior {
    y2: f64,
    t2: f64,
    points: Vec<f64>,
}

impl KappaPosterior {
    fn new(y: f64, tau: f64, sigma: f64) -> Self {
        let t = tau / sigma;
        let z = (y / sigma).abs();
        // mass sits near cos φ ~ τ/σ for small |y| and near sin φ ~ σ/|y|
        // for large |y|
        let mut points = vec![0.0, FRAC_PI_2];
        for j in -2..=3 {
            let c = t * 10f64.powi(j);
            if c < 1.0 {
                points.push(c.acos());
            }
            if z > 0.0 {
                let s = std::f64::consts::SQRT_2 / z * 10f64.powi(j);
                if s < 1.0 {
                    points.push(s.asin());
                }
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        Self {
            y2: z * z,
            t2: t * t,
            points,
        }
    }

    // unnormalised kernel in κ
    fn kernel(&self, kappa: f64) -> f64 {
        (-0.5 * self.y2 * kappa).exp()
            / ((1.0 - kappa).sqrt() * (1.0 - kappa * (1.0 - self.t2)))
    }

    // kernel · dκ/dφ with κ = sin²φ, times g(κ); the (1-κ)^(-1/2) pole
    // cancels against dκ/dφ
    fn phi_integrand(&self, phi: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
        let (s, c) = phi.sin_cos();
        let kappa = s * s;
        let one_minus = c * c;
        let w = 2.0 * s * (-0.5 * self.y2 * kappa).exp() / (one_minus + self.t2 * kappa);
        w * g(kappa, one_minus)
    }

    fn integral(&self, g: impl Fn(f64, f64) -> f64, quad: &QuadratureSpec) -> Result<f64> {
        integrate_pieces(&|phi| self.phi_integrand(phi, &g), &self.points, quad)
    }
}

/// Normalised posterior density of κ at `kappa`.
pub fn kappa_posterior_density(
    kappa: f64,
    y: f64,
    tau: f64,
    sigma: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::OutOfDomain {
            value: kappa,
            domain: "(0, 1)",
        });
    }
    check_scales(tau, sigma)?;
    let post = KappaPosterior::new(y, tau, sigma);
    let z = post.integral(|_, _| 1.0, quad)?;
    Ok(post.kernel(kappa) / z)
}

/// Posterior probability `P(κ ≤ c | y)`.
pub fn kappa_posterior_cdf(c: f64, y: f64, tau: f64, sigma: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_scales(tau, sigma)?;
    let c = c.clamp(0.0, 1.0);
    let post = KappaPosterior::new(y, tau, sigma);
    let z = post.integral(|_, _| 1.0, quad)?;
    let phi_c = c.sqrt().asin();
    let mut pts: Vec<f64> = post.points.iter().copied().filter(|&p| p < phi_c).collect();
    pts.push(phi_c);
    if pts.len() < 2 {
        return Ok(0.0);
    }
    let part = integrate_pieces(&|phi| post.phi_integrand(phi, |_, _| 1.0), &pts, quad)?;
    Ok((part / z).clamp(0.0, 1.0))
}

fn check_scales(tau: f64, sigma: f64) -> Result<()> {
    if !(tau > 0.0) || !(sigma > 0.0) {
        return Err(Error::DomainError(format!(
            "tau and sigma must be positive, got tau = {tau}, sigma = {sigma}"
        )));
    }
    Ok(())
}

/// `E[κ|y]`, `Var[κ|y]` and `θ̂ = (1 - E[κ|y]) y` by quadrature in φ.
pub fn posterior_summary(y: f64, tau: f64, sigma: f64, quad: &QuadratureSpec) -> Result<ShrinkageSummary> {
    check_scales(tau, sigma)?;
    let post = KappaPosterior::new(y, tau, sigma);
    let z = post.integral(|_, _| 1.0, quad)?;
    let e_kappa = (post.integral(|k, _| k, quad)? / z).clamp(0.0, 1.0);
    let var = post.integral(|k, _| (k - e_kappa) * (k - e_kappa), quad)? / z;
    Ok(ShrinkageSummary {
        e_kappa,
        var_kappa: var.clamp(0.0, 0.25),
        post_mean_theta: (1.0 - e_kappa) * y,
    })
}

/// Element-wise [`posterior_summary`] with the default quadrature spec.
pub fn shrinkage_profile(y_grid: &[f64], tau: f64, sigma: f64) -> Result<Vec<ShrinkageSummary>> {
    if y_grid.is_empty() {
        return Err(Error::DomainError("empty y grid".into()));
    }
    let quad = QuadratureSpec::default();
    y_grid
        .iter()
        .enumerate()
        .map(|(i, &y)| posterior_summary(y, tau, sigma, &quad).map_err(|e| e.at_index(i)))
        .collect()
}

const CROSSING_LO: f64 = 1e-3;
const CROSSING_HI: f64 = 1e2;

/// The `|y|` at which `E[κ|y, τ] = 1/2`, by bisection to `1e-6` in y.
pub fn kappa_half_crossing(tau: f64, sigma: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_scales(tau, sigma)?;
    let failure = std::cell::Cell::new(None);
    let below_half = |y: f64| match posterior_summary(y, tau, sigma, quad) {
        Ok(s) => s.e_kappa < 0.5,
        Err(e) => {
            failure.set(Some(e));
            false
        }
    };
    let r = bisect_switch(below_half, CROSSING_LO * sigma, CROSSING_HI * sigma, 1e-6 * sigma);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    r.ok_or_else(|| Error::NoRootInBracket {
        lo: CROSSING_LO * sigma,
        hi: CROSSING_HI * sigma,
    })
}

/// Same crossing on the fast trapezoid engine, for any horseshoe-type law.
pub fn kappa_half_crossing_fast(law: LocalLaw, tau: f64, sigma: f64) -> Result<f64> {
    check_scales(tau, sigma)?;
    let k = MixtureKernel::new(law, tau, sigma);
    bisect_switch(
        |y| k.ln_marginal_and_e_kappa(y).1 < 0.5,
        CROSSING_LO * sigma,
        CROSSING_HI * sigma,
        1e-9 * sigma,
    )
    .ok_or(Error::NoRootInBracket {
        lo: CROSSING_LO * sigma,
        hi: CROSSING_HI * sigma,
    })
}

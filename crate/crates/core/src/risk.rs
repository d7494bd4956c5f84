//! KL risk of plug-in Bayes predictives by Monte Carlo: null and signal
//! coordinates, the rate fit across τ, and the sequential cumulative KL.
//!
//! The predictive for a coordinate is the location family `N(θ̂, σ²)` with
//! `θ̂` the posterior mean, so `KL(N(θ, σ²) ‖ N(θ̂, σ²)) = (θ̂ - θ)² / 2σ²`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{LocalLaw, MixtureKernel};
use crate::prior::{PriorKind, PriorSpec};
use crate::rng::{mean_se, par_reps, stream};
use crate::special::ln_mills_ratio;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub reps: usize,
    pub seed: u64,
}

impl RiskEstimate {
    fn from_samples(xs: &[f64], seed: u64) -> Self {
        let (mean, std_err) = mean_se(xs);
        Self {
            mean,
            std_err,
            reps: xs.len(),
            seed,
        }
    }
}

/// Least-squares line `y = intercept + exponent · x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::DomainError("a line fit needs two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let exponent = sxy / sxx;
    let r_squared = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(SlopeFit {
        exponent,
        intercept: my - exponent * mx,
        r_squared,
    })
}

/// `θ̂² / 2σ²`.
pub fn kl_location(theta_hat: f64, sigma: f64) -> f64 {
    let z = theta_hat / sigma;
    0.5 * z * z
}

/// Posterior mean of θ under the Laplace prior `(2b)^-1 e^{-|θ|/b}` and
/// `y | θ ~ N(θ, σ²)`.
///
/// With `z = y/σ`, `a = σ/b` and the Mills ratio `R`,
/// `θ̂ = σ (z - a tanh((ln R(a - z) - ln R(a + z)) / 2))`.
pub fn laplace_posterior_mean(y: f64, scale: f64, sigma: f64) -> f64 {
    let z = y / sigma;
    let a = sigma / scale;
    let d = ln_mills_ratio(a - z) - ln_mills_ratio(a + z);
    sigma * (z - a * (0.5 * d).tanh())
}

/// Posterior-mean map for one prior at noise sd `sigma`.
enum Estimator {
    Mixture(MixtureKernel),
    Laplace { scale: f64, sigma: f64 },
    Ridge { shrink: f64 },
}

impl Estimator {
    fn new(prior: &PriorSpec, sigma: f64) -> Result<Self> {
        match prior.kind {
            PriorKind::Horseshoe | PriorKind::HorseshoePlus => Ok(Estimator::Mixture(MixtureKernel::new(
                LocalLaw::from_kind(prior.kind)?,
                prior.tau,
                sigma,
            ))),
            PriorKind::Laplace => Ok(Estimator::Laplace {
                scale: prior.aux,
                sigma,
            }),
            PriorKind::Ridge => {
                let v = prior.aux * prior.aux;
                Ok(Estimator::Ridge {
                    shrink: v / (v + sigma * sigma),
                })
            }
            k => Err(Error::UnsupportedKind(k)),
        }
    }

    fn posterior_mean(&self, y: f64) -> f64 {
        match self {
            Estimator::Mixture(k) => k.posterior_mean(y),
            Estimator::Laplace { scale, sigma } => laplace_posterior_mean(y, *scale, *sigma),
            Estimator::Ridge { shrink } => shrink * y,
        }
    }
}

/// Posterior mean `θ̂(y)` for the horseshoe, horseshoe+, Laplace or ridge
/// prior, using `prior.sigma` as the noise sd.
pub fn posterior_mean(prior: &PriorSpec, y: f64) -> Result<f64> {
    prior.validate()?;
    Ok(Estimator::new(prior, prior.sigma)?.posterior_mean(y))
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// `E_{y ~ N(0, σ²)} KL(N(0, σ²) ‖ N(θ̂(y), σ²))` by Monte Carlo.
pub fn null_kl_risk(prior: &PriorSpec, reps: usize, seed: u64) -> Result<RiskEstimate> {
    prior.validate()?;
    if !matches!(
        prior.kind,
        PriorKind::Horseshoe | PriorKind::HorseshoePlus | PriorKind::Laplace
    ) {
        return Err(Error::UnsupportedKind(prior.kind));
    }
    if reps < 1000 {
        return Err(Error::DomainError(format!("null risk needs reps >= 1000, got {reps}")));
    }
    let sigma = prior.sigma;
    let est = Estimator::new(prior, sigma)?;
    let xs = par_reps(reps, seed, |rng, _| {
        let y = sigma * normal(rng);
        kl_location(est.posterior_mean(y), sigma)
    });
    Ok(RiskEstimate::from_samples(&xs, seed))
}

fn check_tau_design(taus: &[f64]) -> Result<()> {
    if taus.len() < 4 {
        return Err(Error::DomainError("need at least 4 tau values".into()));
    }
    let lo = taus.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = taus.iter().copied().fold(0.0, f64::max);
    if !(lo > 0.0) || hi > 0.1 || hi / lo < 10f64.powf(1.5) * (1.0 - 1e-12) {
        return Err(Error::DomainError(
            "tau values must be in (0, 0.1] and span 1.5 decades".into(),
        ));
    }
    Ok(())
}

/// Slope of `ln risk` on `ln τ` for the horseshoe null risk.
pub fn superefficiency_exponent(taus: &[f64], reps: usize, seed: u64) -> Result<SlopeFit> {
    superefficiency_exponent_for(PriorKind::Horseshoe, taus, reps, seed)
}

/// As [`superefficiency_exponent`] for another prior; the Laplace prior is
/// matched by setting its scale `b = τ`. Every τ reuses the same seed, so
/// the fit runs on common random numbers.
pub fn superefficiency_exponent_for(
    kind: PriorKind,
    taus: &[f64],
    reps: usize,
    seed: u64,
) -> Result<SlopeFit> {
    check_tau_design(taus)?;
    let mut lx = Vec::with_capacity(taus.len());
    let mut ly = Vec::with_capacity(taus.len());
    for &tau in taus {
        let prior = matched_prior(kind, tau)?;
        let r = null_kl_risk(&prior, reps, seed)?;
        lx.push(tau.ln());
        ly.push(r.mean.ln());
    }
    fit_line(&lx, &ly)
}

/// Prior of `kind` at global scale τ (the Laplace scale is set to τ).
pub fn matched_prior(kind: PriorKind, tau: f64) -> Result<PriorSpec> {
    match kind {
        PriorKind::Horseshoe => Ok(PriorSpec::horseshoe(tau)),
        PriorKind::HorseshoePlus => Ok(PriorSpec::horseshoe_plus(tau)),
        PriorKind::Laplace => Ok(PriorSpec::laplace(tau)),
        k => Err(Error::UnsupportedKind(k)),
    }
}

/// `E_{y ~ N(θ₀, σ²)} (θ̂(y) - θ₀)² / 2σ²` by Monte Carlo.
pub fn signal_kl_risk(theta0: f64, prior: &PriorSpec, reps: usize, seed: u64) -> Result<RiskEstimate> {
    prior.validate()?;
    if theta0 == 0.0 {
        return Err(Error::DomainError("signal risk needs theta0 != 0".into()));
    }
    if reps == 0 {
        return Err(Error::DomainError("reps must be positive".into()));
    }
    let sigma = prior.sigma;
    let est = Estimator::new(prior, sigma)?;
    let xs = par_reps(reps, seed, |rng, _| {
        let y = theta0 + sigma * normal(rng);
        kl_location(est.posterior_mean(y) - theta0, sigma)
    });
    Ok(RiskEstimate::from_samples(&xs, seed))
}

/// Cumulative KL over `n` sequential predictions of one coordinate.
pub fn cumulative_kl(theta0: f64, n: usize, prior: &PriorSpec, reps: usize, seed: u64) -> Result<RiskEstimate> {
    Ok(cumulative_kl_path(theta0, &[n], prior, reps, seed)?[0])
}

const CHUNK: usize = 512;

/// [`cumulative_kl`] at several horizons from the same simulated paths.
///
/// Step `t = 0, 1, ...` predicts `y_{t+1}` with `N(θ̂_t, σ²)`, where `θ̂_t`
/// is the posterior mean given the running mean of `t` observations (noise
/// sd `σ/√t`) and `θ̂_0 = 0` is the prior mean. Entry `k` of the result is
/// the sum over the first `ns[k]` steps.
pub fn cumulative_kl_path(
    theta0: f64,
    ns: &[usize],
    prior: &PriorSpec,
    reps: usize,
    seed: u64,
) -> Result<Vec<RiskEstimate>> {
    prior.validate()?;
    if ns.iter().any(|&n| n < 10) || ns.is_empty() {
        return Err(Error::DomainError("cumulative KL needs every n >= 10".into()));
    }
    if reps == 0 {
        return Err(Error::DomainError("reps must be positive".into()));
    }
    Estimator::new(prior, prior.sigma)?;
    let sigma = prior.sigma;
    let n_max = *ns.iter().max().unwrap();

    struct Path {
        rng: ChaCha8Rng,
        sum_y: f64,
        kl: f64,
        at: Vec<f64>,
    }
    let mut paths: Vec<Path> = (0..reps)
        .map(|i| Path {
            rng: stream(seed, i as u64),
            sum_y: 0.0,
            kl: 0.0,
            at: vec![f64::NAN; ns.len()],
        })
        .collect();

    let mut start = 0;
    while start < n_max {
        let end = (start + CHUNK).min(n_max);
        // estimators for steps start..end; step t conditions on t observations
        let ests: Vec<Option<Estimator>> = (start..end)
            .into_par_iter()
            .map(|t| {
                (t > 0).then(|| Estimator::new(prior, sigma / (t as f64).sqrt()).expect("validated prior"))
            })
            .collect();
        paths.par_iter_mut().for_each(|p| {
            for (off, est) in ests.iter().enumerate() {
                let t = start + off;
                let theta_hat = match est {
                    None => 0.0,
                    Some(e) => e.posterior_mean(p.sum_y / t as f64),
                };
                p.kl += kl_location(theta_hat - theta0, sigma);
                p.sum_y += theta0 + sigma * normal(&mut p.rng);
                for (k, &n) in ns.iter().enumerate() {
                    if n == t + 1 {
                        p.at[k] = p.kl;
                    }
                }
            }
        });
        start = end;
    }
    Ok((0..ns.len())
        .map(|k| {
            let xs: Vec<f64> = paths.iter().map(|p| p.at[k]).collect();
            RiskEstimate::from_samples(&xs, seed)
        })
        .collect())
}

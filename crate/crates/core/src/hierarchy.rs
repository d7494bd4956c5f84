//! One representative numerical check per level of the bound hierarchy,
//! from the per-coordinate density sandwich up to the cumulative-KL budget.

use serde::{Deserialize, Serialize};

use crate::calibration::TauMethod;
use crate::density::{hs_density_bounds, hs_marginal_density};
use crate::error::{Error, Result};
use crate::prior::PriorSpec;
use crate::quad::{integrate_pieces, QuadratureSpec};
use crate::risk::{cumulative_kl, null_kl_risk, posterior_mean};
use crate::shrinkage::posterior_summary;
use crate::simulate::{run_experiment, ExperimentConfig};
use crate::special::K_POLE;
use crate::threshold::{mdp_threshold, mills_tail};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyLevel {
    pub level: u8,
    pub description: String,
    pub metric: f64,
    pub band: [f64; 2],
    pub pass: bool,
}

impl HierarchyLevel {
    fn new(level: u8, description: &str, metric: f64, band: [f64; 2]) -> Self {
        Self {
            level,
            description: description.to_string(),
            metric,
            band,
            pass: metric.is_finite() && metric >= band[0] && metric <= band[1],
        }
    }
}

pub const NULL_RISK_REPS: usize = 20_000;
pub const EXPERIMENT_REPS: usize = 200;
pub const BUDGET_STEPS: usize = 1000;
pub const BUDGET_REPS: usize = 200;

fn log_grid(lo: f64, hi: f64, len: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..len).map(move |i| (a + (b - a) * i as f64 / (len - 1) as f64).exp())
}

// ∫_{-t}^{t} π_H(θ; 1) dθ in log scale; the mass below e^{-60} is < 1e-24
fn central_mass(t: f64, quad: &QuadratureSpec) -> Result<f64> {
    let f = |s: f64| {
        let th = s.exp();
        th * hs_marginal_density(th, 1.0, quad).unwrap_or(f64::NAN)
    };
    let top = t.ln();
    let mut pts: Vec<f64> = (-15..=0).map(|j| 4.0 * j as f64).filter(|p| *p < top).collect();
    pts.push(top);
    Ok(2.0 * integrate_pieces(&f, &pts, quad)?)
}

/// Levels 1 to 8 at `(n, p₀)`; Monte Carlo levels use `seed`.
pub fn hierarchy_report(n: usize, p0: usize, seed: u64) -> Result<Vec<HierarchyLevel>> {
    if n < 100 || p0 == 0 || p0 * 10 > n {
        return Err(Error::DomainError(format!(
            "hierarchy needs n >= 100 and 1 <= p0 <= n/10, got n = {n}, p0 = {p0}"
        )));
    }
    let quad = QuadratureSpec::default();
    let tau = p0 as f64 / n as f64;
    let nf = n as f64;
    let mut out = Vec::with_capacity(8);

    let inside = log_grid(1e-6, 1e3, 50)
        .map(|th| {
            let v = hs_marginal_density(th, 1.0, &quad)?;
            Ok(hs_density_bounds(th)?.contains(v, 0.0))
        })
        .collect::<Result<Vec<bool>>>()?;
    let frac = inside.iter().filter(|b| **b).count() as f64 / inside.len() as f64;
    out.push(HierarchyLevel::new(
        1,
        "fraction of 50 log-spaced theta in [1e-6, 1e3] inside the density sandwich",
        frac,
        [1.0, 1.0],
    ));

    let s = posterior_summary(1.0, tau, 1.0, &quad)?;
    out.push(HierarchyLevel::new(
        2,
        "E[kappa | y = 1, tau = p0/n]: the log-pole shrinks small observations",
        s.e_kappa,
        [0.9, 1.0],
    ));

    let r = null_kl_risk(&PriorSpec::horseshoe(tau), NULL_RISK_REPS, seed)?;
    out.push(HierarchyLevel::new(
        3,
        "n times the null-coordinate KL risk at tau = p0/n (o(1/n) keeps it below 1)",
        nf * r.mean,
        [0.0, 1.0],
    ));

    let prior = PriorSpec::horseshoe(tau);
    let mut worst: f64 = 0.0;
    for y in log_grid(1e-3, 10.0, 60) {
        let th = posterior_mean(&prior, y)?;
        if th != 0.0 {
            let h2 = -(-th * th / 8.0).exp_m1();
            worst = worst.max(h2 / (th * th / 8.0));
        }
    }
    out.push(HierarchyLevel::new(
        4,
        "max over y of Hellinger^2 / (theta_hat^2 / 8)",
        worst,
        [0.0, 1.0],
    ));

    let t = mdp_threshold(n as u64)?;
    let mass = central_mass(t, &quad)?;
    let approx = 2.0 * K_POLE * t * t.ln().abs();
    out.push(HierarchyLevel::new(
        5,
        "prior mass of [-t_crit, t_crit] over 2K t |ln t|",
        mass / approx,
        [0.5, 2.0],
    ));

    let (exact, _) = mills_tail(t)?;
    out.push(HierarchyLevel::new(
        6,
        "P0(|Y| > t_crit) * n * sqrt(ln n / 2)",
        exact * nf * (nf.ln() / 2.0).sqrt(),
        [0.3, 3.0],
    ));

    let cfg = ExperimentConfig::new(n, p0, 1.5, TauMethod::oracle(tau), EXPERIMENT_REPS, seed);
    let res = run_experiment(&cfg)?;
    out.push(HierarchyLevel::new(
        7,
        "oracle Bayes risk at A = 1.5 over p0 ln(n/p0) / n",
        res.risk / (p0 as f64 * (nf / p0 as f64).ln() / nf),
        [0.1, 10.0],
    ));

    let ckl = cumulative_kl(0.0, BUDGET_STEPS, &PriorSpec::horseshoe(tau), BUDGET_REPS, seed)?;
    out.push(HierarchyLevel::new(
        8,
        "cumulative KL of a null coordinate over 1000 steps at tau = p0/n",
        ckl.mean,
        [0.0, 1.0],
    ));
    Ok(out)
}

//! Sparse two-groups experiments: data generation, testing rules, Bayes
//! risk and the calibration comparison harness.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::calibration::{MmleSolver, TauGridPosterior, TauMethod, TauMethodKind};
use crate::error::{Error, Result};
use crate::mixture::{LocalLaw, MixtureKernel};
use crate::prior::PriorKind;
use crate::rng::{mean_se, par_reps, stream};
use crate::shrinkage::kappa_half_crossing_fast;
use crate::threshold::oracle_bayes_risk;

/// Testing rule applied to each coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Rule {
    /// Reject when `|y| > t`.
    HardThreshold(f64),
    /// Reject when `E[κ | y, τ̂] < 1/2`.
    KappaHalf,
    /// Reject when the two-groups signal probability exceeds the cut.
    PosteriorProb(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p0: usize,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub tau_method: TauMethod,
    pub rule: Rule,
    pub reps: usize,
    pub seed: u64,
    pub sigma: f64,
    /// Local-scale law behind the marginal used for calibration.
    pub law: PriorKind,
}

impl ExperimentConfig {
    /// Horseshoe arm with `σ = 1` and the posterior-probability rule at 1/2.
    pub fn new(n: usize, p0: usize, amplitude: f64, tau_method: TauMethod, reps: usize, seed: u64) -> Self {
        Self {
            n,
            p0,
            amplitude,
            tau_method,
            rule: Rule::PosteriorProb(0.5),
            reps,
            seed,
            sigma: 1.0,
            law: PriorKind::Horseshoe,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p0 > self.n || self.reps == 0 {
            return Err(Error::InvalidConfig(format!(
                "need n >= 2, p0 <= n and reps >= 1, got n = {}, p0 = {}, reps = {}",
                self.n, self.p0, self.reps
            )));
        }
        if !(self.amplitude > 0.0) || !(self.sigma > 0.0) {
            return Err(Error::InvalidConfig("A and sigma must be positive".into()));
        }
        match self.rule {
            Rule::HardThreshold(t) if t.is_nan() || t < 0.0 => {
                return Err(Error::InvalidConfig(format!("threshold must be >= 0, got {t}")))
            }
            Rule::PosteriorProb(c) if !(0.0..1.0).contains(&c) => {
                return Err(Error::InvalidConfig(format!("cut must lie in [0, 1), got {c}")))
            }
            _ => {}
        }
        LocalLaw::from_kind(self.law)?;
        self.tau_method.validate()
    }

    /// `μ_n = A √(2 ln(n/p₀))`, or 0 without signals.
    pub fn signal_strength(&self) -> f64 {
        if self.p0 == 0 {
            return 0.0;
        }
        self.amplitude * (2.0 * (self.n as f64 / self.p0 as f64).ln()).sqrt() * self.sigma
    }

    /// Sparsity fraction `p₀/n`, floored at `1/n`.
    pub fn oracle_tau(&self) -> f64 {
        self.p0.max(1) as f64 / self.n as f64
    }

    fn local_law(&self) -> LocalLaw {
        LocalLaw::from_kind(self.law).unwrap_or(LocalLaw::HalfCauchy)
    }

    /// Table label, e.g. `MMLE HS+`.
    pub fn label(&self) -> String {
        let law = if self.law == PriorKind::HorseshoePlus { "HS+" } else { "HS" };
        match self.tau_method.kind {
            TauMethodKind::Oracle => format!("Oracle {law}"),
            TauMethodKind::Mmle => format!("MMLE {law}"),
            TauMethodKind::TruncatedHalfCauchy => format!("TruncHC {law}"),
            TauMethodKind::UntruncatedHalfCauchy => "HC-untrunc".into(),
            TauMethodKind::Uniform => "Uniform".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    /// Mean Bayes risk times `n/p₀`.
    pub scaled_risk: f64,
    pub se_scaled_risk: f64,
    pub risk: f64,
    pub se_risk: f64,
    pub type1: f64,
    pub type2: f64,
    pub tau_hat_mean: f64,
    /// Paired oracle scaled risk over this scaled risk.
    pub rel_efficiency: f64,
    pub oracle_scaled_risk: f64,
}

pub(crate) fn standard_normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn generate_with(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<bool>) {
    let mu = cfg.signal_strength();
    let mut theta = vec![0.0; cfg.n];
    let mut truth = vec![false; cfg.n];
    for i in sample(rng, cfg.n, cfg.p0).into_iter() {
        truth[i] = true;
        theta[i] = if rng.random::<bool>() { mu } else { -mu };
    }
    let z = standard_normals(rng, cfg.n);
    let y = theta.iter().zip(&z).map(|(t, z)| t + cfg.sigma * z).collect();
    (y, truth)
}

/// One replicate dataset; the stream is fixed by `(cfg.seed, rep_index)`.
pub fn generate_two_groups(cfg: &ExperimentConfig, rep_index: u64) -> (Vec<f64>, Vec<bool>) {
    generate_with(cfg, &mut stream(cfg.seed, rep_index))
}

// ln[f₁(y)/φ(y)] for the symmetric two-point alternative ±μ
fn ln_likelihood_ratio(y: f64, mu: f64, sigma: f64) -> f64 {
    let a = (mu * y / (sigma * sigma)).abs();
    -0.5 * (mu / sigma).powi(2) + a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn signal_probability(w: f64, lnlr: f64) -> f64 {
    let w = w.clamp(1e-300, 1.0 - 1e-12);
    let logit = w.ln() - (-w).ln_1p() + lnlr;
    1.0 / (1.0 + (-logit).exp())
}

/// `|y|` where `E[κ | y, τ]` drops below 1/2; zero when even `y = 0` is
/// shrunk by less than half, as happens for large `τ/σ`.
pub fn kappa_half_boundary(law: LocalLaw, tau: f64, sigma: f64) -> Result<f64> {
    if MixtureKernel::new(law, tau, sigma).ln_marginal_and_e_kappa(0.0).1 < 0.5 {
        return Ok(0.0);
    }
    kappa_half_crossing_fast(law, tau, sigma)
}

/// Decisions under `cfg.rule` at `τ̂`. The posterior-probability rule
/// uses `τ̂` as the two-groups mixing weight; at the oracle it is `p₀/n`.
pub fn apply_rule(y: &[f64], cfg: &ExperimentConfig, tau_hat: f64) -> Result<Vec<bool>> {
    if !(tau_hat > 0.0) {
        return Err(Error::OutOfDomain {
            value: tau_hat,
            domain: "tau_hat > 0",
        });
    }
    Ok(match cfg.rule {
        Rule::HardThreshold(t) => y.iter().map(|v| v.abs() > t).collect(),
        Rule::KappaHalf => {
            let ys = kappa_half_boundary(cfg.local_law(), tau_hat, cfg.sigma)?;
            y.iter().map(|v| v.abs() > ys).collect()
        }
        Rule::PosteriorProb(cut) => {
            let mu = cfg.signal_strength();
            y.iter()
                .map(|&v| signal_probability(tau_hat, ln_likelihood_ratio(v, mu, cfg.sigma)) > cut)
                .collect()
        }
    })
}

/// `(risk, type I, type II)` with `risk = (1 - p₀/n) α + (p₀/n) β`.
pub fn bayes_risk(decisions: &[bool], truth: &[bool], cfg: &ExperimentConfig) -> Result<(f64, f64, f64)> {
    if decisions.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: decisions.len(),
            right: truth.len(),
        });
    }
    let (mut fp, mut fneg, mut nulls) = (0usize, 0usize, 0usize);
    for (d, t) in decisions.iter().zip(truth) {
        match (t, d) {
            (false, true) => fp += 1,
            (true, false) => fneg += 1,
            _ => {}
        }
        nulls += usize::from(!t);
    }
    let signals = truth.len() - nulls;
    let t1 = fp as f64 / nulls.max(1) as f64;
    let t2 = fneg as f64 / signals.max(1) as f64;
    let w = cfg.p0 as f64 / cfg.n as f64;
    Ok(((1.0 - w) * t1 + w * t2, t1, t2))
}

enum Calibrator {
    Fixed(f64),
    Mmle(MmleSolver),
    Bayes(TauGridPosterior),
}

impl Calibrator {
    fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let law = cfg.local_law();
        Ok(match cfg.tau_method.kind {
            TauMethodKind::Oracle => Self::Fixed(cfg.tau_method.oracle_value.unwrap_or(cfg.oracle_tau())),
            TauMethodKind::Mmle => Self::Mmle(MmleSolver::new(law, cfg.sigma, 1.0 / cfg.n as f64, 1.0)?),
            _ => Self::Bayes(TauGridPosterior::new(law, cfg.tau_method, cfg.n, cfg.sigma)?),
        })
    }

    /// Decisions and the reported τ̂ for one dataset.
    fn decide(&self, y: &[f64], cfg: &ExperimentConfig) -> Result<(Vec<bool>, f64)> {
        let tau = match self {
            Self::Fixed(t) => *t,
            Self::Mmle(s) => s.solve(y).0,
            Self::Bayes(g) => return Ok(bayes_decisions(g, y, cfg)),
        };
        Ok((apply_rule(y, cfg, tau)?, tau))
    }
}

// Decisions that average the per-τ statistic over the τ posterior.
fn bayes_decisions(g: &TauGridPosterior, y: &[f64], cfg: &ExperimentConfig) -> (Vec<bool>, f64) {
    let post = g.posterior(y);
    let tau_mean = post.mean();
    // grid points carrying negligible weight are skipped
    let active: Vec<usize> = (0..post.grid.len()).filter(|&k| post.weights[k] > 1e-14).collect();
    let mass: f64 = active.iter().map(|&k| post.weights[k]).sum();
    let decisions = match cfg.rule {
        Rule::HardThreshold(t) => y.iter().map(|v| v.abs() > t).collect(),
        Rule::PosteriorProb(cut) => {
            let mu = cfg.signal_strength();
            y.iter()
                .map(|&v| {
                    let l = ln_likelihood_ratio(v, mu, cfg.sigma);
                    let p: f64 = active
                        .iter()
                        .map(|&k| post.weights[k] * signal_probability(post.grid[k], l))
                        .sum();
                    p / mass > cut
                })
                .collect()
        }
        Rule::KappaHalf => {
            let tables = g.tables();
            y.iter()
                .map(|&v| {
                    let e: f64 = active.iter().map(|&k| post.weights[k] * tables[k].e_kappa(v)).sum();
                    e / mass < 0.5
                })
                .collect()
        }
    };
    (decisions, tau_mean)
}

struct RepOutcome {
    risk: f64,
    type1: f64,
    type2: f64,
    tau: f64,
    oracle_risk: f64,
}

fn run_with(cfg: &ExperimentConfig, cal: &Calibrator, oracle: Option<&Calibrator>) -> Result<ExperimentResult> {
    let oracle_cfg = ExperimentConfig {
        tau_method: TauMethod::oracle(cfg.oracle_tau()),
        ..cfg.clone()
    };
    let outcomes = par_reps(cfg.reps, cfg.seed, |rng, _| -> Result<RepOutcome> {
        let (y, truth) = generate_with(cfg, rng);
        let (d, tau) = cal.decide(&y, cfg)?;
        let (risk, type1, type2) = bayes_risk(&d, &truth, cfg)?;
        let oracle_risk = match oracle {
            Some(o) => bayes_risk(&o.decide(&y, &oracle_cfg)?.0, &truth, cfg)?.0,
            None => risk,
        };
        Ok(RepOutcome {
            risk,
            type1,
            type2,
            tau,
            oracle_risk,
        })
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let col = |f: fn(&RepOutcome) -> f64| outcomes.iter().map(f).collect::<Vec<f64>>();
    let (risk, se_risk) = mean_se(&col(|o| o.risk));
    let (oracle_risk, _) = mean_se(&col(|o| o.oracle_risk));
    let scale = if cfg.p0 == 0 { 1.0 } else { cfg.n as f64 / cfg.p0 as f64 };
    Ok(ExperimentResult {
        scaled_risk: risk * scale,
        se_scaled_risk: se_risk * scale,
        risk,
        se_risk,
        type1: mean_se(&col(|o| o.type1)).0,
        type2: mean_se(&col(|o| o.type2)).0,
        tau_hat_mean: mean_se(&col(|o| o.tau)).0,
        rel_efficiency: if risk > 0.0 { oracle_risk / risk } else { 1.0 },
        oracle_scaled_risk: oracle_risk * scale,
    })
}

/// Runs `cfg.reps` replicates and compares against an oracle arm on the
/// same datasets.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let cal = Calibrator::build(cfg)?;
    if cfg.tau_method.kind == TauMethodKind::Oracle {
        return run_with(cfg, &cal, None);
    }
    run_with(cfg, &cal, Some(&Calibrator::Fixed(cfg.oracle_tau())))
}

/// One calibration arm of a scaling study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub tau_method: TauMethod,
    pub law: PriorKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub label: String,
    /// Mean risk over `oracle_bayes_risk(n, p₀)`.
    pub ratio: f64,
    pub se: f64,
    pub result: ExperimentResult,
}

/// Ratio `R_n / R_n*` for every `(n, arm)`, `n` ascending and arms in the
/// given order.
pub fn scaling_study(
    n_values: &[usize],
    p0: usize,
    amplitude: f64,
    arms: &[Arm],
    reps: usize,
    seed: u64,
) -> Result<Vec<ScalingRow>> {
    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    let mut rows = Vec::with_capacity(ns.len() * arms.len());
    for &n in &ns {
        let r_star = oracle_bayes_risk(n as u64, p0 as u64)?;
        for arm in arms {
            let cfg = ExperimentConfig {
                law: arm.law,
                ..ExperimentConfig::new(n, p0, amplitude, arm.tau_method, reps, seed)
            };
            let result = run_experiment(&cfg)?;
            rows.push(ScalingRow {
                n,
                label: cfg.label(),
                ratio: result.risk / r_star,
                se: result.se_risk / r_star,
                result,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub multiplier: f64,
    pub tau: f64,
    pub risk: f64,
    pub type1: f64,
    pub type2: f64,
    /// `(p₀/n) β / risk`.
    pub type2_share: f64,
}

/// Fixed-τ experiments at `τ = m · p₀/n` for each multiplier `m`.
pub fn regime_sweep(cfg: &ExperimentConfig, tau_multipliers: &[f64]) -> Result<Vec<RegimeRow>> {
    if cfg.tau_method.kind != TauMethodKind::Oracle {
        return Err(Error::InvalidConfig("regime sweep needs the oracle tau method".into()));
    }
    cfg.validate()?;
    let w = cfg.p0 as f64 / cfg.n as f64;
    tau_multipliers
        .iter()
        .map(|&m| {
            if !(m > 0.0) {
                return Err(Error::OutOfDomain {
                    value: m,
                    domain: "multiplier > 0",
                });
            }
            let tau = m * cfg.oracle_tau();
            let r = run_with(cfg, &Calibrator::Fixed(tau), None)?;
            let share = if r.risk > 0.0 { w * r.type2 / r.risk } else { 0.0 };
            Ok(RegimeRow {
                multiplier: m,
                tau,
                risk: r.risk,
                type1: r.type1,
                type2: r.type2,
                type2_share: share,
            })
        })
        .collect()
}

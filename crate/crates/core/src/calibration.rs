//! Choosing or integrating over the global scale τ.
//!
//! Everything here works with the horseshoe marginal of one observation,
//! `m(y | τ, σ) = ∫ N(y; 0, σ² + λ²τ²) C⁺(λ) dλ`, and the log likelihood
//! `Σ ln m(y_i | τ, σ)`. The bulk routines evaluate it through per-τ
//! interpolation tables; [`obs_marginal_density`] is the adaptive-quadrature
//! reference.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{LocalLaw, MarginalTable, MixtureKernel};
use crate::quad::{integrate_pieces, QuadratureSpec};
use crate::rng::par_reps;
use crate::roots::golden_max;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TauMethodKind {
    Oracle,
    #[serde(rename = "MMLE")]
    Mmle,
    TruncatedHalfCauchy,
    UntruncatedHalfCauchy,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauMethod {
    pub kind: TauMethodKind,
    pub oracle_value: Option<f64>,
    pub grid_points: usize,
}

pub const DEFAULT_GRID_POINTS: usize = 200;
/// Right end of the grid standing in for `(0, ∞)` under the untruncated
/// half-Cauchy.
pub const UNTRUNCATED_TAU_CAP: f64 = 10.0;

impl TauMethod {
    fn of(kind: TauMethodKind) -> Self {
        Self {
            kind,
            oracle_value: None,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }

    pub fn oracle(value: f64) -> Self {
        Self {
            oracle_value: Some(value),
            ..Self::of(TauMethodKind::Oracle)
        }
    }

    pub fn mmle() -> Self {
        Self::of(TauMethodKind::Mmle)
    }

    pub fn truncated_half_cauchy() -> Self {
        Self::of(TauMethodKind::TruncatedHalfCauchy)
    }

    pub fn untruncated_half_cauchy() -> Self {
        Self::of(TauMethodKind::UntruncatedHalfCauchy)
    }

    pub fn uniform() -> Self {
        Self::of(TauMethodKind::Uniform)
    }

    pub fn is_bayes(&self) -> bool {
        matches!(
            self.kind,
            TauMethodKind::TruncatedHalfCauchy
                | TauMethodKind::UntruncatedHalfCauchy
                | TauMethodKind::Uniform
        )
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.oracle_value) {
            (TauMethodKind::Oracle, Some(v)) if v > 0.0 && v <= 1.0 => {}
            (TauMethodKind::Oracle, v) => {
                return Err(Error::InvalidConfig(format!(
                    "oracle tau must lie in (0, 1], got {v:?}"
                )))
            }
            (_, Some(_)) => {
                return Err(Error::InvalidConfig(
                    "oracle_value is only allowed for the oracle method".into(),
                ))
            }
            _ => {}
        }
        if self.is_bayes() && self.grid_points < 2 {
            return Err(Error::InvalidConfig("grid_points must be at least 2".into()));
        }
        Ok(())
    }

    /// `[lower, upper]` of the τ grid for a Bayes method with `n` observations.
    pub fn grid_range(&self, n: usize) -> (f64, f64) {
        let lower = 1.0 / n.max(2) as f64;
        match self.kind {
            TauMethodKind::UntruncatedHalfCauchy => (lower, UNTRUNCATED_TAU_CAP),
            _ => (lower, 1.0),
        }
    }

    fn ln_prior(&self, tau: f64) -> f64 {
        match self.kind {
            TauMethodKind::TruncatedHalfCauchy | TauMethodKind::UntruncatedHalfCauchy => {
                (2.0 / PI).ln() - (tau * tau).ln_1p()
            }
            _ => 0.0,
        }
    }
}

/// Discrete posterior over a log-spaced τ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauPosterior {
    pub grid: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TauPosterior {
    pub fn mean(&self) -> f64 {
        self.grid.iter().zip(&self.weights).map(|(t, w)| t * w).sum()
    }

    /// Median with the CDF interpolated linearly in `ln τ` between grid
    /// points, so it moves continuously with the weights.
    pub fn median(&self) -> f64 {
        let mut acc = 0.0;
        for (k, w) in self.weights.iter().enumerate() {
            if acc + w >= 0.5 {
                if k == 0 {
                    return self.grid[0];
                }
                let f = ((0.5 - acc) / w).clamp(0.0, 1.0);
                let (a, b) = (self.grid[k - 1].ln(), self.grid[k].ln());
                return (a + f * (b - a)).exp();
            }
            acc += w;
        }
        *self.grid.last().expect("nonempty grid")
    }

    pub fn mass_below(&self, x: f64) -> f64 {
        self.grid
            .iter()
            .zip(&self.weights)
            .filter(|(t, _)| **t < x)
            .map(|(_, w)| w)
            .sum()
    }
}

/// `m(y | τ, σ)` by adaptive quadrature over `s = ln λ`.
pub fn obs_marginal_density(y: f64, tau: f64, sigma: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(tau > 0.0) || !(sigma > 0.0) {
        return Err(Error::DomainError(format!(
            "tau and sigma must be positive, got tau = {tau}, sigma = {sigma}"
        )));
    }
    let s2 = sigma * sigma;
    let f = |s: f64| {
        let l = s.exp();
        let v = s2 + l * l * tau * tau;
        (-0.5 * y * y / v).exp() / (2.0 * PI * v).sqrt() / (PI * s.cosh())
    };
    // knees where λτ matches σ and |y|
    let k1 = (sigma / tau).ln();
    let k2 = (y.abs().max(sigma) / tau).ln();
    let mut pts = vec![-60.0 + k1.min(0.0), 60.0 + k2.max(0.0)];
    for c in [0.0, k1, k2] {
        for d in [-6.0, -2.0, 0.0, 2.0, 6.0] {
            pts.push(c + d);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    integrate_pieces(&f, &pts, quad)
}

fn log_grid(lower: f64, upper: f64, len: usize) -> Vec<f64> {
    let (a, b) = (lower.ln(), upper.ln());
    (0..len)
        .map(|i| {
            if i == 0 {
                lower
            } else if i + 1 == len {
                upper
            } else {
                (a + (b - a) * i as f64 / (len - 1) as f64).exp()
            }
        })
        .collect()
}

fn max_abs_z(y: &[f64], sigma: f64) -> f64 {
    y.iter().fold(0.0f64, |m, v| m.max(v.abs())) / sigma
}

/// Log likelihood `Σ ln m(y_i | τ, σ)` through an interpolation table.
pub fn log_marginal_likelihood(law: LocalLaw, y: &[f64], tau: f64, sigma: f64) -> f64 {
    let t = MarginalTable::covering(MixtureKernel::new(law, tau, sigma), max_abs_z(y, sigma));
    t.log_likelihood(y)
}

const SCAN_POINTS: usize = 60;
const GOLDEN_REL_TOL: f64 = 1e-4;

/// Marginal maximum likelihood over `[lower, upper]` with the scan grid's
/// tables built once; reusable across datasets with the same `σ` and range.
#[derive(Debug, Clone)]
pub struct MmleSolver {
    law: LocalLaw,
    sigma: f64,
    grid: Vec<f64>,
    tables: Vec<MarginalTable>,
}

impl MmleSolver {
    pub fn new(law: LocalLaw, sigma: f64, lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && upper > lower) || !(sigma > 0.0) {
            return Err(Error::DomainError(format!(
                "need 0 < lower < upper and sigma > 0, got [{lower}, {upper}], sigma = {sigma}"
            )));
        }
        let grid = log_grid(lower, upper, SCAN_POINTS);
        let tables = grid
            .par_iter()
            .map(|&t| MarginalTable::new(MixtureKernel::new(law, t, sigma)))
            .collect();
        Ok(Self {
            law,
            sigma,
            grid,
            tables,
        })
    }

    pub fn lower(&self) -> f64 {
        self.grid[0]
    }

    pub fn upper(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Returns `(τ̂, index of the best scan point)`.
    pub fn solve(&self, y: &[f64]) -> (f64, usize) {
        let ll: Vec<f64> = self.tables.iter().map(|t| t.log_likelihood(y)).collect();
        let best = ll
            .iter()
            .enumerate()
            .fold(0, |b, (i, v)| if *v > ll[b] { i } else { b });
        let last = self.grid.len() - 1;
        let a = self.grid[best.saturating_sub(1)].ln();
        let b = self.grid[(best + 1).min(last)].ln();
        let z_max = max_abs_z(y, self.sigma);
        let (s, v) = golden_max(
            |s| {
                let t = MarginalTable::covering(MixtureKernel::new(self.law, s.exp(), self.sigma), z_max);
                t.log_likelihood(y)
            },
            a,
            b,
            GOLDEN_REL_TOL,
        );
        let mut tau = s.exp().clamp(self.lower(), self.upper());
        let mut top = v;
        // the scan point and both ends stay candidates
        for i in [best, 0, last] {
            if ll[i] > top {
                top = ll[i];
                tau = self.grid[i];
            }
        }
        (tau, best)
    }
}

/// Constrained marginal maximum likelihood estimate of τ on `[lower, upper]`.
pub fn mmle_tau(y: &[f64], sigma: f64, lower: f64, upper: f64) -> Result<f64> {
    mmle_tau_for(LocalLaw::HalfCauchy, y, sigma, lower, upper)
}

pub fn mmle_tau_for(law: LocalLaw, y: &[f64], sigma: f64, lower: f64, upper: f64) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::DomainError("mmle needs data".into()));
    }
    Ok(MmleSolver::new(law, sigma, lower, upper)?.solve(y).0)
}

/// Grid posterior over τ with the per-τ tables built once.
#[derive(Debug, Clone)]
pub struct TauGridPosterior {
    method: TauMethod,
    grid: Vec<f64>,
    // ln prior(τ) + ln τ (log-grid Jacobian)
    ln_base: Vec<f64>,
    tables: Vec<MarginalTable>,
}

impl TauGridPosterior {
    pub fn new(law: LocalLaw, method: TauMethod, n: usize, sigma: f64) -> Result<Self> {
        method.validate()?;
        if !method.is_bayes() {
            return Err(Error::InvalidConfig(format!(
                "{:?} has no tau posterior",
                method.kind
            )));
        }
        let (lo, hi) = method.grid_range(n);
        let grid = log_grid(lo, hi, method.grid_points);
        let ln_base = grid.iter().map(|&t| method.ln_prior(t) + t.ln()).collect();
        let tables = grid
            .par_iter()
            .map(|&t| MarginalTable::new(MixtureKernel::new(law, t, sigma)))
            .collect();
        Ok(Self {
            method,
            grid,
            ln_base,
            tables,
        })
    }

    pub fn method(&self) -> &TauMethod {
        &self.method
    }

    pub fn tables(&self) -> &[MarginalTable] {
        &self.tables
    }

    pub fn posterior(&self, y: &[f64]) -> TauPosterior {
        let lw: Vec<f64> = self
            .tables
            .iter()
            .zip(&self.ln_base)
            .map(|(t, b)| b + t.log_likelihood(y))
            .collect();
        let m = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut w: Vec<f64> = lw.iter().map(|l| (l - m).exp()).collect();
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= z);
        TauPosterior {
            grid: self.grid.clone(),
            weights: w,
        }
    }
}

/// Posterior over τ for a fully Bayes method; the grid runs from `1/n` to 1,
/// or to 10 for the untruncated half-Cauchy.
pub fn tau_posterior(y: &[f64], sigma: f64, method: &TauMethod) -> Result<TauPosterior> {
    if y.is_empty() {
        return Err(Error::DomainError("tau posterior needs data".into()));
    }
    Ok(TauGridPosterior::new(LocalLaw::HalfCauchy, *method, y.len(), sigma)?.posterior(y))
}

/// Lower end of the unconstrained search in [`tiao_tan_collapse_rate`].
pub const UNCONSTRAINED_FLOOR: f64 = 1e-8;

/// Fraction of pure-noise datasets of size `n` whose marginal likelihood
/// maximiser over `[1e-8, 1]` lands in the bottom scan cell.
pub fn tiao_tan_collapse_rate(n: usize, reps: usize, seed: u64) -> Result<f64> {
    if reps < 50 {
        return Err(Error::DomainError(format!("collapse rate needs reps >= 50, got {reps}")));
    }
    let solver = MmleSolver::new(LocalLaw::HalfCauchy, 1.0, UNCONSTRAINED_FLOOR, 1.0)?;
    let bottom = solver.grid()[1];
    let hits = par_reps(reps, seed, |rng, _| {
        let y = crate::simulate::standard_normals(rng, n);
        solver.solve(&y).0 < bottom
    });
    Ok(hits.iter().filter(|h| **h).count() as f64 / reps as f64)
}

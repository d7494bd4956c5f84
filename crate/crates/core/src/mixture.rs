//! Fast evaluation of horseshoe-type marginals `m(y | τ, σ)` and κ moments.
//!
//! With `s = ln λ` the marginal `∫ N(y; 0, σ² + λ²τ²) p(λ) dλ` becomes an
//! integral over the whole line of a function that is analytic in a strip and
//! decays exponentially at both ends, so a fixed trapezoid rule with step
//! 0.2 is accurate to ~1e-14 relative. Nodes where `λτ/σ < 1e-9` are pooled
//! into one node at `v = 1`, which keeps a few hundred nodes for any τ.
//!
//! The adaptive-quadrature routes in `density`, `shrinkage` and
//! `calibration` are the reference; tests check these paths against them.

use crate::error::{Error, Result};
use crate::prior::PriorKind;
use crate::special::{norm_ln_pdf, LN_SQRT_2PI};

const STEP: f64 = 0.2;
const S_FLOOR: f64 = -60.0;
const POOL_BELOW: f64 = 1e-9;
const UPPER_MARGIN: f64 = 32.0;

/// Law of the local scale λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalLaw {
    /// `λ ~ C⁺(0, 1)`.
    HalfCauchy,
    /// `λ | η ~ C⁺(0, η)`, `η ~ C⁺(0, 1)`; η integrated out in closed form,
    /// `p(λ) = 4 ln λ / (π² (λ² - 1))`.
    HorseshoePlus,
}

impl LocalLaw {
    pub fn from_kind(kind: PriorKind) -> Result<Self> {
        match kind {
            PriorKind::Horseshoe => Ok(LocalLaw::HalfCauchy),
            PriorKind::HorseshoePlus => Ok(LocalLaw::HorseshoePlus),
            other => Err(Error::UnsupportedKind(other)),
        }
    }

    /// Density of `s = ln λ`.
    pub fn density_ln_scale(self, s: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            LocalLaw::HalfCauchy => 1.0 / (PI * s.cosh()),
            LocalLaw::HorseshoePlus => {
                if s.abs() < 1e-8 {
                    2.0 / (PI * PI)
                } else {
                    2.0 * s / (PI * PI * s.sinh())
                }
            }
        }
    }
}

/// Per-observation posterior functionals of κ = σ² / (σ² + λ²τ²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaMoments {
    pub ln_marginal: f64,
    pub e_kappa: f64,
    /// `E[1 - κ | y]`, computed from its own weights so it keeps full
    /// relative precision when it is tiny.
    pub e_one_minus_kappa: f64,
    pub var_kappa: f64,
}

/// Trapezoid nodes for one `(law, τ, σ)`.
#[derive(Debug, Clone)]
pub struct MixtureKernel {
    law: LocalLaw,
    tau: f64,
    sigma: f64,
    // ln w_j - ln sqrt(2π v_j)
    offset: Vec<f64>,
    half_inv_v: Vec<f64>,
    inv_v: Vec<f64>,
    one_minus_inv_v: Vec<f64>,
}

impl MixtureKernel {
    pub fn new(law: LocalLaw, tau: f64, sigma: f64) -> Self {
        assert!(tau > 0.0 && sigma > 0.0, "tau and sigma must be positive");
        let t = tau / sigma;
        let s_pool = (POOL_BELOW / t).ln();
        let s_top = UPPER_MARGIN + (1.0 / t).ln().max(0.0);
        // nodes sit on the fixed lattice j * STEP so kernels for nearby τ
        // share abscissae
        let j_floor = (S_FLOOR / STEP).floor() as i64;
        let j_pool = (s_pool / STEP).floor() as i64;
        let j_top = (s_top / STEP).ceil() as i64;

        let mut pooled = 0.0;
        for j in j_floor..=j_pool.min(j_top) {
            pooled += STEP * law.density_ln_scale(j as f64 * STEP);
        }
        let cap = (j_top - j_pool).max(0) as usize + 1;
        let mut k = Self {
            law,
            tau,
            sigma,
            offset: Vec::with_capacity(cap),
            half_inv_v: Vec::with_capacity(cap),
            inv_v: Vec::with_capacity(cap),
            one_minus_inv_v: Vec::with_capacity(cap),
        };
        if pooled > 0.0 {
            k.push(pooled.ln(), 0.0);
        }
        for j in (j_pool + 1).max(j_floor)..=j_top {
            let s = j as f64 * STEP;
            let w = STEP * law.density_ln_scale(s);
            if w > 0.0 {
                k.push(w.ln(), t * t * (2.0 * s).exp());
            }
        }
        k
    }

    fn push(&mut self, ln_w: f64, excess: f64) {
        let v = 1.0 + excess;
        self.offset.push(ln_w - 0.5 * v.ln() - LN_SQRT_2PI);
        self.half_inv_v.push(0.5 / v);
        self.inv_v.push(1.0 / v);
        self.one_minus_inv_v.push(excess / v);
    }

    pub fn law(&self) -> LocalLaw {
        self.law
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.offset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offset.is_empty()
    }

    #[inline]
    fn max_exponent(&self, z2: f64) -> f64 {
        self.offset
            .iter()
            .zip(&self.half_inv_v)
            .map(|(o, h)| o - z2 * h)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `ln m(y | τ, σ)`.
    pub fn ln_marginal(&self, y: f64) -> f64 {
        let z = y / self.sigma;
        let z2 = z * z;
        let m = self.max_exponent(z2);
        let s0: f64 = self
            .offset
            .iter()
            .zip(&self.half_inv_v)
            .map(|(o, h)| (o - z2 * h - m).exp())
            .sum();
        m + s0.ln() - self.sigma.ln()
    }

    /// `(ln m(y), E[κ | y])`.
    pub fn ln_marginal_and_e_kappa(&self, y: f64) -> (f64, f64) {
        let z = y / self.sigma;
        let z2 = z * z;
        let m = self.max_exponent(z2);
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        for ((o, h), iv) in self.offset.iter().zip(&self.half_inv_v).zip(&self.inv_v) {
            let e = (o - z2 * h - m).exp();
            s0 += e;
            s1 += e * iv;
        }
        (m + s0.ln() - self.sigma.ln(), s1 / s0)
    }

    /// Posterior mean of θ, `(1 - E[κ|y]) y`.
    pub fn posterior_mean(&self, y: f64) -> f64 {
        let z = y / self.sigma;
        let z2 = z * z;
        let m = self.max_exponent(z2);
        let mut s0 = 0.0;
        let mut s1c = 0.0;
        for ((o, h), c) in self
            .offset
            .iter()
            .zip(&self.half_inv_v)
            .zip(&self.one_minus_inv_v)
        {
            let e = (o - z2 * h - m).exp();
            s0 += e;
            s1c += e * c;
        }
        s1c / s0 * y
    }

    pub fn moments(&self, y: f64) -> KappaMoments {
        let z = y / self.sigma;
        let z2 = z * z;
        let m = self.max_exponent(z2);
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        let mut s1c = 0.0;
        for (((o, h), iv), c) in self
            .offset
            .iter()
            .zip(&self.half_inv_v)
            .zip(&self.inv_v)
            .zip(&self.one_minus_inv_v)
        {
            let e = (o - z2 * h - m).exp();
            s0 += e;
            s1 += e * iv;
            s1c += e * c;
        }
        let e_kappa = s1 / s0;
        let mut var = 0.0;
        for ((o, h), iv) in self.offset.iter().zip(&self.half_inv_v).zip(&self.inv_v) {
            let d = iv - e_kappa;
            var += (o - z2 * h - m).exp() * d * d;
        }
        KappaMoments {
            ln_marginal: m + s0.ln() - self.sigma.ln(),
            e_kappa,
            e_one_minus_kappa: s1c / s0,
            var_kappa: var / s0,
        }
    }
}

const TABLE_STEP: f64 = 0.025;
const TABLE_MAX: f64 = 14.0;

/// Interpolation table of `ln m` and `E[κ]` over `|y| / σ ∈ [0, 14]` for one
/// kernel; outside the range it calls the kernel directly.
#[derive(Debug, Clone)]
pub struct MarginalTable {
    kernel: MixtureKernel,
    ln_m: Vec<f64>,
    e_kappa: Vec<f64>,
}

impl MarginalTable {
    pub fn new(kernel: MixtureKernel) -> Self {
        Self::covering(kernel, TABLE_MAX)
    }

    /// Table over `|y| / σ ∈ [0, z_max]` (capped at 14), for callers that
    /// know the range of their data.
    pub fn covering(kernel: MixtureKernel, z_max: f64) -> Self {
        let z_max = z_max.clamp(0.0, TABLE_MAX);
        // two spare nodes so the cubic stencil covers z_max itself
        let len = (z_max / TABLE_STEP).ceil() as usize + 3;
        let sigma = kernel.sigma();
        let mut ln_m = Vec::with_capacity(len);
        let mut e_kappa = Vec::with_capacity(len);
        for i in 0..len {
            let (l, e) = kernel.ln_marginal_and_e_kappa(i as f64 * TABLE_STEP * sigma);
            ln_m.push(l);
            e_kappa.push(e);
        }
        Self {
            kernel,
            ln_m,
            e_kappa,
        }
    }

    pub fn kernel(&self) -> &MixtureKernel {
        &self.kernel
    }

    fn lookup(&self, table: &[f64], z: f64) -> Option<f64> {
        let x = z / TABLE_STEP;
        let i = x.floor() as usize;
        if i + 2 >= table.len() {
            return None;
        }
        let t = x - i as f64;
        // the tabulated functions are even in y; reflect at the origin
        let f = |k: isize| table[k.unsigned_abs()];
        let i = i as isize;
        let (f0, f1, f2, f3) = (f(i - 1), f(i), f(i + 1), f(i + 2));
        // cubic Lagrange through nodes -1, 0, 1, 2
        Some(
            -t * (t - 1.0) * (t - 2.0) / 6.0 * f0 + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * f1
                - (t + 1.0) * t * (t - 2.0) / 2.0 * f2
                + (t + 1.0) * t * (t - 1.0) / 6.0 * f3,
        )
    }

    pub fn ln_marginal(&self, y: f64) -> f64 {
        let z = (y / self.kernel.sigma()).abs();
        self.lookup(&self.ln_m, z)
            .unwrap_or_else(|| self.kernel.ln_marginal(y))
    }

    pub fn e_kappa(&self, y: f64) -> f64 {
        let z = (y / self.kernel.sigma()).abs();
        match self.lookup(&self.e_kappa, z) {
            Some(v) => v.clamp(0.0, 1.0),
            None => self.kernel.ln_marginal_and_e_kappa(y).1,
        }
    }

    /// Sum of `ln m(y_i)` over the data.
    pub fn log_likelihood(&self, ys: &[f64]) -> f64 {
        ys.iter().map(|&y| self.ln_marginal(y)).sum()
    }
}

/// `ln N(y; 0, σ²)`, the τ → 0 limit of the marginal.
pub fn null_ln_marginal(y: f64, sigma: f64) -> f64 {
    norm_ln_pdf(y / sigma) - sigma.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laws_normalised() {
        for law in [LocalLaw::HalfCauchy, LocalLaw::HorseshoePlus] {
            let total: f64 = (-400..=400)
                .map(|j| STEP * law.density_ln_scale(j as f64 * STEP))
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "{law:?} {total}");
        }
    }

    #[test]
    fn kernel_size_is_bounded() {
        for tau in [1e-8, 1e-3, 1.0, 10.0] {
            let k = MixtureKernel::new(LocalLaw::HalfCauchy, tau, 1.0);
            assert!(k.len() < 400, "{tau}: {}", k.len());
        }
    }

    #[test]
    fn small_tau_limit_is_null_density() {
        let k = MixtureKernel::new(LocalLaw::HalfCauchy, 1e-10, 1.0);
        let d = k.ln_marginal(1.0) - null_ln_marginal(1.0, 1.0);
        assert!(d.abs() < 1e-8, "{d}");
    }

    #[test]
    fn sigma_scaling() {
        let a = MixtureKernel::new(LocalLaw::HalfCauchy, 0.3, 2.0);
        let b = MixtureKernel::new(LocalLaw::HalfCauchy, 0.15, 1.0);
        let y = 1.7;
        assert!((a.ln_marginal(y) - (b.ln_marginal(y / 2.0) - 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn moments_consistent() {
        let k = MixtureKernel::new(LocalLaw::HorseshoePlus, 0.01, 1.0);
        for y in [0.0, 0.5, 3.0, 6.0, 40.0] {
            let m = k.moments(y);
            assert!((m.e_kappa + m.e_one_minus_kappa - 1.0).abs() < 1e-12);
            assert!(m.var_kappa >= 0.0 && m.var_kappa <= 0.25);
            assert!((k.posterior_mean(y) - m.e_one_minus_kappa * y).abs() <= 1e-12 * y.abs());
        }
    }

    #[test]
    fn table_matches_kernel() {
        let t = MarginalTable::new(MixtureKernel::new(LocalLaw::HalfCauchy, 0.005, 1.0));
        for i in 0..400 {
            let y = -16.0 + 0.0813 * i as f64;
            let exact = t.kernel().ln_marginal_and_e_kappa(y);
            assert!((t.ln_marginal(y) - exact.0).abs() < 1e-6, "{y} {} {}", t.ln_marginal(y), exact.0);
            assert!((t.e_kappa(y) - exact.1).abs() < 1e-5, "{y} {} {}", t.e_kappa(y), exact.1);
        }
    }
}

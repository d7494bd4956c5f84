use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PriorKind {
    Horseshoe,
    HorseshoePlus,
    Laplace,
    Ridge,
    Cauchy,
    StudentT,
}

impl PriorKind {
    /// Scale mixtures with a half-Cauchy local scale (log-pole at the origin).
    pub fn is_horseshoe_type(self) -> bool {
        matches!(self, PriorKind::Horseshoe | PriorKind::HorseshoePlus)
    }

    fn needs_aux(self) -> bool {
        matches!(self, PriorKind::Laplace | PriorKind::Ridge | PriorKind::StudentT)
    }
}

/// A prior on one coordinate `θ`, together with the noise scale of `y | θ`.
///
/// `aux` is the Laplace scale `b` in `(2b)^-1 exp(-|θ|/b)`, the ridge sd, or
/// the Student-t degrees of freedom; it is ignored by the other kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub kind: PriorKind,
    pub tau: f64,
    pub sigma: f64,
    pub aux: f64,
}

impl PriorSpec {
    pub fn new(kind: PriorKind, tau: f64, sigma: f64, aux: f64) -> Result<Self> {
        let spec = Self {
            kind,
            tau,
            sigma,
            aux,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn horseshoe(tau: f64) -> Self {
        Self {
            kind: PriorKind::Horseshoe,
            tau,
            sigma: 1.0,
            aux: 1.0,
        }
    }

    pub fn horseshoe_plus(tau: f64) -> Self {
        Self {
            kind: PriorKind::HorseshoePlus,
            ..Self::horseshoe(tau)
        }
    }

    pub fn laplace(scale: f64) -> Self {
        Self {
            kind: PriorKind::Laplace,
            aux: scale,
            ..Self::horseshoe(1.0)
        }
    }

    pub fn ridge(sd: f64) -> Self {
        Self {
            kind: PriorKind::Ridge,
            aux: sd,
            ..Self::horseshoe(1.0)
        }
    }

    pub fn cauchy() -> Self {
        Self {
            kind: PriorKind::Cauchy,
            ..Self::horseshoe(1.0)
        }
    }

    pub fn student_t(dof: f64) -> Self {
        Self {
            kind: PriorKind::StudentT,
            aux: dof,
            ..Self::horseshoe(1.0)
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidConfig(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.kind.needs_aux() && !(self.aux > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "{:?} needs aux > 0, got {}",
                self.kind, self.aux
            )));
        }
        Ok(())
    }
}

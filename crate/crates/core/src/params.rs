//! The dimensionless control group of the driven oscillator.
//!
//! With coordinate `X = kx`, momentum `P = pk/mω` and time `τ = ωt`, every
//! result depends on the physical constants only through the resonance number
//! `μ = Ω/ω`, the wave amplitude `ε = εk/mω²` and the effective Planck constant
//! `ħ₀ = ħk²/mω`. The detuning `μω − Ω` is pinned to zero. Quasienergies are
//! reported in units of `ħω`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Detuning from exact resonance. Only the exactly resonant case is modelled.
pub const DETUNING: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub mu: usize,
    pub eps: f64,
    pub hbar0: f64,
    pub n_max: usize,
}

impl Params {
    pub fn new(mu: usize, eps: f64, hbar0: f64, n_max: usize) -> Result<Self> {
        let p = Self { mu, eps, hbar0, n_max };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu < 1 {
            return Err(Error::InvalidParams("mu must be >= 1".into()));
        }
        if !(self.hbar0 > 0.0 && self.hbar0.is_finite()) {
            return Err(Error::InvalidParams(format!("hbar0 must be > 0, got {}", self.hbar0)));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParams(format!("eps must be >= 0, got {}", self.eps)));
        }
        if self.n_max < self.mu + 2 {
            return Err(Error::InvalidParams(format!(
                "n_max = {} must be at least mu + 2 = {}",
                self.n_max,
                self.mu + 2
            )));
        }
        Ok(())
    }

    /// Same system with a different wave amplitude.
    pub fn with_eps(self, eps: f64) -> Self {
        Self { eps, ..self }
    }

    /// Radius `√(2nħ₀)` of the classical orbit matching oscillator level `n`.
    pub fn level_radius(&self, n: f64) -> f64 {
        (2.0 * n * self.hbar0).sqrt()
    }

    /// Inverse of [`Params::level_radius`].
    pub fn radius_level(&self, r: f64) -> f64 {
        r * r / (2.0 * self.hbar0)
    }
}

/// Converts an ion-trap Lamb–Dicke parameter into `ħ₀ = 2η²`.
pub fn lamb_dicke_to_hbar0(eta: f64) -> f64 {
    2.0 * eta * eta
}

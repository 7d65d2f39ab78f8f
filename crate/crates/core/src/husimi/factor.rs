//! Separable approximation `Φ ≈ γ(r)·ξ(φ)` of a ground-state Husimi field,
//! valid when the packet centre `n_e` is large and `(n_e + m)! ≈ n_e! n_e^m`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{HusimiField, PolarGrid};
use crate::floquet::GaussianAnsatz;
use crate::params::Params;
use crate::specfun::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Upper,
    Lower,
}

/// Radial factor
/// `γ(r) = e^{−r²/2ħ₀} r^{2n_e} Γ² / (2π (2ħ₀)^{n_e} n_e!) · Σ_j (r/r_e)^j e^{−j²/4w²}`
/// with `j ∈ [−2Δm, 2Δm]` and `w` the packet width in levels.
///
/// Zero at the origin (the packet sits far from `n = 0`).
pub fn gamma_radial(params: &Params, ansatz: &GaussianAnsatz, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let h = params.hbar0;
    let n_e = ansatz.n_e;
    let pre = -r * r / (2.0 * h) + 2.0 * n_e * r.ln() - n_e * (2.0 * h).ln() - ln_gamma(n_e + 1.0)
        + 2.0 * ansatz.norm.ln()
        - (2.0 * PI).ln();
    let x = (r / ansatz.r_e).ln();
    let inv = 0.25 / (ansatz.width * ansatz.width);
    let span = 2 * ansatz.delta_m as i64;
    let exps: Vec<f64> = (-span..=span).map(|j| j as f64 * x - (j * j) as f64 * inv).collect();
    let top = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = exps.iter().map(|e| (e - top).exp()).sum();
    (pre + top).exp() * sum
}

/// Angular factor over the resonant harmonics `k = μm`:
/// upper `1 + 2 Σ cos(μmφ) e^{−(μm)²/4w²}`, lower with `μφ → μφ − π`.
pub fn xi_angular(mu: usize, ansatz: &GaussianAnsatz, phi: f64, which: Branch) -> f64 {
    let mu_f = mu as f64;
    let top = (2 * ansatz.delta_m).div_ceil(mu);
    let inv = 0.25 / (ansatz.width * ansatz.width);
    let arg = match which {
        Branch::Upper => mu_f * phi,
        Branch::Lower => mu_f * phi - PI,
    };
    1.0 + 2.0
        * (1..=top)
            .map(|m| {
                let k = mu_f * m as f64;
                (arg * m as f64).cos() * (-k * k * inv).exp()
            })
            .sum::<f64>()
}

/// `γ(r)·ξ(φ)` on the grid, scaled to unit peak. Truncation ripple of the
/// angular sum below zero is clipped.
pub fn factored_field(params: &Params, ansatz: &GaussianAnsatz, grid: &PolarGrid, which: Branch) -> HusimiField {
    let gamma: Vec<f64> = grid.r_values().iter().map(|&r| gamma_radial(params, ansatz, r)).collect();
    let xi: Vec<f64> =
        grid.phi_values().iter().map(|&phi| xi_angular(params.mu, ansatz, phi, which).max(0.0)).collect();
    let mut values: Vec<f64> = gamma.iter().flat_map(|g| xi.iter().map(move |x| g * x)).collect();
    let peak = values.iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 {
        values.iter_mut().for_each(|v| *v /= peak);
    }
    HusimiField { grid: grid.clone(), values, strobo_index: 0, params: *params }
}

//! Husimi functions of oscillator states on polar phase-space grids.
//!
//! With `z = r e^{iφ}` and coefficients `C_n` in the oscillator basis,
//!
//! ```text
//! Φ(r, φ) = (1/2π) | Σ_n C_n* r^n e^{inφ} / √((2ħ₀)^n n!) |² e^{−r²/2ħ₀}
//! ```
//!
//! Every term is carried as a log-magnitude plus a phase, and the largest
//! log-magnitude is factored out of each sum, so the kernel neither overflows
//! nor flushes to zero for any radius reachable with `n_max ≤ 10⁵`.

mod analysis;
mod factor;

pub use analysis::{
    find_maxima, mirror_x_error, peak_normalized_difference, radial_peak, rotational_symmetry_error, Maximum,
};
pub use factor::{factored_field, gamma_radial, xi_angular, Branch};

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::QEState;
use crate::params::Params;
use crate::specfun::log_factorial;

/// A state in the oscillator basis, `coeffs[n] = C_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    coeffs: Vec<Complex64>,
}

impl FockState {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParams(format!("state norm² is {norm}, expected 1")));
        }
        Ok(Self { coeffs })
    }

    /// Oscillator eigenstate `|n0⟩` in a basis of `len` levels.
    pub fn number(n0: usize, len: usize) -> Self {
        assert!(n0 < len);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        coeffs[n0] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    /// Embeds a quasienergy state at its ladder levels.
    pub fn from_qe(params: &Params, state: &QEState) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); params.n_max + 1];
        for (n, c) in state.levels(params.mu) {
            if n > params.n_max {
                return Err(Error::Truncation { needed: n, n_max: params.n_max });
            }
            coeffs[n] = Complex64::new(c, 0.0);
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Coherent state centred at `(X, P)`:
/// `C_m = e^{−(X²+P²)/4ħ₀} (X+iP)^m / √((2ħ₀)^m m!)`, `m = 0..=n_max`.
pub fn coherent_coefficients(params: &Params, x: f64, p: f64) -> Result<FockState> {
    let h = params.hbar0;
    let rho2 = x * x + p * p;
    let mut coeffs = Vec::with_capacity(params.n_max + 1);
    if rho2 == 0.0 {
        coeffs.push(Complex64::new(1.0, 0.0));
        coeffs.resize(params.n_max + 1, Complex64::new(0.0, 0.0));
        return Ok(FockState { coeffs });
    }
    let ln_rho = 0.5 * rho2.ln();
    let theta = p.atan2(x);
    let ln_2h = (2.0 * h).ln();
    for m in 0..=params.n_max {
        let mf = m as f64;
        let ln_mag = -rho2 / (4.0 * h) + mf * ln_rho - 0.5 * mf * ln_2h - 0.5 * log_factorial(m);
        coeffs.push(Complex64::from_polar(ln_mag.exp(), mf * theta));
    }
    let state = FockState { coeffs };
    let tail = 1.0 - state.norm_sqr();
    if tail > 1e-10 {
        return Err(Error::TruncationTail { tail });
    }
    Ok(state)
}

/// Extra per-level phase applied inside the Husimi sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseRule {
    None,
    /// Stroboscopic time `t = sT`: level `n` picks up `2π n s / μ`.
    Stroboscopic {
        s: i64,
    },
}

impl PhaseRule {
    /// Phase in units of `2π/μ`, reduced to `0..μ`.
    fn residue(&self, n: usize, mu: usize) -> usize {
        match *self {
            PhaseRule::None => 0,
            PhaseRule::Stroboscopic { s } => ((n as i128 * s as i128).rem_euclid(mu as i128)) as usize,
        }
    }

    pub fn angle(&self, n: usize, mu: usize) -> f64 {
        2.0 * PI * self.residue(n, mu) as f64 / mu as f64
    }
}

/// Nonzero terms of a state, prepared for repeated Husimi evaluation.
struct Kernel {
    levels: Vec<usize>,
    conj: Vec<Complex64>,
    /// `−(n/2) ln 2ħ₀ − ½ ln n!`
    log_base: Vec<f64>,
    residues: Vec<usize>,
    quarter_inv_h: f64,
    mu: usize,
}

impl Kernel {
    fn new(params: &Params, terms: impl Iterator<Item = (usize, Complex64)>, rule: PhaseRule) -> Self {
        let ln_2h = (2.0 * params.hbar0).ln();
        let mut k = Kernel {
            levels: Vec::new(),
            conj: Vec::new(),
            log_base: Vec::new(),
            residues: Vec::new(),
            quarter_inv_h: 0.25 / params.hbar0,
            mu: params.mu,
        };
        for (n, c) in terms {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            k.levels.push(n);
            k.conj.push(c.conj());
            k.log_base.push(-0.5 * n as f64 * ln_2h - 0.5 * log_factorial(n));
            k.residues.push(rule.residue(n, params.mu));
        }
        k
    }

    /// Log-magnitudes `t_n(r)` and their maximum; `None` when no term survives.
    fn log_terms(&self, r: f64, out: &mut Vec<f64>) -> Option<f64> {
        out.clear();
        let ln_r = r.ln();
        let gauss = r * r * self.quarter_inv_h;
        let mut t_max = f64::NEG_INFINITY;
        for (&n, &b) in self.levels.iter().zip(&self.log_base) {
            let t = if n == 0 {
                b - gauss
            } else if r == 0.0 {
                f64::NEG_INFINITY
            } else {
                n as f64 * ln_r + b - gauss
            };
            t_max = t_max.max(t);
            out.push(t);
        }
        t_max.is_finite().then_some(t_max)
    }

    fn point(&self, r: f64, phi: f64) -> f64 {
        let mut t = Vec::with_capacity(self.levels.len());
        let Some(t_max) = self.log_terms(r, &mut t) else {
            return 0.0;
        };
        let mut sum = Complex64::new(0.0, 0.0);
        for (((&n, &res), &c), &ti) in self.levels.iter().zip(&self.residues).zip(&self.conj).zip(&t) {
            let angle = n as f64 * phi + 2.0 * PI * res as f64 / self.mu as f64;
            sum += c * Complex64::from_polar((ti - t_max).exp(), angle);
        }
        (2.0 * t_max).exp() * sum.norm_sqr() / (2.0 * PI)
    }

    /// One grid row at radius `r` over the uniform angles `2πj/N`.
    fn row(&self, r: f64, table: &[Complex64], fallback: Option<&[Complex64]>, out: &mut [f64]) {
        let n_phi = table.len();
        let mut t = Vec::with_capacity(self.levels.len());
        let Some(t_max) = self.log_terms(r, &mut t) else {
            out.iter_mut().for_each(|v| *v = 0.0);
            return;
        };
        let amps: Vec<Complex64> = self.conj.iter().zip(&t).map(|(c, ti)| c * (ti - t_max).exp()).collect();
        let scale = (2.0 * t_max).exp() / (2.0 * PI);
        let step = n_phi / self.mu;
        for (j, v) in out.iter_mut().enumerate() {
            let mut sum = Complex64::new(0.0, 0.0);
            for (i, a) in amps.iter().enumerate() {
                let n = self.levels[i];
                let z = match fallback {
                    None => table[(n * j + self.residues[i] * step) % n_phi],
                    Some(shift) => table[(n * j) % n_phi] * shift[i],
                };
                sum += a * z;
            }
            *v = scale * sum.norm_sqr();
        }
    }
}

/// `Φ(r, φ)` of an arbitrary state, with an optional per-level phase rule.
pub fn husimi_point(params: &Params, state: &FockState, r: f64, phi: f64, rule: PhaseRule) -> f64 {
    let kernel = Kernel::new(params, state.coeffs.iter().copied().enumerate(), rule);
    kernel.point(r, phi)
}

/// Closed form for the oscillator eigenstate `|n0⟩`:
/// `(1/2π) e^{−r²/2ħ₀} r^{2n0} / ((2ħ₀)^{n0} n0!)`.
pub fn husimi_fock(params: &Params, n0: usize, r: f64) -> f64 {
    let h = params.hbar0;
    if r == 0.0 {
        return if n0 == 0 { 1.0 / (2.0 * PI) } else { 0.0 };
    }
    let n = n0 as f64;
    let ln = -r * r / (2.0 * h) + 2.0 * n * r.ln() - n * (2.0 * h).ln() - log_factorial(n0);
    ln.exp() / (2.0 * PI)
}

/// Radii and uniformly spaced angles `φ_j = 2πj/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    r_values: Vec<f64>,
    phi_values: Vec<f64>,
}

impl PolarGrid {
    /// `n_r` radii spaced uniformly on `[0, r_max]`.
    pub fn new(r_max: f64, n_r: usize, n_phi: usize) -> Result<Self> {
        if r_max.is_nan() || r_max <= 0.0 || n_r < 2 {
            return Err(Error::InvalidGrid(format!("need r_max > 0 and n_r >= 2, got {r_max}, {n_r}")));
        }
        let dr = r_max / (n_r - 1) as f64;
        Self::with_radii((0..n_r).map(|i| i as f64 * dr).collect(), n_phi)
    }

    pub fn with_radii(r_values: Vec<f64>, n_phi: usize) -> Result<Self> {
        if n_phi < 4 {
            return Err(Error::InvalidGrid(format!("n_phi = {n_phi} < 4")));
        }
        if r_values.is_empty() || r_values[0] < 0.0 || r_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("radii must be ascending and nonnegative".into()));
        }
        let phi_values = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
        Ok(Self { r_values, phi_values })
    }

    /// 400 radii out to 1.5× the outer radius of `cell`, 120·μ angles.
    pub fn default_for(params: &Params, outer_level: usize) -> Result<Self> {
        let r_max = 1.5 * params.level_radius(outer_level as f64);
        Self::new(r_max, 400, 120 * params.mu)
    }

    pub fn r_values(&self) -> &[f64] {
        &self.r_values
    }

    pub fn phi_values(&self) -> &[f64] {
        &self.phi_values
    }

    pub fn n_r(&self) -> usize {
        self.r_values.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi_values.len()
    }

    pub fn r_max(&self) -> f64 {
        *self.r_values.last().unwrap()
    }
}

/// Husimi values on a polar grid, `values[i * n_phi + j]` at `(r_i, φ_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HusimiField {
    pub grid: PolarGrid,
    pub values: Vec<f64>,
    pub strobo_index: i64,
    pub params: Params,
}

impl HusimiField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_phi() + j]
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Pointwise sum of two fields on the same grid.
    pub fn combined(&self, other: &HusimiField) -> Result<HusimiField> {
        if self.grid != other.grid {
            return Err(Error::Mismatch("fields live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(HusimiField { values, ..self.clone() })
    }
}

fn evaluate(params: &Params, kernel: &Kernel, grid: &PolarGrid, strobo_index: i64, rule: PhaseRule) -> HusimiField {
    let n_phi = grid.n_phi();
    let table: Vec<Complex64> =
        (0..n_phi).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n_phi as f64)).collect();
    let shifts: Option<Vec<Complex64>> = (!n_phi.is_multiple_of(params.mu))
        .then(|| kernel.levels.iter().map(|&n| Complex64::from_polar(1.0, rule.angle(n, params.mu))).collect());
    let mut values = vec![0.0; grid.n_r() * n_phi];
    values
        .par_chunks_mut(n_phi)
        .zip(grid.r_values.par_iter())
        .for_each(|(row, &r)| kernel.row(r, &table, shifts.as_deref(), row));
    HusimiField { grid: grid.clone(), values, strobo_index, params: *params }
}

/// Husimi field of an arbitrary state on a grid.
pub fn husimi_field(params: &Params, state: &FockState, grid: &PolarGrid, rule: PhaseRule) -> HusimiField {
    let kernel = Kernel::new(params, state.coeffs.iter().copied().enumerate(), rule);
    let s = match rule {
        PhaseRule::None => 0,
        PhaseRule::Stroboscopic { s } => s,
    };
    evaluate(params, &kernel, grid, s, rule)
}

/// Husimi field of a quasienergy state at stroboscopic time `t = sT`.
pub fn husimi_qe(params: &Params, state: &QEState, grid: &PolarGrid, s: i64) -> Result<HusimiField> {
    let last = state.cell.level(params.mu, state.cell.m_hi);
    if last > params.n_max {
        return Err(Error::Truncation { needed: last, n_max: params.n_max });
    }
    let rule = PhaseRule::Stroboscopic { s };
    let kernel = Kernel::new(params, state.levels(params.mu).map(|(n, c)| (n, Complex64::new(c, 0.0))), rule);
    Ok(evaluate(params, &kernel, grid, s, rule))
}

/// `∫ Φ r dr dφ` by the trapezoid rule; for a normalised state this is `ħ₀`.
pub fn normalization_integral(field: &HusimiField) -> Result<f64> {
    let grid = &field.grid;
    if grid.r_values[0] != 0.0 {
        return Err(Error::InvalidGrid("radial grid must start at r = 0".into()));
    }
    let n_phi = grid.n_phi();
    let peak = field.peak();
    let edge = field.values[(grid.n_r() - 1) * n_phi..].iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 && edge > 1e-14 * peak {
        return Err(Error::GridCoverage { ratio: edge / peak });
    }
    let dphi = 2.0 * PI / n_phi as f64;
    let ring: Vec<f64> = (0..grid.n_r())
        .map(|i| grid.r_values[i] * field.values[i * n_phi..(i + 1) * n_phi].iter().sum::<f64>() * dphi)
        .collect();
    Ok(grid.r_values.windows(2).zip(ring.windows(2)).map(|(r, f)| 0.5 * (r[1] - r[0]) * (f[0] + f[1])).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(hbar0: f64) -> Params {
        Params::new(4, 0.002, hbar0, 600).unwrap()
    }

    #[test]
    fn coherent_vacuum_and_norm() {
        let params = p(0.12);
        let c = coherent_coefficients(&params, 0.0, 0.0).unwrap();
        assert_eq!(c.coeffs()[0], Complex64::new(1.0, 0.0));
        assert!(c.coeffs()[1..].iter().all(|z| z.norm() == 0.0));
        for (x, y) in [(1.0, 0.5), (-3.0, 2.0), (5.3176, 0.0), (0.0, -7.0)] {
            let c = coherent_coefficients(&params, x, y).unwrap();
            assert!((c.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn coherent_peak_index() {
        let params = p(0.12);
        let c = coherent_coefficients(&params, 5.3176, 0.0).unwrap();
        let (argmax, _) =
            c.coeffs().iter().enumerate().fold((0, 0.0), |b, (m, z)| if z.norm() > b.1 { (m, z.norm()) } else { b });
        assert!((argmax as i64 - 118).abs() <= 1, "argmax = {argmax}");
    }

    #[test]
    fn coherent_tail_violation() {
        let params = Params::new(4, 0.0, 0.12, 50).unwrap();
        assert!(matches!(coherent_coefficients(&params, 5.3, 0.0), Err(Error::TruncationTail { .. })));
    }

    #[test]
    fn vacuum_point() {
        let params = p(0.12);
        let v = FockState::number(0, 10);
        assert!((husimi_point(&params, &v, 0.0, 0.3, PhaseRule::None) - 1.0 / (2.0 * PI)).abs() < 1e-16);
        assert!((husimi_fock(&params, 0, 0.0) - 0.159155).abs() < 1e-6);
    }

    #[test]
    fn fock_closed_form_peak() {
        let params = p(0.12);
        // peak value e^{−n} n^n / (2π n!) at r = √(2nħ₀)
        let n0 = 10;
        let r0 = (2.0 * n0 as f64 * 0.12f64).sqrt();
        let want = (-(n0 as f64) + n0 as f64 * (n0 as f64).ln() - log_factorial(n0)).exp() / (2.0 * PI);
        assert!(((husimi_fock(&params, n0, r0) - want) / want).abs() < 1e-13);
        let r2 = (2.0 * 2.0 * 0.12f64).sqrt();
        assert!((r2 - 0.69282).abs() < 1e-5);
        let h = |r: f64| husimi_fock(&params, 2, r);
        assert!(h(r2) > h(r2 - 1e-3) && h(r2) > h(r2 + 1e-3));
    }

    #[test]
    fn fock_point_matches_closed_form() {
        let params = p(0.12);
        for n0 in [0usize, 1, 2, 10, 57, 118, 200] {
            let state = FockState::number(n0, 201);
            for r in [0.05, 0.7, 2.0, 5.3, 6.93, 9.0, 12.0] {
                let a = husimi_point(&params, &state, r, 1.234, PhaseRule::None);
                let b = husimi_fock(&params, n0, r);
                if b > 0.0 {
                    assert!(((a - b) / b).abs() < 1e-12, "n0={n0} r={r}: {a} vs {b}");
                } else {
                    assert_eq!(a, 0.0);
                }
            }
        }
    }

    #[test]
    fn no_overflow_far_out() {
        let params = Params::new(1, 0.0, 0.12, 100_000).unwrap();
        let state = FockState::number(100_000, 100_001);
        let r = (2.0 * 100_000.0 * 0.12f64).sqrt();
        let v = husimi_point(&params, &state, r, 0.0, PhaseRule::None);
        assert!(v.is_finite() && v > 0.0);
        let w = husimi_fock(&params, 100_000, r);
        assert!(((v - w) / w).abs() < 1e-9);
    }

    #[test]
    fn stroboscopic_residues() {
        let r = PhaseRule::Stroboscopic { s: -1 };
        assert_eq!(r.residue(3, 4), 1);
        assert_eq!(PhaseRule::Stroboscopic { s: 4 }.residue(7, 4), 0);
        assert_eq!(PhaseRule::None.residue(7, 4), 0);
    }

    #[test]
    fn grid_validation() {
        assert!(PolarGrid::new(3.0, 10, 3).is_err());
        assert!(PolarGrid::new(0.0, 10, 8).is_err());
        assert!(PolarGrid::with_radii(vec![0.0, 1.0, 1.0], 8).is_err());
        let g = PolarGrid::new(3.0, 31, 8).unwrap();
        assert_eq!(g.n_r(), 31);
        assert!((g.phi_values()[2] - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn vacuum_normalization() {
        let params = p(0.12);
        let grid = PolarGrid::new(3.0, 301, 16).unwrap();
        let f = husimi_field(&params, &FockState::number(0, 1), &grid, PhaseRule::None);
        let integral = normalization_integral(&f).unwrap();
        assert!(((integral - 0.12) / 0.12).abs() < 0.005);
        let short = PolarGrid::new(1.0, 101, 16).unwrap();
        let f = husimi_field(&params, &FockState::number(0, 1), &short, PhaseRule::None);
        assert!(matches!(normalization_integral(&f), Err(Error::GridCoverage { .. })));
    }

    #[test]
    fn grid_field_matches_pointwise() {
        let params = Params::new(3, 0.0, 0.2, 40).unwrap();
        let coeffs: Vec<Complex64> =
            (0..=40).map(|n| Complex64::new((n as f64 * 0.37).sin(), (n as f64 * 0.11).cos())).collect();
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let state = FockState::new(coeffs.into_iter().map(|c| c / norm).collect()).unwrap();
        for n_phi in [12usize, 14] {
            let grid = PolarGrid::new(5.0, 11, n_phi).unwrap();
            let rule = PhaseRule::Stroboscopic { s: 2 };
            let f = husimi_field(&params, &state, &grid, rule);
            for i in 0..grid.n_r() {
                for j in 0..n_phi {
                    let a = f.at(i, j);
                    let b = husimi_point(&params, &state, grid.r_values()[i], grid.phi_values()[j], rule);
                    assert!((a - b).abs() < 1e-13 * b.abs().max(1e-3));
                }
            }
        }
    }
}

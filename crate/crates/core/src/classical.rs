//! Classical motion `X'' = −X + ε sin(X − μτ)` and its stroboscopic
//! Poincaré sections at the wave period `T = 2π/μ`.
//!
//! The integrator splits the Hamiltonian `(X² + P²)/2 + ε cos(X − μτ)` into
//! an exact rotation and two half kicks evaluated at the ends of each step.
//! The scheme is symplectic, second order, and exactly time-reversible in
//! exact arithmetic.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::bessel_zero;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub x: f64,
    pub p: f64,
    pub tau: f64,
}

impl ClassicalState {
    pub fn new(x: f64, p: f64) -> Self {
        Self { x, p, tau: 0.0 }
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integrator {
    pub mu: usize,
    pub eps: f64,
    pub steps_per_period: usize,
    pub escape_radius: f64,
}

impl Integrator {
    pub fn new(mu: usize, eps: f64) -> Result<Self> {
        Self { mu, eps, steps_per_period: 256, escape_radius: 1e3 }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.mu == 0 || self.steps_per_period < 16 {
            return Err(Error::InvalidParams("need mu >= 1 and steps_per_period >= 16".into()));
        }
        if !self.eps.is_finite() || self.escape_radius.is_nan() || self.escape_radius <= 0.0 {
            return Err(Error::InvalidParams("eps must be finite and escape_radius positive".into()));
        }
        Ok(self)
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.mu as f64
    }

    fn kick(&self, s: &mut ClassicalState, h: f64) {
        s.p += h * self.eps * (s.x - self.mu as f64 * s.tau).sin();
    }

    /// `n_steps` equal steps spanning `duration`, which may be negative.
    pub fn evolve(&self, start: ClassicalState, duration: f64, n_steps: usize) -> ClassicalState {
        let dt = duration / n_steps as f64;
        let (sn, vers) = rotation(dt);
        let mut s = start;
        for k in 0..n_steps {
            self.kick(&mut s, 0.5 * dt);
            let (x, p) = (s.x, s.p);
            s.x = x + (p * sn - x * vers);
            s.p = p - (x * sn + p * vers);
            // times from the step counter, so long runs do not drift
            s.tau = start.tau + (k + 1) as f64 * dt;
            self.kick(&mut s, 0.5 * dt);
        }
        s.tau = start.tau + duration;
        s
    }

    /// One wave period forward.
    pub fn strobe_step(&self, s: ClassicalState) -> Result<ClassicalState> {
        let next = self.evolve(s, self.period(), self.steps_per_period);
        if next.radius().is_nan() || next.radius() > self.escape_radius {
            return Err(Error::Escape { radius: next.radius(), tau: next.tau });
        }
        Ok(next)
    }

    /// Stroboscopic orbits of every initial condition: the start plus one
    /// sample per period, `periods + 1` points unless the orbit escapes.
    pub fn poincare_section(&self, initial: &[(f64, f64)], periods: usize) -> SectionSet {
        let orbits = initial
            .par_iter()
            .map(|&(x, p)| {
                let mut s = ClassicalState::new(x, p);
                let mut points = Vec::with_capacity(periods + 1);
                points.push((x, p));
                let mut escaped_at = None;
                for k in 0..periods {
                    match self.strobe_step(s) {
                        Ok(next) => {
                            points.push((next.x, next.p));
                            s = next;
                        }
                        Err(_) => {
                            escaped_at = Some(k + 1);
                            break;
                        }
                    }
                }
                Orbit { x0: x, p0: p, points, escaped_at }
            })
            .collect();
        SectionSet { integrator: *self, periods, orbits }
    }
}

/// `(sin h, 1 − cos h)`, the latter as `2 sin²(h/2)` so that it keeps full
/// relative precision for small steps. Rotating with `x + (p s − x v)` then
/// preserves `x² + p²` up to unbiased rounding, with no drift from
/// `sin² + cos² ≠ 1` in the rounded coefficients.
fn rotation(h: f64) -> (f64, f64) {
    let half = (0.5 * h).sin();
    (h.sin(), 2.0 * half * half)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub x0: f64,
    pub p0: f64,
    /// Samples at `τ = s·T`, `s = 0, 1, …`.
    pub points: Vec<(f64, f64)>,
    /// Period at which the orbit left the escape radius.
    pub escaped_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionSet {
    pub integrator: Integrator,
    pub periods: usize,
    pub orbits: Vec<Orbit>,
}

impl SectionSet {
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.orbits.iter().flat_map(|o| o.points.iter().copied())
    }

    pub fn n_points(&self) -> usize {
        self.orbits.iter().map(|o| o.points.len()).sum()
    }
}

/// `n_r` rings out to the second zero of `J_μ`, `2μ` angles on each.
pub fn ensemble(mu: usize, n_r: usize, n_phi: usize) -> Vec<(f64, f64)> {
    let r_top = bessel_zero(mu, 2);
    let mut out = Vec::with_capacity(n_r * n_phi);
    for k in 1..=n_r {
        let r = r_top * k as f64 / n_r as f64;
        for l in 0..n_phi {
            let phi = 2.0 * PI * l as f64 / n_phi as f64;
            out.push((r * phi.cos(), r * phi.sin()));
        }
    }
    out
}

pub fn default_ensemble(mu: usize) -> Vec<(f64, f64)> {
    ensemble(mu, 20, 2 * mu)
}

/// Number of section points required by [`section_symmetry_error`].
pub const MIN_SECTION_POINTS: usize = 1000;

/// L1 distance between the normalised 2-D histogram of the section points and
/// that of the same points rotated by `2π/fold`, on `bins × bins` cells
/// spanning `±max radius`. Ranges from 0 (identical) to 2 (disjoint).
pub fn section_symmetry_error(sections: &SectionSet, fold: usize, bins: usize) -> Result<f64> {
    let have = sections.n_points();
    if have < MIN_SECTION_POINTS {
        return Err(Error::InsufficientPoints { have, need: MIN_SECTION_POINTS });
    }
    if fold == 0 || bins == 0 {
        return Err(Error::InvalidParams("fold and bins must be positive".into()));
    }
    let extent = sections.points().map(|(x, p)| x.hypot(p)).fold(0.0, f64::max);
    if extent == 0.0 {
        return Ok(0.0);
    }
    let (sn, cs) = (2.0 * PI / fold as f64).sin_cos();
    let cell = |v: f64| (((v + extent) / (2.0 * extent) * bins as f64) as usize).min(bins - 1);
    let mut direct = vec![0u64; bins * bins];
    let mut rotated = vec![0u64; bins * bins];
    for (x, p) in sections.points() {
        direct[cell(x) * bins + cell(p)] += 1;
        let (xr, pr) = (x * cs - p * sn, x * sn + p * cs);
        // rotation preserves the radius, so only roundoff can leave the square
        let (xr, pr) = (xr.clamp(-extent, extent), pr.clamp(-extent, extent));
        rotated[cell(xr) * bins + cell(pr)] += 1;
    }
    let total = have as f64;
    Ok(direct.iter().zip(&rotated).map(|(&a, &b)| (a as f64 - b as f64).abs()).sum::<f64>() / total)
}

//! Quasienergy states of one resonance cell in the resonance approximation.
//!
//! At exact resonance the cell block of the Floquet problem is a symmetric
//! tridiagonal matrix with zero diagonal and off-diagonal couplings
//! `(ε/2ħ₀)·g_μ(ℓ + μm)` (units of `ħω`). Its spectrum is symmetric about
//! zero and the flip `C_m → (−1)^m C_m` maps every eigenvector of `E` onto
//! one of `−E`. The two extreme states are the cell's "ground states".

use serde::{Deserialize, Serialize};

use crate::coupling::{ladder_couplings, Cell};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::specfun::bessel_j;
use crate::tridiag::{tridiag_apply, tridiag_eigen};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellHamiltonian {
    pub cell: Cell,
    /// Length `cell.n_states() − 1`.
    pub offdiag: Vec<f64>,
    /// Identically zero at exact resonance.
    pub diag: Vec<f64>,
}

impl CellHamiltonian {
    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn norm(&self) -> f64 {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.offdiag[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.offdiag[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        tridiag_apply(&self.diag, &self.offdiag, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    UpperGround,
    LowerGround,
    Interior,
}

/// A quasienergy state: coefficients over the ladder states of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QEState {
    pub cell: Cell,
    /// Quasienergy in units of `ħω`.
    pub energy: f64,
    /// `coeffs[j]` belongs to ladder index `cell.m_lo + j`.
    pub coeffs: Vec<f64>,
    pub kind: StateKind,
}

impl QEState {
    /// Oscillator level and coefficient pairs.
    pub fn levels<'a>(&'a self, mu: usize) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.coeffs.iter().enumerate().map(move |(j, &c)| (self.cell.level(mu, self.cell.m_lo + j), c))
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

pub fn build_cell_hamiltonian(params: &Params, cell: &Cell) -> Result<CellHamiltonian> {
    if cell.m_hi <= cell.m_lo {
        return Err(Error::TooFewStates { cell: cell.index, states: cell.n_states(), required: 2 });
    }
    let last = cell.level(params.mu, cell.m_hi);
    if last > params.n_max {
        return Err(Error::Truncation { needed: last, n_max: params.n_max });
    }
    let scale = params.eps / (2.0 * params.hbar0);
    let offdiag = ladder_couplings(params, cell.ladder, cell.m_lo, cell.m_hi)?.into_iter().map(|g| scale * g).collect();
    Ok(CellHamiltonian { cell: *cell, offdiag, diag: vec![0.0; cell.n_states()] })
}

/// Full eigendecomposition, energies ascending.
pub fn solve_cell(h: &CellHamiltonian) -> Result<Vec<QEState>> {
    let eig = tridiag_eigen(&h.diag, &h.offdiag).ok_or(Error::NoConvergence { cell: h.cell.index })?;
    let bound = 1e-10 * h.norm().max(f64::MIN_POSITIVE);
    let n = eig.values.len();
    let mut states = Vec::with_capacity(n);
    for (k, (energy, coeffs)) in eig.values.into_iter().zip(eig.vectors).enumerate() {
        let hv = h.apply(&coeffs);
        let res = hv.iter().zip(&coeffs).map(|(a, b)| (a - energy * b).powi(2)).sum::<f64>().sqrt();
        if res > bound && h.norm() > 0.0 {
            return Err(Error::NoConvergence { cell: h.cell.index });
        }
        let kind = if n >= 2 && k == n - 1 {
            StateKind::UpperGround
        } else if n >= 2 && k == 0 {
            StateKind::LowerGround
        } else {
            StateKind::Interior
        };
        states.push(QEState { cell: h.cell, energy, coeffs, kind });
    }
    Ok(states)
}

/// The extreme pair `(upper, lower)` of a solved cell.
pub fn ground_states(states: &[QEState]) -> Result<(QEState, QEState)> {
    if states.len() < 2 {
        let cell = states.first().map_or(0, |s| s.cell.index);
        return Err(Error::TooFewStates { cell, states: states.len(), required: 2 });
    }
    let upper = states.iter().max_by(|a, b| a.energy.total_cmp(&b.energy)).unwrap();
    let lower = states.iter().min_by(|a, b| a.energy.total_cmp(&b.energy)).unwrap();
    let spread = upper.energy - lower.energy;
    if spread.abs() < 1e-14 {
        return Err(Error::Degenerate { spread });
    }
    let mut upper = upper.clone();
    let mut lower = lower.clone();
    upper.kind = StateKind::UpperGround;
    lower.kind = StateKind::LowerGround;
    Ok((upper, lower))
}

/// `C_m → (−1)^m C_m`, `E → −E` (ladder index `m` counted from the origin).
pub fn parity_transform(state: &QEState) -> QEState {
    let coeffs = state
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, &c)| if (state.cell.m_lo + j).is_multiple_of(2) { c } else { -c })
        .collect();
    let kind = match state.kind {
        StateKind::UpperGround => StateKind::LowerGround,
        StateKind::LowerGround => StateKind::UpperGround,
        StateKind::Interior => StateKind::Interior,
    };
    QEState { cell: state.cell, energy: -state.energy, coeffs, kind }
}

pub fn overlap(a: &QEState, b: &QEState) -> Result<f64> {
    if a.cell != b.cell {
        return Err(Error::Mismatch("states belong to different cells".into()));
    }
    Ok(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).sum())
}

/// Gaussian packet model of the upper ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianAnsatz {
    pub cell: Cell,
    pub mu: usize,
    /// Packet centre in oscillator levels.
    pub n_e: f64,
    /// Elliptic-point radius `√(2 n_e ħ₀)`.
    pub r_e: f64,
    /// `(g/g'')^{1/4}` with `g''` the second derivative in the level index.
    pub a_e: f64,
    /// Width of the packet in oscillator levels, `√μ · a_e`.
    pub width: f64,
    /// Truncation `⌈2·width⌉` of the factorised sums.
    pub delta_m: usize,
    /// Normalisation `Γ` of the sampled packet.
    pub norm: f64,
    pub hbar0: f64,
}

impl GaussianAnsatz {
    /// Half-width in action implied by the packet width, `√2 ħ₀ a_e²`.
    pub fn half_width_action(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.hbar0 * self.a_e * self.a_e
    }

    /// Unit-norm packet sampled on the ladder levels of the cell.
    pub fn coefficients(&self) -> Vec<f64> {
        self.cell
            .levels(self.mu)
            .map(|n| {
                let d = n as f64 - self.n_e;
                self.norm * (-d * d / (2.0 * self.width * self.width)).exp()
            })
            .collect()
    }
}

/// Builds the Gaussian packet model for the cell's upper ground state.
///
/// The strongest link `g_μ(n)` is located on the ladder and refined by a
/// parabola through it and its two neighbours; the packet sits at the midpoint
/// of that link. Curvature comes from the central second difference over the
/// ladder step `μ`.
///
/// The tridiagonal chain only moves in steps of `μ` levels, so the packet
/// width along the chain is `(g/∂²_m g)^{1/4} = a_e/√μ` ladder steps, i.e.
/// `√μ · a_e` levels. For `μ = 1` the two coincide.
pub fn gaussian_ansatz(params: &Params, cell: &Cell) -> Result<GaussianAnsatz> {
    if cell.n_states() < 5 {
        return Err(Error::TooFewStates { cell: cell.index, states: cell.n_states(), required: 5 });
    }
    let mu = params.mu;
    let links: Vec<f64> =
        ladder_couplings(params, cell.ladder, cell.m_lo, cell.m_hi)?.into_iter().map(f64::abs).collect();
    let (j, _) =
        links.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, &g)| if g > best.1 { (i, g) } else { best });
    if j == 0 || j + 1 == links.len() {
        return Err(Error::NonInteriorMaximum { cell: cell.index });
    }
    let (gm, g0, gp) = (links[j - 1], links[j], links[j + 1]);
    let curvature = gm - 2.0 * g0 + gp;
    if curvature >= 0.0 {
        return Err(Error::NonInteriorMaximum { cell: cell.index });
    }
    let offset = 0.5 * (gm - gp) / curvature;
    let g_peak = g0 - (gp - gm).powi(2) / (8.0 * curvature);
    let mu_f = mu as f64;
    let link_level = cell.level(mu, cell.m_lo + j) as f64 + mu_f * offset;
    let n_e = link_level + 0.5 * mu_f;
    let g_second = curvature / (mu_f * mu_f);
    let a_e = (g_peak / g_second.abs()).powf(0.25);
    let width = mu_f.sqrt() * a_e;
    let mut ansatz = GaussianAnsatz {
        cell: *cell,
        mu,
        n_e,
        r_e: params.level_radius(n_e),
        a_e,
        width,
        delta_m: (2.0 * width).ceil().max(1.0) as usize,
        norm: 1.0,
        hbar0: params.hbar0,
    };
    let sum_sq: f64 = ansatz.coefficients().iter().map(|c| c * c).sum();
    ansatz.norm = 1.0 / sum_sq.sqrt();
    Ok(ansatz)
}

/// Packet width from the Bessel form of the coupling at an elliptic point.
///
/// `r_e` is a stationary point of `J_μ`, where Bessel's equation reduces to
/// `J_μ'' = −(1 − μ²/r²) J_μ`.
pub fn packet_width_quasiclassical(params: &Params, r_e: f64) -> Result<f64> {
    if r_e.is_nan() || r_e <= 0.0 {
        return Err(Error::InvalidParams(format!("r_e must be > 0, got {r_e}")));
    }
    let mu = params.mu as f64;
    let j = bessel_j(params.mu, r_e);
    let jpp = -(1.0 - mu * mu / (r_e * r_e)) * j;
    if jpp.abs() < 1e-12 {
        return Err(Error::NearZeroDerivative { r: r_e, value: jpp });
    }
    let h = params.hbar0;
    Ok((r_e * r_e / (h * h) * (j / jpp).abs()).powf(0.25))
}

/// Squared inner product of the state with the ansatz packet.
pub fn gaussian_overlap(state: &QEState, ansatz: &GaussianAnsatz) -> Result<f64> {
    if state.cell != ansatz.cell {
        return Err(Error::Mismatch("state and ansatz belong to different cells".into()));
    }
    let dot: f64 = state.coeffs.iter().zip(ansatz.coefficients()).map(|(a, b)| a * b).sum();
    Ok(dot * dot)
}

/// [`gaussian_overlap`] allowing for the alternating sign pattern, i.e. the
/// larger of the overlaps of the state and of its parity image.
pub fn envelope_overlap(state: &QEState, ansatz: &GaussianAnsatz) -> Result<f64> {
    Ok(gaussian_overlap(state, ansatz)?.max(gaussian_overlap(&parity_transform(state), ansatz)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpacing {
    /// Mean gap, the effective `ħω̃` in units of `ħω`.
    pub mean: f64,
    pub rel_std: f64,
}

/// Statistics of the `count` gaps at the top of the spectrum.
pub fn edge_spacing(states: &[QEState], count: usize) -> Result<EdgeSpacing> {
    if count == 0 || count + 1 > states.len() {
        return Err(Error::InvalidParams(format!("need count + 1 <= {} states, got count = {count}", states.len())));
    }
    let mut e: Vec<f64> = states.iter().map(|s| s.energy).collect();
    e.sort_by(|a, b| b.total_cmp(a));
    let gaps: Vec<f64> = e.windows(2).take(count).map(|w| w[0] - w[1]).collect();
    let mean = gaps.iter().sum::<f64>() / count as f64;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / count as f64;
    let rel_std = if mean != 0.0 { var.sqrt() / mean.abs() } else { 0.0 };
    Ok(EdgeSpacing { mean, rel_std })
}

/// How well a cell block reproduces the spectrum of the whole coupled ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsolationReport {
    pub energy_cell: f64,
    pub energy_chain: f64,
    /// Squared overlap with the best-matching chain eigenvector.
    pub overlap: f64,
    /// `|energy_cell − energy_chain|` over the cell bandwidth.
    pub defect: f64,
}

/// Solves ladder indices `0..=m_max` as one chain (all links kept) and
/// matches `state` to the chain eigenvector it overlaps most.
pub fn cell_isolation(params: &Params, state: &QEState, m_max: usize, bandwidth: f64) -> Result<IsolationReport> {
    let cell = state.cell;
    if cell.m_hi > m_max {
        return Err(Error::Mismatch(format!("cell reaches m = {}, chain ends at {m_max}", cell.m_hi)));
    }
    let last = cell.level(params.mu, m_max);
    if last > params.n_max {
        return Err(Error::Truncation { needed: last, n_max: params.n_max });
    }
    let scale = params.eps / (2.0 * params.hbar0);
    let off: Vec<f64> = ladder_couplings(params, cell.ladder, 0, m_max)?.into_iter().map(|g| scale * g).collect();
    let eig = tridiag_eigen(&vec![0.0; m_max + 1], &off).ok_or(Error::NoConvergence { cell: 0 })?;
    let mut best = (0, 0.0);
    for (k, v) in eig.vectors.iter().enumerate() {
        let dot: f64 = state.coeffs.iter().enumerate().map(|(j, c)| c * v[cell.m_lo + j]).sum();
        if dot * dot > best.1 {
            best = (k, dot * dot);
        }
    }
    let energy_chain = eig.values[best.0];
    Ok(IsolationReport {
        energy_cell: state.energy,
        energy_chain,
        overlap: best.1,
        defect: (state.energy - energy_chain).abs() / bandwidth,
    })
}

//! Resonant coupling `g_μ(n)` between oscillator levels `n` and `n + μ`, and
//! the partition of a resonance ladder into cells bounded by its sign changes.
//!
//! `g_μ(n)` is the signed magnitude of `⟨ψ_n| e^{iX} |ψ_{n+μ}⟩`:
//!
//! ```text
//! g_μ(n) = e^{−ħ₀/4} (ħ₀/2)^{μ/2} √(n!/(n+μ)!) L_n^μ(ħ₀/2)
//! ```
//!
//! which tends to `J_μ(√(2nħ₀))` for small `ħ₀` at fixed radius.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::specfun::{laguerre_assoc, laguerre_table, log_factorial};

fn prefactor_ln(params: &Params, n: usize) -> f64 {
    let mu = params.mu;
    let h = params.hbar0;
    -0.25 * h + 0.5 * mu as f64 * (0.5 * h).ln() + 0.5 * (log_factorial(n) - log_factorial(n + mu))
}

/// `g_μ(n)`; requires `n + μ ≤ n_max`.
pub fn coupling_g(params: &Params, n: usize) -> Result<f64> {
    if n + params.mu > params.n_max {
        return Err(Error::Truncation { needed: n + params.mu, n_max: params.n_max });
    }
    let lag = laguerre_assoc(n, params.mu, 0.5 * params.hbar0);
    Ok(prefactor_ln(params, n).exp() * lag)
}

/// `g_μ(0), …, g_μ(n_hi)` from a single Laguerre recurrence pass.
pub fn coupling_table(params: &Params, n_hi: usize) -> Result<Vec<f64>> {
    if n_hi + params.mu > params.n_max {
        return Err(Error::Truncation { needed: n_hi + params.mu, n_max: params.n_max });
    }
    let lag = laguerre_table(n_hi, params.mu, 0.5 * params.hbar0);
    Ok(lag.iter().enumerate().map(|(n, l)| prefactor_ln(params, n).exp() * l).collect())
}

/// Couplings along one ladder: entry `m` links ladder states `m` and `m + 1`,
/// i.e. levels `ℓ + μm` and `ℓ + μ(m + 1)`.
pub fn ladder_couplings(params: &Params, ladder: usize, m_lo: usize, m_hi: usize) -> Result<Vec<f64>> {
    if m_hi <= m_lo {
        return Ok(Vec::new());
    }
    let mu = params.mu;
    let table = coupling_table(params, ladder + mu * (m_hi - 1))?;
    Ok((m_lo..m_hi).map(|m| table[ladder + mu * m]).collect())
}

/// A resonance cell: consecutive ladder states `m_lo..=m_hi` (levels
/// `n = ladder + μm`) joined by same-sign couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub ladder: usize,
    pub m_lo: usize,
    pub m_hi: usize,
    /// 1 for the innermost cell, counting outward.
    pub index: usize,
    /// The scan ended before the outer boundary of this cell was seen.
    pub truncated: bool,
}

impl Cell {
    pub fn n_states(&self) -> usize {
        self.m_hi - self.m_lo + 1
    }

    /// Oscillator level of ladder index `m`.
    pub fn level(&self, mu: usize, m: usize) -> usize {
        self.ladder + mu * m
    }

    pub fn levels(&self, mu: usize) -> impl Iterator<Item = usize> + '_ {
        (self.m_lo..=self.m_hi).map(move |m| self.ladder + mu * m)
    }

    pub fn contains(&self, m: usize) -> bool {
        (self.m_lo..=self.m_hi).contains(&m)
    }
}

/// Splits ladder indices `0..=m_max` into cells at the sign changes of the
/// coupling.
///
/// The cut is placed on the first link carrying the new sign, so both of its
/// endpoint states stay with the cell on their own side. When that would leave
/// a single state stranded at the end of the scan, the cut moves to the last
/// link carrying the old sign instead.
pub fn cell_boundaries(params: &Params, ladder: usize, m_max: usize) -> Result<Vec<Cell>> {
    let mu = params.mu;
    if ladder >= mu {
        return Err(Error::InvalidParams(format!("ladder {ladder} must be below mu = {mu}")));
    }
    if ladder + mu * m_max > params.n_max.saturating_sub(mu) {
        return Err(Error::Truncation { needed: ladder + mu * m_max + mu, n_max: params.n_max });
    }
    if m_max < 1 {
        return Err(Error::CellPartition("fewer than 2 ladder states scanned".into()));
    }
    let links = ladder_couplings(params, ladder, 0, m_max)?;
    partition_links(&links, ladder)
}

/// Partition of `links.len() + 1` chain states from the link signs.
pub(crate) fn partition_links(links: &[f64], ladder: usize) -> Result<Vec<Cell>> {
    let m_max = links.len();
    let mut cuts = Vec::new();
    for k in 1..links.len() {
        if (links[k] > 0.0) != (links[k - 1] > 0.0) {
            let cut = if k == m_max - 1 { k - 1 } else { k };
            cuts.push(cut);
        }
    }
    let mut cells = Vec::with_capacity(cuts.len() + 1);
    let mut start = 0;
    for &cut in &cuts {
        // removing link `cut` separates state `cut` from state `cut + 1`
        if cut < start + 1 {
            return Err(Error::CellPartition(format!("sign changes too dense near ladder index {cut}")));
        }
        cells.push(Cell { ladder, m_lo: start, m_hi: cut, index: cells.len() + 1, truncated: false });
        start = cut + 1;
    }
    if start + 1 > m_max {
        return Err(Error::CellPartition(format!("single state left at ladder index {start}")));
    }
    cells.push(Cell { ladder, m_lo: start, m_hi: m_max, index: cells.len() + 1, truncated: true });
    Ok(cells)
}

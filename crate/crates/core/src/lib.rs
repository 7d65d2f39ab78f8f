//! Quasienergy states of a harmonic oscillator driven by a resonant
//! monochromatic wave, their Husimi functions, and the classical
//! stochastic-web dynamics of the same system.
//!
//! All quantities are dimensionless: time in units of the inverse oscillator
//! frequency, phase-space coordinates scaled by the wave number, and the
//! effective Planck constant `ħ₀` (twice the squared Lamb-Dicke parameter).
//! The wave frequency is `μ` times the oscillator frequency.
//!
//! ```
//! use quasiweb::husimi::find_maxima;
//! use quasiweb::{build_cell_hamiltonian, cell_boundaries, ground_states, husimi_qe, solve_cell, Params, PolarGrid};
//!
//! let params = Params::new(4, 0.002, 0.12, 600)?;
//! let cell = cell_boundaries(&params, 0, 149)?[0];
//! let states = solve_cell(&build_cell_hamiltonian(&params, &cell)?)?;
//! let (upper, _lower) = ground_states(&states)?;
//! let grid = PolarGrid::new(8.0, 120, 480)?;
//! let field = husimi_qe(&params, &upper, &grid, 0)?;
//! assert_eq!(find_maxima(&field)?.len(), 4);
//! # Ok::<(), quasiweb::Error>(())
//! ```

pub mod classical;
pub mod coupling;
pub mod error;
pub mod floquet;
pub mod husimi;
pub mod params;
pub mod specfun;
pub mod tridiag;

pub use coupling::{cell_boundaries, coupling_g, coupling_table, ladder_couplings, Cell};
pub use error::{Error, Result};
pub use floquet::{
    build_cell_hamiltonian, gaussian_ansatz, ground_states, parity_transform, solve_cell, GaussianAnsatz, QEState,
    StateKind,
};
pub use husimi::{husimi_qe, FockState, HusimiField, PhaseRule, PolarGrid};
pub use params::{lamb_dicke_to_hbar0, Params};

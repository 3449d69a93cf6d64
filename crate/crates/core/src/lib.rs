//! Modulated pulses on nonlinear lattices.
//!
//! The crate couples a microscopic lattice model with the hierarchy of
//! macroscopic amplitude equations obtained by a multiscale ansatz in the
//! hyperbolic scaling `τ = εt`, `y = εγ`, and provides the tooling to check
//! the approximation numerically:
//!
//! * [`lattice`]: geometry, potentials, dispersion relation, forces, energies.
//! * [`pulse`]: pulse systems, representants of pulse products, resonance
//!   defects and closedness classification.
//! * [`coupling`]: nonlinear coupling coefficients.
//! * [`spectral`]: periodic fields, Taylor jets and pseudo-spectral operators.
//! * [`macro_solver`]: the amplitude hierarchy up to third order.
//! * [`micro`]: velocity-Verlet integration of the lattice and norms.
//! * [`ansatz`]: the multiscale approximation on the lattice and its residual.
//! * [`resonance`]: three-wave resonances of the nearest-neighbour chain.
//! * [`validation`]: ε-sweeps, slope fits and reports.
//! * [`config`]: TOML configuration schema.

pub mod ansatz;
pub mod config;
pub mod coupling;
pub mod error;
pub mod lattice;
pub mod macro_solver;
pub mod micro;
pub mod pulse;
pub mod resonance;
pub mod spectral;
pub mod validation;

pub use error::{Error, Result};

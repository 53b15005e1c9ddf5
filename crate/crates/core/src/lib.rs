//! Simulation toolkit for the quantum-correlated motion of two polarizable
//! particles coupled through the modes of a ring cavity.
//!
//! The crate is organized in layers:
//!
//! - [`hilbert`]: composite Hilbert spaces (truncated momentum lattices and
//!   Fock spaces), sparse operators, tensor products and state algebra.
//! - [`models`]: the three Hamiltonian-level models (full ring cavity,
//!   linearized optomechanics, adiabatic two-oscillator toy model) and the
//!   parameter maps between them.
//! - [`mcwf`]: Monte Carlo wavefunction (quantum-jump) trajectories, seeded
//!   deterministic ensembles and a direct master-equation integrator.
//! - [`gaussian`]: covariance-matrix dynamics of the linearized model,
//!   Lyapunov steady states and analytic rate/correlation formulas.
//! - [`analysis`]: observables and post-processing — momentum correlations,
//!   heralded (post-detection) states, g²(0), logarithmic negativity.
//! - [`cli`]: reproducible experiment runner behind the `ringmech` binary.
//!
//! Units are recoil units throughout: ħ = 1, k = 1, energies and rates in
//! ω_R, momenta in ħk. The factor order of every composite space is
//! (particle 1, particle 2, field).

pub mod analysis;
pub mod cli;
pub mod error;
pub mod gaussian;
pub mod hilbert;
pub mod mcwf;
pub mod models;
pub mod ode;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

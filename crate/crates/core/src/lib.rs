//! Adiabatic estimation of the azimuth of a rotating magnetic field with a
//! two-spin Heisenberg XX chain carrying a Dzyaloshinskii–Moriya coupling.
//!
//! Spin 1 feels a static field along z, spin 2 a field rotating slowly about
//! z. In the adiabatic regime the pair tracks an instantaneous eigenstate, and
//! the quantum Fisher information (QFI) of that state for the azimuth `φ`
//! bounds how well `φ` can be estimated. This crate provides:
//!
//! - [`model`]: the Hamiltonian and its φ-derivative;
//! - [`eigensystem`]: closed-form and numeric eigenpairs;
//! - [`metrology`]: two- and one-qubit QFI, SLD, spectral and fidelity oracles;
//! - [`adiabatic`]: the adiabaticity margin for a given rotation rate;
//! - [`dynamics`]: RK4 integration validating the adiabatic picture;
//! - [`sweep`] and [`verify`]: parameter grids, figure presets, and the
//!   seeded property battery.

pub mod adiabatic;
pub mod dynamics;
pub mod eigensystem;
pub mod error;
pub mod metrology;
pub mod model;
pub mod sweep;
pub mod verify;

pub use adiabatic::{adiabatic_margin, AdiabaticReport};
pub use dynamics::{evolve, qfi_from_trajectory, Trajectory, TrajectoryQfi};
pub use eigensystem::{analytic_level, numeric_level, spectral_invariants, EigenLevel, LevelSource, SpectralInvariants};
pub use error::{Error, Result};
pub use metrology::{
    cramer_rao, qfi, qfi_one_qubit, qfi_pure_oracle, qfi_spectral, qfi_two_qubit, reduce, sld, DensityMatrix2, Method,
    Probe, QfiValue, Subsystem,
};
pub use model::{build_hamiltonian, d_hamiltonian_d_phi, HermitianOperator4, Level, ModelParams, Param};
pub use sweep::{figure_preset, run_sweep, SweepParam, SweepRecord, SweepSpec};
pub use verify::{verify, VerificationReport};

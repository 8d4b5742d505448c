//! Spectral toolkit for the cubic Schrödinger equation with piecewise
//! dispersion management and lumped amplification, its unitarily transformed
//! form, and the kernel-averaged equation obtained by averaging the fast
//! oscillation over one dispersion period.
//!
//! The pieces:
//!
//! - [`grid`]: periodic grid, DFT with an exact lattice Parseval identity,
//!   the L², H¹, Lᵖ norms, and profile generators.
//! - [`fiber`]: closed forms for the two-step dispersion map, the sawtooth
//!   gain, the averaging kernel ψ, and their exact integrals.
//! - [`propagator`]: the free group and the piecewise-dispersion propagator
//!   as single spectral multipliers, plus the dispersive-decay probe.
//! - [`nonlinear`]: the oscillating cubic nonlinearity, its ψ-weighted
//!   average over Gauss–Legendre nodes, and the change-of-variables identity
//!   check that pins the amplifier normalization.
//! - [`solver`]: Strang splitting for the full equation (exact substeps,
//!   breakpoint-aligned steps) and interaction-picture RK4 for the
//!   transformed and averaged equations, with conservation and energy-rate
//!   diagnostics.
//! - [`harness`]: the ε-convergence sweep against the averaged solution,
//!   perturbed-data and Lipschitz probes, and the verification suite.
//! - [`io`], [`config`]: snapshot/CSV formats and run configuration.
//!
//! Data-parallel loops (quadrature nodes, per-ε sweep members, per-δ probes)
//! run under rayon when the default `parallel` feature is on; reductions keep
//! a fixed order, so results are bitwise-identical to the sequential path.

pub mod config;
pub mod error;
pub mod fiber;
pub mod grid;
pub mod harness;
pub mod io;
pub mod nonlinear;
pub mod propagator;
pub mod quadrature;
pub mod solver;
pub mod trajectory;

pub use config::{InitialSpec, RunConfig};
pub use error::{Error, Result};
pub use fiber::FiberParams;
pub use grid::{ComplexField, SpatialGrid, SpectralField};
pub use harness::{
    fit_log_slope, lipschitz_probe, perturbed_sweep, sweep_epsilon, verify_suite, CheckRecord,
    LipschitzRow, SweepConfig, SweepResult, VerifyConfig, VerifyReport,
};
pub use nonlinear::Execution;
pub use quadrature::QuadratureRule;
pub use solver::SolveConfig;
pub use trajectory::{DiagnosticRecord, Trajectory};

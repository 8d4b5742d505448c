use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain too small: profile tail {tail:.3e} at the boundary exceeds {limit:.1e}")]
    DomainTooSmall { tail: f64, limit: f64 },

    #[error("dispersion breakpoint strictly inside step [{t0}, {t1}]")]
    BreakpointInsideStep { t0: f64, t1: f64 },

    #[error("accumulated dispersion vanishes on [{t0}, {t1}] (resonant d_av in this half-cell); decay bound does not apply")]
    VanishingDispersion { t0: f64, t1: f64 },

    #[error("decay probe requires both times in one dispersion half-cell, got t0/eps in cell {c0}, t1/eps in cell {c1}")]
    CrossCellProbe { c0: i64, c1: i64 },

    #[error("solution blew past the growth monitor at t = {t}: H1 = {h1:.3e} vs initial {h1_initial:.3e}")]
    BlowUp { t: f64, h1: f64, h1_initial: f64 },

    #[error("non-finite sample detected at t = {t}")]
    NonFinite { t: f64 },

    #[error("integrator paths disagree: sup-H1 gap {gap:.3e} exceeds tolerance {tol:.3e}")]
    PathDisagreement { gap: f64, tol: f64 },

    #[error("trajectory needs at least {need} snapshots, got {got}")]
    TooFewSnapshots { need: usize, got: usize },

    #[error("snapshot file: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

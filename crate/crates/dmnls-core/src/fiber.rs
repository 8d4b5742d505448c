//! Closed forms for the fiber coefficient functions and their exact integrals.
//!
//! The dispersion map is the two-step profile d₀ = +1 on [0,1), −1 on [1,2),
//! extended 2-periodically, so its antiderivative D is the triangle wave and
//! the physical dispersion d(t) = d_av + (1/ε)·d₀(t/ε) integrates in closed
//! form. Loss −Γ/2 with point amplifiers at profile times 2j gives the
//! sawtooth gain
//!
//!   G(τ) = e^{−Γ·(τ mod 2)},   G(2j) = 1 (right-continuous),
//!
//! i.e. the amplifier fires exactly at the cell boundary and the ambiguous
//! point mass at τ = 0 is excluded. This is the unique normalization under
//! which the half-period change of variables r = D(τ) turns the G-weighted
//! time average into the ψ-weighted average with
//!
//!   ψ(r) = e^{−Γ} cosh Γ(r−1),
//!
//! which the kernel-identity check in `nonlinear` verifies functionally.
//! d₀ and G are right-continuous at breakpoints; the measure-zero choice
//! cannot move any integral but makes point evaluations deterministic.

use crate::error::{Error, Result};

/// ε (period scale), Γ (fiber loss, 0 admitted as the lossless limit) and the
/// average dispersion d_av.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberParams {
    pub eps: f64,
    pub gamma: f64,
    pub d_av: f64,
}

impl FiberParams {
    pub fn new(eps: f64, gamma: f64, d_av: f64) -> Result<Self> {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::InvalidParams(format!("eps = {eps} must be positive")));
        }
        if gamma < 0.0 || !gamma.is_finite() {
            return Err(Error::InvalidParams(format!("gamma = {gamma} must be >= 0")));
        }
        if !d_av.is_finite() {
            return Err(Error::InvalidParams("d_av must be finite".into()));
        }
        Ok(Self { eps, gamma, d_av })
    }

    /// Exact ∫_{t0}^{t1} (d_av + (1/ε)d₀(t/ε)) dt.
    ///
    /// The 1/ε cancels against the substitution, leaving the globally
    /// continuous antiderivative difference — exact to rounding and additive
    /// over adjacent intervals.
    pub fn integral_d(&self, t0: f64, t1: f64) -> f64 {
        self.d_av * (t1 - t0) + d0_integral(t1 / self.eps) - d0_integral(t0 / self.eps)
    }

    /// Exact ∫_{t0}^{t1} G(t/ε) dt (t0 ≤ t1); equals t1−t0 in the lossless limit.
    pub fn integral_gain(&self, t0: f64, t1: f64) -> Result<f64> {
        if t1 < t0 {
            return Err(Error::InvalidParams(format!(
                "integral_gain needs t0 <= t1, got [{t0}, {t1}]"
            )));
        }
        Ok(self.eps * (gain_antiderivative(t1 / self.eps, self.gamma)
            - gain_antiderivative(t0 / self.eps, self.gamma)))
    }

    /// G evaluated in physical time, G(t/ε).
    pub fn gain_at(&self, t: f64) -> f64 {
        gain(t / self.eps, self.gamma)
    }

    /// D evaluated in physical time, D(t/ε).
    pub fn map_phase_at(&self, t: f64) -> f64 {
        d0_integral(t / self.eps)
    }
}

/// Two-step dispersion profile: +1 on [0,1), −1 on [1,2), 2-periodic,
/// right-continuous at the breakpoints.
pub fn d0(t: f64) -> f64 {
    if t.rem_euclid(2.0) < 1.0 {
        1.0
    } else {
        -1.0
    }
}

/// D(t) = ∫₀ᵗ d₀: the 2-periodic triangle wave, D(t) = t̃ for t̃ ≤ 1 and
/// 2 − t̃ above, with t̃ = t mod 2.
pub fn d0_integral(t: f64) -> f64 {
    let tm = t.rem_euclid(2.0);
    if tm <= 1.0 {
        tm
    } else {
        2.0 - tm
    }
}

/// Sawtooth gain G(t) = e^{−Γ·(t mod 2)}; G = 1 at amplifier times 2j.
pub fn gain(t: f64, gamma: f64) -> f64 {
    (-gamma * t.rem_euclid(2.0)).exp()
}

/// ∫₀ᵗ G(t')dt' in profile time; expm1-based so the Γ → 0 limit is smooth.
fn gain_antiderivative(t: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return t;
    }
    let period = t.div_euclid(2.0);
    let rem = t.rem_euclid(2.0);
    (period * (-(-2.0 * gamma).exp_m1()) + (-(-gamma * rem).exp_m1())) / gamma
}

/// G restricted to the amplification cell with left edge 2j, valid on the
/// closed interval τ − 2j ∈ [0, 2]. Unlike [`gain`] this takes the left
/// limit e^{−2Γ} at the cell's right edge, which is what one-sided stage
/// evaluations of time integrators need at cell boundaries.
pub(crate) fn gain_on_cell(tau: f64, cell_left: f64, gamma: f64) -> f64 {
    (-gamma * (tau - cell_left)).exp()
}

/// Averaging kernel ψ(r) = e^{−Γ}·cosh Γ(r−1) on r ∈ [0, 1].
pub fn psi(r: f64, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParams(format!("psi needs r in [0,1], got {r}")));
    }
    Ok((-gamma).exp() * (gamma * (r - 1.0)).cosh())
}

/// ∫₀¹ ψ(r) dr = (1 − e^{−2Γ})/(2Γ), the half-period mean of G.
pub fn psi_integral(gamma: f64) -> f64 {
    if gamma == 0.0 {
        1.0
    } else {
        -(-2.0 * gamma).exp_m1() / (2.0 * gamma)
    }
}

//! Uniform periodic grid on [−L/2, L/2) and its discrete Fourier transform.
//!
//! The domain stands in for the whole real line: all admissible initial data
//! decay below 1e−14 at the boundary, so periodic wrap-around stays beneath
//! every tolerance used by the norms and solvers.
//!
//! Transform convention (continuum form f̂(ξ) = (2π)^{−1/2} ∫ e^{−ixξ} f dx,
//! discretised by the rectangle rule):
//!
//!   F_k = dx/√(2π) · Σ_j e^{−i x_j ξ_k} f_j,     f_j = dξ/√(2π) · Σ_k e^{i x_j ξ_k} F_k,
//!
//! with dξ = 2π/L. Under this scaling the lattice Parseval identity
//! Σ|f_j|² dx = Σ|F_k|² dξ is exact, so x-space and ξ-space L² norms agree to
//! rounding. Frequencies follow the usual FFT layout, negative half up top,
//! with the Nyquist bin assigned +π·n/L.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

const SQRT_TAU: f64 = 2.5066282746310002; // √(2π)

/// Uniform periodic 1-D grid with its dual frequency lattice and FFT plans.
///
/// Immutable once built; share it between fields with [`Arc`].
pub struct SpatialGrid {
    n: usize,
    length: f64,
    dx: f64,
    x: Vec<f64>,
    frequencies: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpatialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpatialGrid")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl SpatialGrid {
    /// `n` must be a power of two ≥ 8; `length` the positive domain size L.
    pub fn new(n: usize, length: f64) -> Result<Arc<Self>> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::InvalidGrid(format!("length = {length} must be positive")));
        }
        let dx = length / n as f64;
        let x = (0..n).map(|j| -length / 2.0 + j as f64 * dx).collect();
        let dxi = std::f64::consts::TAU / length;
        let frequencies = (0..n)
            .map(|j| {
                // signed index: 0..n/2 then negative; Nyquist (j = n/2) kept positive
                let k = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
                k as f64 * dxi
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            n,
            length,
            dx,
            x,
            frequencies,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Frequency spacing dξ = 2π/L.
    pub fn dxi(&self) -> f64 {
        std::f64::consts::TAU / self.length
    }

    /// Sample points x_j = −L/2 + j·dx.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Frequency lattice ξ_k in FFT order.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Largest represented frequency magnitude (the Nyquist bin).
    pub fn max_frequency(&self) -> f64 {
        self.frequencies[self.n / 2]
    }

    pub(crate) fn fft_forward(&self, buf: &mut [Complex64]) {
        let mut scratch = vec![Complex64::ZERO; self.fwd.get_inplace_scratch_len()];
        self.fwd.process_with_scratch(buf, &mut scratch);
    }

    pub(crate) fn fft_inverse(&self, buf: &mut [Complex64]) {
        let mut scratch = vec![Complex64::ZERO; self.inv.get_inplace_scratch_len()];
        self.inv.process_with_scratch(buf, &mut scratch);
    }

    pub(crate) fn same_grid(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

/// Complex samples of a field on a [`SpatialGrid`] at one instant.
#[derive(Debug, Clone)]
pub struct ComplexField {
    grid: Arc<SpatialGrid>,
    values: Vec<Complex64>,
}

/// Frequency-space samples, same layout as the grid's frequency lattice.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<SpatialGrid>,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Arc<SpatialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidGrid(format!(
                "field length {} does not match grid n = {}",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<SpatialGrid>) -> Self {
        let n = grid.n();
        Self { grid, values: vec![Complex64::ZERO; n] }
    }

    /// Sample a function of x onto the grid.
    pub fn from_fn(grid: Arc<SpatialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.x().iter().map(|&x| f(x)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z * c).collect(),
        }
    }

    /// self + c · other, elementwise.
    pub fn add_scaled(&self, c: Complex64, other: &Self) -> Self {
        debug_assert!(self.grid.same_grid(&other.grid));
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(Complex64::new(-1.0, 0.0), other)
    }
}

impl SpectralField {
    pub fn new(grid: Arc<SpatialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidGrid(format!(
                "spectrum length {} does not match grid n = {}",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Forward transform with the documented 1/√(2π)·dx scaling.
///
/// Inverse of [`dft_inverse`] to ~1e−15 relative; satisfies the lattice
/// Parseval identity exactly up to rounding.
pub fn dft_forward(f: &ComplexField) -> SpectralField {
    let g = f.grid().clone();
    let mut buf = f.values().to_vec();
    g.fft_forward(&mut buf);
    let scale = g.dx() / SQRT_TAU;
    for (j, v) in buf.iter_mut().enumerate() {
        // e^{+i(L/2)ξ_k} = (−1)^k accounts for x starting at −L/2
        let sign = if j % 2 == 0 { scale } else { -scale };
        *v *= sign;
    }
    SpectralField { grid: g, values: buf }
}

/// Inverse transform; see [`dft_forward`].
pub fn dft_inverse(f: &SpectralField) -> ComplexField {
    let g = f.grid().clone();
    let mut buf = f.values().to_vec();
    let scale = g.dxi() / SQRT_TAU;
    for (j, v) in buf.iter_mut().enumerate() {
        let sign = if j % 2 == 0 { scale } else { -scale };
        *v *= sign;
    }
    g.fft_inverse(&mut buf);
    ComplexField { grid: g, values: buf }
}

/// Apply a frequency multiplier m(ξ): ifft(m·fft(f)), with the 1/n folded in.
///
/// This is the workhorse behind every propagator; the forward/inverse phase
/// and √(2π) factors cancel for diagonal multipliers so the plain FFT pair
/// suffices.
pub fn apply_multiplier(f: &ComplexField, m: impl Fn(f64) -> Complex64) -> ComplexField {
    let g = f.grid().clone();
    let mut buf = f.values().to_vec();
    g.fft_forward(&mut buf);
    let inv_n = 1.0 / g.n() as f64;
    for (v, &xi) in buf.iter_mut().zip(g.frequencies()) {
        *v *= m(xi) * inv_n;
    }
    g.fft_inverse(&mut buf);
    ComplexField { grid: g, values: buf }
}

/// L² norm (Σ|f_j|² dx)^{1/2}.
pub fn l2_norm(f: &ComplexField) -> f64 {
    let s: f64 = f.values().iter().map(|z| z.norm_sqr()).sum();
    (s * f.grid().dx()).sqrt()
}

/// H¹ norm (Σ (1+ξ²)|f̂|² dξ)^{1/2}, evaluated on the frequency lattice.
pub fn h1_norm(f: &ComplexField) -> f64 {
    let g = f.grid();
    let mut buf = f.values().to_vec();
    g.fft_forward(&mut buf);
    let s: f64 = buf
        .iter()
        .zip(g.frequencies())
        .map(|(z, &xi)| (1.0 + xi * xi) * z.norm_sqr())
        .sum();
    // |F_k|² dξ with F = dx/√(2π)·FFT collapses to (dx/n)·Σ|FFT_k|²
    (s * g.dx() / g.n() as f64).sqrt()
}

/// L² norm of ∂ₓf, via the frequency lattice.
pub fn dx_l2_norm_sq(f: &ComplexField) -> f64 {
    let g = f.grid();
    let mut buf = f.values().to_vec();
    g.fft_forward(&mut buf);
    let s: f64 = buf
        .iter()
        .zip(g.frequencies())
        .map(|(z, &xi)| xi * xi * z.norm_sqr())
        .sum();
    s * g.dx() / g.n() as f64
}

/// Lᵖ exponent; `Infinity` means the grid sup (a lower bound on the
/// continuum sup, adequate at the tolerances used here).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lp {
    P(f64),
    Infinity,
}

/// Lᵖ norm by the rectangle rule, or the sample max for p = ∞.
pub fn lp_norm(f: &ComplexField, p: Lp) -> f64 {
    match p {
        Lp::Infinity => f.values().iter().map(|z| z.norm()).fold(0.0, f64::max),
        Lp::P(p) => {
            assert!(p >= 1.0, "Lp norm needs p >= 1");
            let s: f64 = f.values().iter().map(|z| z.norm().powf(p)).sum();
            (s * f.grid().dx()).powf(1.0 / p)
        }
    }
}

/// H¹ norm of the difference of two fields on the same grid.
pub fn h1_distance(a: &ComplexField, b: &ComplexField) -> f64 {
    h1_norm(&a.sub(b))
}

/// Chirped Gaussian a·exp(−(x−x₀)²/(2w²))·exp(ic(x−x₀)²).
///
/// Fails with [`Error::DomainTooSmall`] unless the envelope decays below
/// 1e−14 of the amplitude at the nearer domain edge, which keeps periodic
/// wrap-around invisible to the norms.
pub fn gaussian_profile(
    grid: &Arc<SpatialGrid>,
    amplitude: f64,
    width: f64,
    center: f64,
    chirp: f64,
) -> Result<ComplexField> {
    if amplitude < 0.0 || !amplitude.is_finite() {
        return Err(Error::InvalidParams(format!("amplitude {amplitude} must be >= 0")));
    }
    if !width.is_finite() || width <= 0.0 {
        return Err(Error::InvalidParams(format!("width {width} must be > 0")));
    }
    if amplitude > 0.0 {
        let half = grid.length() / 2.0;
        let edge_dist = (half - center.abs()).max(0.0);
        let tail = (-edge_dist * edge_dist / (2.0 * width * width)).exp();
        if tail > 1e-14 {
            return Err(Error::DomainTooSmall { tail, limit: 1e-14 });
        }
    }
    Ok(ComplexField::from_fn(grid.clone(), |x| {
        let r = x - center;
        let env = amplitude * (-r * r / (2.0 * width * width)).exp();
        Complex64::from_polar(env, chirp * r * r)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Arc<SpatialGrid> {
        SpatialGrid::new(512, 16.0 * std::f64::consts::PI).unwrap()
    }

    fn unit_gaussian(g: &Arc<SpatialGrid>) -> ComplexField {
        gaussian_profile(g, 1.0, 1.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn grid_invariants() {
        let g = grid();
        assert_eq!(g.frequencies()[0], 0.0);
        assert!((g.dx() * g.n() as f64 - g.length()).abs() <= f64::EPSILON * g.length());
        // symmetry: every represented k except Nyquist has a mirror
        let n = g.n();
        for j in 1..n / 2 {
            assert_eq!(g.frequencies()[j], -g.frequencies()[n - j]);
        }
        // Nyquist assigned the positive sign
        assert!(g.frequencies()[n / 2] > 0.0);
        assert!((g.frequencies()[n / 2] - std::f64::consts::PI * n as f64 / g.length()).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(SpatialGrid::new(100, 10.0).is_err());
        assert!(SpatialGrid::new(4, 10.0).is_err());
        assert!(SpatialGrid::new(64, -1.0).is_err());
    }

    #[test]
    fn dft_of_constant_concentrates_at_zero() {
        let g = grid();
        let f = ComplexField::from_fn(g.clone(), |_| Complex64::new(1.0, 0.0));
        let spec = dft_forward(&f);
        let peak = spec.values()[0].norm();
        for (j, v) in spec.values().iter().enumerate().skip(1) {
            assert!(v.norm() < 1e-12 * peak, "leak at bin {j}: {}", v.norm());
        }
    }

    #[test]
    fn dft_of_lattice_mode_is_single_bin() {
        let g = grid();
        let xi1 = g.frequencies()[3];
        let f = ComplexField::from_fn(g.clone(), |x| Complex64::from_polar(1.0, xi1 * x));
        let spec = dft_forward(&f);
        let peak = spec.values()[3].norm();
        for (j, v) in spec.values().iter().enumerate() {
            if j != 3 {
                assert!(v.norm() < 1e-12 * peak);
            }
        }
    }

    #[test]
    fn gaussian_spectrum_matches_closed_form() {
        // f = e^{−x²/2} transforms to e^{−ξ²/2} under this normalization
        let g = grid();
        let f = unit_gaussian(&g);
        let spec = dft_forward(&f);
        let peak = spec.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for (v, &xi) in spec.values().iter().zip(g.frequencies()) {
            let exact = (-xi * xi / 2.0).exp();
            worst = worst.max((v - Complex64::new(exact, 0.0)).norm());
        }
        assert!(worst / peak <= 1e-10, "sup-relative spectrum error {:e}", worst / peak);
    }

    #[test]
    fn l2_of_gaussian_is_quarter_root_pi() {
        let g = grid();
        let exact = std::f64::consts::PI.powf(0.25);
        assert!((l2_norm(&unit_gaussian(&g)) - exact).abs() <= 1e-10);
    }

    #[test]
    fn h1_of_gaussian_matches_quadrature_value() {
        // ∫(1+ξ²)e^{−ξ²} dξ = (3/2)√π
        let g = grid();
        let exact = std::f64::consts::PI.powf(0.25) * 1.5f64.sqrt();
        assert!((h1_norm(&unit_gaussian(&g)) - exact).abs() <= 1e-9);
    }

    #[test]
    fn h1_of_single_mode() {
        let g = grid();
        let a = 0.7;
        let xi1 = g.frequencies()[5];
        let f = ComplexField::from_fn(g.clone(), |x| Complex64::from_polar(a, xi1 * x));
        let exact = a * (g.length() * (1.0 + xi1 * xi1)).sqrt();
        assert!((h1_norm(&f) - exact).abs() <= 1e-12 * exact);
    }

    #[test]
    fn norms_of_zero_field() {
        let g = grid();
        let z = ComplexField::zeros(g);
        assert_eq!(l2_norm(&z), 0.0);
        assert_eq!(h1_norm(&z), 0.0);
        assert_eq!(lp_norm(&z, Lp::P(4.0)), 0.0);
        assert_eq!(lp_norm(&z, Lp::Infinity), 0.0);
    }

    #[test]
    fn lp_of_lattice_aligned_plateau() {
        let g = grid();
        let n = g.n();
        let m = 40; // plateau of m samples, width w = m·dx
        let mut vals = vec![Complex64::ZERO; n];
        for v in vals.iter_mut().take(n / 2 + m).skip(n / 2) {
            *v = Complex64::new(1.0, 0.0);
        }
        let f = ComplexField::new(g.clone(), vals).unwrap();
        let w = m as f64 * g.dx();
        for p in [1.0, 2.0, 3.5] {
            assert!((lp_norm(&f, Lp::P(p)) - w.powf(1.0 / p)).abs() <= 1e-12);
        }
    }

    #[test]
    fn sup_norm_of_gaussian_is_one() {
        let g = grid();
        // grid contains x = 0 exactly
        assert!((lp_norm(&unit_gaussian(&g), Lp::Infinity) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn gaussian_profile_edge_check() {
        let g = grid();
        // width so large the tail cannot decay: e^{−(L/2)²/(2w²)} > 1e−14
        let l = g.length();
        let w_bad = l / 2.0 / (2.0 * 14.0 * std::f64::consts::LN_10).sqrt() * 1.05;
        assert!(matches!(
            gaussian_profile(&g, 1.0, w_bad, 0.0, 0.0),
            Err(Error::DomainTooSmall { .. })
        ));
        // amplitude 0 short-circuits to the zero field
        let z = gaussian_profile(&g, 0.0, 100.0, 0.0, 0.0).unwrap();
        assert_eq!(l2_norm(&z), 0.0);
        // a=1, w=1 matches e^{−x²/2} exactly
        let f = gaussian_profile(&g, 1.0, 1.0, 0.0, 0.0).unwrap();
        for (v, &x) in f.values().iter().zip(g.x()) {
            assert_eq!(v.re, (-x * x / 2.0).exp());
            assert_eq!(v.im, 0.0);
        }
    }

    // ---- randomized properties ------------------------------------------

    prop_compose! {
        fn smooth_field()(seed in any::<u64>()) -> Vec<Complex64> {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = grid();
            let n = g.n();
            let mut spec = vec![Complex64::ZERO; n];
            for (k, s) in spec.iter_mut().enumerate() {
                let xi = g.frequencies()[k];
                let damp = (-xi * xi / 8.0).exp();
                *s = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * damp;
            }
            let mut buf = spec;
            g.fft_inverse(&mut buf);
            buf
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn dft_round_trip(vals in smooth_field()) {
            let g = grid();
            let f = ComplexField::new(g, vals).unwrap();
            let back = dft_inverse(&dft_forward(&f));
            let num = l2_norm(&f.sub(&back));
            let den = l2_norm(&f).max(1e-300);
            prop_assert!(num / den <= 1e-13);
        }

        #[test]
        fn parseval(vals in smooth_field()) {
            let g = grid();
            let f = ComplexField::new(g.clone(), vals).unwrap();
            let spec = dft_forward(&f);
            let xs: f64 = f.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dx();
            let ks: f64 = spec.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dxi();
            prop_assert!((xs - ks).abs() <= 1e-12 * xs.max(1e-300));
        }

        #[test]
        fn h1_dominates_l2(vals in smooth_field()) {
            let g = grid();
            let f = ComplexField::new(g, vals).unwrap();
            prop_assert!(h1_norm(&f) >= l2_norm(&f) - 1e-14);
        }

        #[test]
        fn norm_homogeneity_and_triangle(a in smooth_field(), b in smooth_field(), c in -3.0f64..3.0) {
            let g = grid();
            let fa = ComplexField::new(g.clone(), a).unwrap();
            let fb = ComplexField::new(g, b).unwrap();
            let cc = Complex64::new(c, 0.5 * c);
            for norm in [l2_norm, h1_norm] {
                let scaled = norm(&fa.scale(cc));
                prop_assert!((scaled - cc.norm() * norm(&fa)).abs() <= 1e-12 * (1.0 + scaled));
                let tri = norm(&fa.add_scaled(Complex64::new(1.0, 0.0), &fb));
                prop_assert!(tri <= norm(&fa) + norm(&fb) + 1e-12);
            }
        }
    }
}

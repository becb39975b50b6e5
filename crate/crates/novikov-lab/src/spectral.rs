//! Forward/inverse transforms and Fourier-multiplier operators.
//!
//! The forward transform carries the quadrature weight `dx` and the node
//! offset phase, so a coefficient approximates the continuous transform
//! `F u (xi) = integral u(x) exp(-i xi x) dx` sampled at the grid
//! frequencies. Parseval then reads `||u||_2^2 = (1/L) sum |u_hat|^2`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::SpectralError;
use crate::field::Field;
use crate::grid::GridSpec;

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    // Per-thread plan cache: plans are immutable once built, and keeping
    // them thread-local avoids any cross-worker locking.
    static PLANS: RefCell<HashMap<usize, PlanPair>> = RefCell::new(HashMap::new());
}

fn with_plans<R>(n: usize, f: impl FnOnce(&Arc<dyn Fft<f64>>, &Arc<dyn Fft<f64>>) -> R) -> R {
    PLANS.with(|cell| {
        let mut map = cell.borrow_mut();
        let (fwd, inv) = map.entry(n).or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        });
        f(fwd, inv)
    })
}

/// Maximum relative imaginary residue tolerated when reconstructing a real
/// field from coefficients.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Frequency-side view of a field: one complex coefficient per grid bin,
/// FFT bin order (see [`GridSpec::freq`]).
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.points() {
            return Err(SpectralError::SampleCountMismatch {
                expected: grid.points(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub(crate) fn forward(field: &Field) -> Spectrum {
        let grid = *field.grid();
        let n = grid.points();
        let mut buf: Vec<Complex64> = field
            .samples()
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        with_plans(n, |fwd, _| fwd.process(&mut buf));
        let dx = grid.dx();
        for (m, c) in buf.iter_mut().enumerate() {
            // exp(-i xi_m x_j) = (-1)^m exp(-2 pi i j m / N) on nodes
            // starting at -L/2, hence the alternating sign.
            let w = if m % 2 == 0 { dx } else { -dx };
            *c *= w;
        }
        Spectrum { grid, coeffs: buf }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Sup-norm bound implied by the coefficients, `(1/L) sum |c|`. Used
    /// as the reference scale for symmetry checks.
    pub fn amplitude_bound(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum::<f64>() / self.grid.length()
    }

    /// Inverse transform back to samples, verifying that the coefficients
    /// were conjugate-symmetric enough to describe a real field. The
    /// residue is measured against this spectrum's own amplitude; when the
    /// spectrum is the output of an operator, prefer checking against the
    /// operator input's scale (see [`Multiplier::apply`]).
    pub fn to_physical(&self) -> Result<Field, SpectralError> {
        self.to_physical_checked_against(self.amplitude_bound())
    }

    pub(crate) fn to_physical_checked_against(&self, scale: f64) -> Result<Field, SpectralError> {
        let (field, im_abs) = self.to_physical_parts();
        let residue = if scale > 0.0 { im_abs / scale } else { 0.0 };
        if residue > SYMMETRY_TOLERANCE {
            return Err(SpectralError::ImaginaryResidue(residue));
        }
        Ok(field)
    }

    /// Inverse transform returning the largest absolute imaginary part
    /// discarded, instead of enforcing a bound on it.
    pub fn to_physical_parts(&self) -> (Field, f64) {
        let n = self.grid.points();
        let dx = self.grid.dx();
        let mut buf: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                let w = if m % 2 == 0 { 1.0 / dx } else { -1.0 / dx };
                c * w
            })
            .collect();
        with_plans(n, |_, inv| inv.process(&mut buf));
        let scale = 1.0 / n as f64;
        let mut im_max = 0.0_f64;
        let samples: Vec<f64> = buf
            .iter()
            .map(|c| {
                im_max = im_max.max((c.im * scale).abs());
                c.re * scale
            })
            .collect();
        (Field::new_unchecked(self.grid, samples), im_max)
    }

    /// L2 norm through Parseval, `((1/L) sum |c|^2)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.grid.length()).sqrt()
    }
}

/// A diagonal operator in frequency space: output coefficients are
/// `m(xi_k)` times input coefficients.
#[derive(Debug, Clone)]
pub struct Multiplier {
    grid: GridSpec,
    weights: Vec<Complex64>,
}

impl Multiplier {
    pub fn from_symbol(grid: GridSpec, m: impl Fn(f64) -> Complex64) -> Self {
        let weights = (0..grid.points()).map(|k| m(grid.freq(k))).collect();
        Self { grid, weights }
    }

    pub fn from_real_symbol(grid: GridSpec, m: impl Fn(f64) -> f64) -> Self {
        Self::from_symbol(grid, |xi| Complex64::new(m(xi), 0.0))
    }

    pub fn identity(grid: GridSpec) -> Self {
        Self::from_real_symbol(grid, |_| 1.0)
    }

    /// `d/dx`, the symbol `i*xi`. The unpaired Nyquist bin is zeroed so
    /// the operator maps real fields to real fields.
    pub fn derivative(grid: GridSpec) -> Self {
        let nyq = grid.nyquist();
        Self::from_symbol(grid, |xi| {
            if xi == -nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, xi)
            }
        })
    }

    /// `(1 - d^2/dx^2)^(-1)`, the symbol `1/(1 + xi^2)`.
    pub fn helmholtz_inverse(grid: GridSpec) -> Self {
        Self::from_real_symbol(grid, |xi| 1.0 / (1.0 + xi * xi))
    }

    /// `1 - d^2/dx^2`, the symbol `1 + xi^2`.
    pub fn helmholtz(grid: GridSpec) -> Self {
        Self::from_real_symbol(grid, |xi| 1.0 + xi * xi)
    }

    /// Half-rule low-pass: keeps `|xi| <= nyquist/2`, zeroes the rest.
    /// Appropriate for cubic nonlinearities evaluated pointwise.
    pub fn dealias(grid: GridSpec) -> Self {
        let cutoff = 0.5 * grid.nyquist();
        Self::from_real_symbol(grid, |xi| if xi.abs() <= cutoff { 1.0 } else { 0.0 })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Pointwise product of symbols; applying the result equals applying
    /// the two factors in sequence.
    pub fn product(&self, other: &Multiplier) -> Result<Multiplier, SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch(self.grid, other.grid));
        }
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Multiplier {
            grid: self.grid,
            weights,
        })
    }

    pub fn apply_spectrum(&self, s: &Spectrum) -> Result<Spectrum, SpectralError> {
        if self.grid != *s.grid() {
            return Err(SpectralError::GridMismatch(self.grid, *s.grid()));
        }
        let coeffs = s
            .coeffs()
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| c * w)
            .collect();
        Ok(Spectrum {
            grid: self.grid,
            coeffs,
        })
    }

    /// Round-trips through frequency space: transform, scale, invert.
    /// The symmetry check compares the imaginary residue against the
    /// *input* amplitude, so wiping a field to zero is not mistaken for
    /// an asymmetry.
    pub fn apply(&self, f: &Field) -> Result<Field, SpectralError> {
        let spec = f.to_spectral();
        let scale = spec.amplitude_bound();
        self.apply_spectrum(&spec)?
            .to_physical_checked_against(scale)
    }
}

/// Spectral derivative of a field.
pub fn derivative(f: &Field) -> Result<Field, SpectralError> {
    Multiplier::derivative(*f.grid()).apply(f)
}

/// Smoothing inverse `(1 - d^2/dx^2)^(-1)` of a field.
pub fn helmholtz_inverse(f: &Field) -> Result<Field, SpectralError> {
    Multiplier::helmholtz_inverse(*f.grid()).apply(f)
}

/// Half-rule dealiasing of a field.
pub fn dealias(f: &Field) -> Result<Field, SpectralError> {
    Multiplier::dealias(*f.grid()).apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::LpExponent;
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(2.0 * PI, 128).unwrap()
    }

    #[test]
    fn constant_concentrates_at_zero() {
        let f = Field::constant(grid(), 1.0);
        let s = f.to_spectral();
        for (m, c) in s.coeffs().iter().enumerate() {
            if m == 0 {
                assert!((c.re - 2.0 * PI).abs() < 1e-10 && c.im.abs() < 1e-12);
            } else {
                assert!(c.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn cosine_has_two_lines() {
        let g = grid();
        let f = Field::from_fn(g, |x| (3.0 * x).cos());
        let s = f.to_spectral();
        let mut hot = 0;
        for (m, c) in s.coeffs().iter().enumerate() {
            if c.norm() > 1e-8 {
                hot += 1;
                assert!((g.freq(m).abs() - 3.0).abs() < 1e-12);
                assert!((c.re - PI).abs() < 1e-9);
            }
        }
        assert_eq!(hot, 2);
    }

    #[test]
    fn roundtrip_is_identity() {
        let g = grid();
        let f = Field::from_fn(g, |x| (x).sin() + 0.3 * (7.0 * x).cos() - 0.1);
        let back = f.to_spectral().to_physical().unwrap();
        let scale = f.linf();
        for (a, b) in f.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn identity_multiplier() {
        let f = Field::from_fn(grid(), |x| x.sin() * x.cos() + 0.5);
        let g = Multiplier::identity(*f.grid()).apply(&f).unwrap();
        for (a, b) in f.samples().iter().zip(g.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_sine() {
        let g = grid();
        let f = Field::from_fn(g, |x| (3.0 * x).sin());
        let df = derivative(&f).unwrap();
        for (j, v) in df.samples().iter().enumerate() {
            let want = 3.0 * (3.0 * g.node(j)).cos();
            assert!((v - want).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let df = derivative(&Field::constant(grid(), 4.2)).unwrap();
        assert!(df.linf() < 1e-13);
    }

    #[test]
    fn helmholtz_inverse_of_cosine() {
        let g = grid();
        let f = Field::from_fn(g, |x| (3.0 * x).cos());
        let hf = helmholtz_inverse(&f).unwrap();
        for (j, v) in hf.samples().iter().enumerate() {
            let want = (3.0 * g.node(j)).cos() / 10.0;
            assert!((v - want).abs() < 1e-12);
        }
        let c = helmholtz_inverse(&Field::constant(g, 2.5)).unwrap();
        for v in c.samples() {
            assert!((v - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn helmholtz_inverse_then_forward_is_identity() {
        let g = grid();
        // Band-limited pseudo-random field.
        let f = Field::from_fn(g, |x| {
            (1..=9).map(|k| ((k * k) as f64 + k as f64 * x).sin() / k as f64).sum()
        });
        let inv = Multiplier::helmholtz_inverse(g);
        let fwd = Multiplier::helmholtz(g);
        let back = fwd.apply(&inv.apply(&f).unwrap()).unwrap();
        let scale = f.linf();
        for (a, b) in f.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn multiplier_composition_matches_product() {
        let g = grid();
        let f = Field::from_fn(g, |x| (2.0 * x).sin() + 0.2 * (11.0 * x).cos());
        let a = Multiplier::helmholtz_inverse(g);
        let b = Multiplier::derivative(g);
        let seq = b.apply(&a.apply(&f).unwrap()).unwrap();
        let prod = a.product(&b).unwrap().apply(&f).unwrap();
        let scale = seq.linf().max(1e-300);
        for (x, y) in seq.samples().iter().zip(prod.samples()) {
            assert!((x - y).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn dealias_keeps_low_band_kills_high() {
        let g = grid(); // nyquist 64, cutoff 32
        let low = Field::from_fn(g, |x| (10.0 * x).cos());
        let kept = dealias(&low).unwrap();
        for (a, b) in low.samples().iter().zip(kept.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
        let high = Field::from_fn(g, |x| (40.0 * x).cos());
        assert!(dealias(&high).unwrap().linf() < 1e-12);
    }

    #[test]
    fn asymmetric_spectrum_is_rejected() {
        let g = grid();
        let f = Field::from_fn(g, |x| x.cos());
        // An even, real symbol keeps fields real; an odd real symbol breaks
        // conjugate symmetry and must be caught on reconstruction.
        let bad = Multiplier::from_real_symbol(g, |xi| xi);
        match bad.apply(&f) {
            Err(SpectralError::ImaginaryResidue(r)) => assert!(r > 1e-2),
            other => panic!("expected symmetry violation, got {other:?}"),
        }
    }

    #[test]
    fn parseval_identity() {
        let f = Field::from_fn(grid(), |x| x.sin() + 0.25 * (5.0 * x).cos() + 1.5);
        let direct = f.lp_norm(LpExponent::TWO);
        let spectral = f.to_spectral().l2_norm();
        assert!((direct - spectral).abs() < 1e-10 * direct);
    }
}

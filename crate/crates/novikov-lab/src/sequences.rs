//! Oscillating initial-data families used by the separation experiments.
//!
//! Everything here is band-limited *by construction*: the bump and the
//! modulated packets are assembled directly in frequency space, so their
//! support statements hold exactly on the grid rather than up to sampling
//! error.

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::error::SpectralError;
use crate::field::Field;
use crate::grid::GridSpec;
use crate::paley::{smooth_step, BesovIndex};
use crate::spectral::{dealias, derivative, Spectrum};

/// Carrier frequency ratio of the oscillating packets: the `n`-th packet
/// is modulated at `CARRIER_RATIO * 2^n`, the midpoint of the plateau of
/// the annular cutoff.
pub const CARRIER_RATIO: f64 = 17.0 / 12.0;

#[derive(Debug, Error)]
pub enum SequenceError {
    #[error("dyadic index must be at least 3, got {0}")]
    IndexTooSmall(u32),
    #[error(
        "packet band [{band:.3}] exceeds the dealias-safe region (nyquist/3 = {limit:.3}) on {grid}"
    )]
    BandTooHigh { band: f64, limit: f64, grid: GridSpec },
    #[error("regularity too low: s = {s} must exceed max(1 + 1/p, 3/2) = {threshold}")]
    RegularityTooLow { s: f64, threshold: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Decay exponent `min((s - max(1 + 1/p, 3/2))/2, 1/2)` governing how fast
/// the deviation estimates shrink with the dyadic index. Requires the
/// regularity to sit strictly above the threshold.
pub fn epsilon_s(idx: &BesovIndex) -> Result<f64, SequenceError> {
    let threshold = (1.0 + idx.p.reciprocal()).max(1.5);
    if idx.s.is_nan() || idx.s <= threshold {
        return Err(SequenceError::RegularityTooLow {
            s: idx.s,
            threshold,
        });
    }
    Ok((0.5 * (idx.s - threshold)).min(0.5))
}

/// Parameters of one experiment cell: dyadic index, Besov indices, grid.
#[derive(Debug, Clone, Copy)]
pub struct SequenceParams {
    n: u32,
    idx: BesovIndex,
    grid: GridSpec,
}

impl SequenceParams {
    /// Validates `n >= 3`, the regularity threshold, and the band bound
    /// `CARRIER_RATIO * 2^n + 1/2 <= nyquist/3` that keeps every cubic
    /// interaction of the packet resolved.
    pub fn new(n: u32, idx: BesovIndex, grid: GridSpec) -> Result<Self, SequenceError> {
        if n < 3 {
            return Err(SequenceError::IndexTooSmall(n));
        }
        epsilon_s(&idx)?;
        let band = CARRIER_RATIO * (n as f64).exp2() + 0.5;
        let limit = grid.nyquist() / 3.0;
        if band > limit {
            return Err(SequenceError::BandTooHigh { band, limit, grid });
        }
        Ok(Self { n, idx, grid })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn index(&self) -> &BesovIndex {
        &self.idx
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn carrier(&self) -> f64 {
        CARRIER_RATIO * (self.n as f64).exp2()
    }
}

/// Frequency profile of the bump: 1 on `|xi| <= 1/4`, 0 on `|xi| >= 1/2`,
/// C-infinity blend in between.
pub fn bump_profile(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 0.25 {
        1.0
    } else if a >= 0.5 {
        0.0
    } else {
        smooth_step((0.5 - a) / 0.25)
    }
}

/// The smooth even bump `phi_b`, defined through its discrete spectrum so
/// that the spectrum vanishes identically for `|xi| >= 1/2`.
pub fn bump(grid: &GridSpec) -> Field {
    let coeffs = (0..grid.points())
        .map(|m| Complex64::new(bump_profile(grid.freq(m)), 0.0))
        .collect();
    Spectrum::from_coeffs(*grid, coeffs)
        .expect("coefficient count matches grid")
        .to_physical()
        .expect("even real profile reconstructs a real field")
}

/// The oscillating packet `2^(-n s) phi_b(x) sin(omega_n x)` with
/// `omega_n = CARRIER_RATIO * 2^n`, assembled in frequency space: its
/// spectrum occupies exactly the annulus `omega_n - 1/2 <= |xi| <= omega_n + 1/2`.
pub fn f_seq(p: &SequenceParams) -> Field {
    let grid = p.grid;
    let omega = p.carrier();
    let amp = (-(p.n as f64) * p.idx.s).exp2();
    // sin(omega x) shifts the bump profile: (F f)(xi) =
    // amp * (profile(xi - omega) - profile(xi + omega)) / (2 i).
    let coeffs = (0..grid.points())
        .map(|m| {
            let xi = grid.freq(m);
            let re = 0.0;
            let im = -0.5 * amp * (bump_profile(xi - omega) - bump_profile(xi + omega));
            Complex64::new(re, im)
        })
        .collect();
    Spectrum::from_coeffs(grid, coeffs)
        .expect("coefficient count matches grid")
        .to_physical()
        .expect("conjugate-symmetric construction")
}

/// The low-frequency companion `2^(-n/2) phi_b(x)`.
pub fn g_seq(p: &SequenceParams) -> Field {
    bump(&p.grid).scaled((-(p.n() as f64) * 0.5).exp2())
}

/// The experiment pair: `u0 = f_n`, `v0 = f_n + g_n`.
pub fn initial_pair(p: &SequenceParams) -> (Field, Field) {
    let f = f_seq(p);
    let g = g_seq(p);
    let v = &f + &g;
    (f, v)
}

/// First-order transport drift `V0 = -v0^2 * d v0/dx`, dealiased like
/// every product the evolver forms.
pub fn drift_term(v0: &Field) -> Result<Field, SpectralError> {
    let dv = derivative(v0)?;
    let prod: Vec<f64> = v0
        .samples()
        .iter()
        .zip(dv.samples())
        .map(|(v, d)| -v * v * d)
        .collect();
    dealias(&Field::new_unchecked(*v0.grid(), prod))
}

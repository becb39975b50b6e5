//! Real-valued fields sampled on a [`GridSpec`], with discrete Lp norms.

use std::ops::{Add, Neg, Sub};

use crate::error::SpectralError;
use crate::grid::GridSpec;
use crate::spectral::Spectrum;

/// Lebesgue exponent in `[1, inf]`, validated at construction so the norm
/// routines never have to fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpExponent(f64);

impl LpExponent {
    pub const ONE: LpExponent = LpExponent(1.0);
    pub const TWO: LpExponent = LpExponent(2.0);
    pub const INFINITY: LpExponent = LpExponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self, SpectralError> {
        if p.is_nan() || p < 1.0 {
            return Err(SpectralError::BadExponent(p));
        }
        Ok(Self(p))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }

    /// `1/p`, with the convention `1/inf = 0`.
    pub fn reciprocal(&self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl std::fmt::Display for LpExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A real function sampled on the grid. The spectral view is obtained with
/// [`Field::to_spectral`]; both views agree up to transform roundoff.
#[derive(Debug, Clone)]
pub struct Field {
    grid: GridSpec,
    samples: Vec<f64>,
}

impl Field {
    pub fn from_samples(grid: GridSpec, samples: Vec<f64>) -> Result<Self, SpectralError> {
        if samples.len() != grid.points() {
            return Err(SpectralError::SampleCountMismatch {
                expected: grid.points(),
                got: samples.len(),
            });
        }
        Ok(Self { grid, samples })
    }

    pub(crate) fn new_unchecked(grid: GridSpec, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.points());
        Self { grid, samples }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        let samples = (0..grid.points()).map(|j| f(grid.node(j))).collect();
        Self { grid, samples }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            samples: vec![0.0; grid.points()],
        }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self {
            grid,
            samples: vec![c; grid.points()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Forward transform; see [`Spectrum`] for the normalization.
    pub fn to_spectral(&self) -> Spectrum {
        Spectrum::forward(self)
    }

    /// Discrete Lp norm: rectangle rule `(dx * sum |f_j|^p)^(1/p)` for
    /// finite `p`, grid maximum for `p = inf`.
    pub fn lp_norm(&self, p: LpExponent) -> f64 {
        lp_norm_of(self.grid.dx(), &self.samples, p)
    }

    pub fn linf(&self) -> f64 {
        self.lp_norm(LpExponent::INFINITY)
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field {
            grid: self.grid,
            samples: self.samples.iter().map(|x| a * x).collect(),
        }
    }

    /// `self + a * other`; both fields must share a grid.
    pub fn axpy(&self, a: f64, other: &Field) -> Result<Field, SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch(self.grid, other.grid));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| x + a * y)
            .collect();
        Ok(Field {
            grid: self.grid,
            samples,
        })
    }
}

pub(crate) fn lp_norm_of(dx: f64, samples: &[f64], p: LpExponent) -> f64 {
    if p.is_infinite() {
        return samples.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
    }
    let pv = p.value();
    if pv == 2.0 {
        (dx * samples.iter().map(|x| x * x).sum::<f64>()).sqrt()
    } else if pv == 1.0 {
        dx * samples.iter().map(|x| x.abs()).sum::<f64>()
    } else {
        (dx * samples.iter().map(|x| x.abs().powf(pv)).sum::<f64>()).powf(1.0 / pv)
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.axpy(1.0, rhs).expect("field addition across grids")
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.axpy(-1.0, rhs).expect("field subtraction across grids")
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scaled(-1.0)
    }
}

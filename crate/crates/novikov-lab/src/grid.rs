//! Uniform periodic grid on the torus `[-L/2, L/2)`.

use std::f64::consts::PI;
use std::fmt;

use crate::error::SpectralError;

/// Sampling layout shared by every field: `points` equispaced nodes on a
/// torus of circumference `length`.
///
/// Node `j` sits at `x_j = -L/2 + j*dx`, and the discrete frequency ladder
/// is `xi_k = 2*pi*k/L` for `k = -N/2 .. N/2-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    length: f64,
    points: usize,
}

impl GridSpec {
    /// Builds a grid. `points` must be a power of two, at least 16, and
    /// `length` strictly positive and finite.
    pub fn new(length: f64, points: usize) -> Result<Self, SpectralError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::BadLength(length));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(SpectralError::BadPointCount(points));
        }
        Ok(Self { length, points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Nyquist frequency `pi*N/L`, the largest resolved `|xi|`.
    pub fn nyquist(&self) -> f64 {
        PI * self.points as f64 / self.length
    }

    /// Physical coordinate of node `j`.
    pub fn node(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.node(j)).collect()
    }

    /// Frequency of the FFT-ordered bin `m`: bins `0..N/2` carry
    /// `xi = 2*pi*m/L`, bins `N/2..N` the negative ladder.
    pub fn freq(&self, m: usize) -> f64 {
        debug_assert!(m < self.points);
        let half = self.points / 2;
        let k = if m < half {
            m as f64
        } else {
            m as f64 - self.points as f64
        };
        2.0 * PI * k / self.length
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.points).map(|m| self.freq(m)).collect()
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={}, L={}", self.points, self.length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_circle_grid() {
        let g = GridSpec::new(2.0 * PI, 16).unwrap();
        assert!((g.dx() - PI / 8.0).abs() < 1e-15);
        let mut freqs: Vec<i64> = g.freqs().iter().map(|&x| x.round() as i64).collect();
        freqs.sort_unstable();
        assert_eq!(freqs, (-8..8).collect::<Vec<i64>>());
        for m in 0..16 {
            let k = if m < 8 { m as f64 } else { m as f64 - 16.0 };
            assert!((g.freq(m) - k).abs() < 1e-14);
        }
    }

    #[test]
    fn large_torus_ladder() {
        let g = GridSpec::new(256.0 * PI, 1 << 15).unwrap();
        let spacing = g.freq(1) - g.freq(0);
        assert!((spacing - 1.0 / 128.0).abs() < 1e-15);
        assert!((g.nyquist() - 128.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GridSpec::new(0.0, 64).is_err());
        assert!(GridSpec::new(-1.0, 64).is_err());
        assert!(GridSpec::new(f64::NAN, 64).is_err());
        assert!(GridSpec::new(1.0, 48).is_err());
        assert!(GridSpec::new(1.0, 8).is_err());
    }

    #[test]
    fn nodes_span_symmetric_interval() {
        let g = GridSpec::new(10.0, 32).unwrap();
        assert!((g.node(0) + 5.0).abs() < 1e-15);
        assert!((g.node(16)).abs() < 1e-15);
        assert!(g.node(31) < 5.0);
    }
}

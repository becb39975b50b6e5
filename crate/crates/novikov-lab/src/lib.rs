//! Pseudo-spectral laboratory for the Novikov equation on a large torus.
//!
//! The crate provides, bottom up:
//!
//! * [`grid`], [`field`], [`spectral`] — periodic grids, real fields with a
//!   frequency-side view, Fourier-multiplier operators, discrete Lp norms,
//!   and half-rule dealiasing;
//! * [`paley`] — a dyadic partition of unity, frequency blocks, and
//!   discrete Besov norms;
//! * [`sequences`] — band-limited oscillating data families whose Besov
//!   norms scale exactly dyadically;
//! * [`novikov`] — the equation's nonlocal transport right-hand side and
//!   an RK4 integrator with CFL step control;
//! * [`harness`] — paired-evolution experiments that measure how the
//!   data-to-solution map separates nearby data, with CSV reports.

pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod novikov;
pub mod paley;
pub mod sequences;
pub mod spectral;

pub use error::SpectralError;
pub use field::{Field, LpExponent};
pub use grid::GridSpec;
pub use paley::{
    besov_detail, besov_norm, block_profile, build_partition, dyadic_block, low_cutoff,
    max_block_index, partition_unity_error, BesovDetail, BesovIndex, DyadicPartition,
};
pub use sequences::{
    bump, bump_profile, drift_term, epsilon_s, f_seq, g_seq, initial_pair, SequenceError,
    SequenceParams, CARRIER_RATIO,
};
pub use spectral::{
    dealias, derivative, helmholtz_inverse, Multiplier, Spectrum, SYMMETRY_TOLERANCE,
};

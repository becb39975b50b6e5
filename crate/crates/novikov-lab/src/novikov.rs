//! Right-hand side of the Novikov equation in nonlocal transport form,
//! plus an explicit RK4 time integrator.
//!
//! The equation is advanced as
//! `u_t = -u^2 u_x + R1(u) + R2(u) + R3(u)` with
//! `R1 = -(1/2)(1-dxx)^{-1}(u_x^3)`, `R2 = -d/dx (1-dxx)^{-1}(u^3)`,
//! `R3 = -(3/2) d/dx (1-dxx)^{-1}(u u_x^2)`. Every pointwise product is
//! dealiased with the half rule before re-entering frequency space.

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::error::SpectralError;
use crate::field::Field;
use crate::spectral::{dealias, derivative, helmholtz_inverse, Spectrum};

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("time step {dt:.3e} exceeds the CFL bound {bound:.3e} at t = {t:.6}")]
    CflViolation { dt: f64, bound: f64, t: f64 },
    #[error("solution blew up at t = {t:.6} (step {step}): {reason}")]
    BlowUp {
        t: f64,
        step: usize,
        reason: String,
        /// Whatever was integrated before the failure.
        partial: Trajectory,
    },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Time-stepping controls.
///
/// With `fixed_dt` unset the step is recomputed every iteration as
/// `cfl * dx / max(1, ||u||_inf^2)`; steps are shortened to land exactly
/// on sample times and on the final time.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub fixed_dt: Option<f64>,
    pub final_time: f64,
    pub cfl: f64,
    pub sample_times: Vec<f64>,
    pub dealias_enabled: bool,
}

impl SolverConfig {
    pub fn new(final_time: f64, sample_times: Vec<f64>) -> Result<Self, EvolveError> {
        let cfg = Self {
            fixed_dt: None,
            final_time,
            cfl: 0.5,
            sample_times,
            dealias_enabled: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `count` sample times spread uniformly over `[0, final_time]`,
    /// endpoints included.
    pub fn with_uniform_samples(final_time: f64, count: usize) -> Result<Self, EvolveError> {
        if count < 2 {
            return Err(EvolveError::InvalidConfig(
                "need at least two sample times".into(),
            ));
        }
        let samples = (0..count)
            .map(|i| final_time * i as f64 / (count - 1) as f64)
            .collect();
        Self::new(final_time, samples)
    }

    pub fn cfl(mut self, cfl: f64) -> Result<Self, EvolveError> {
        self.cfl = cfl;
        self.validate()?;
        Ok(self)
    }

    pub fn fixed_dt(mut self, dt: f64) -> Result<Self, EvolveError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(EvolveError::InvalidConfig(format!(
                "fixed time step must be positive, got {dt}"
            )));
        }
        self.fixed_dt = Some(dt);
        Ok(self)
    }

    fn validate(&self) -> Result<(), EvolveError> {
        if !(self.final_time.is_finite() && self.final_time >= 0.0) {
            return Err(EvolveError::InvalidConfig(format!(
                "final time must be nonnegative, got {}",
                self.final_time
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(EvolveError::InvalidConfig(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        let mut last = -1.0;
        for &t in &self.sample_times {
            if !(t >= 0.0 && t <= self.final_time) {
                return Err(EvolveError::InvalidConfig(format!(
                    "sample time {t} outside [0, {}]",
                    self.final_time
                )));
            }
            if t <= last {
                return Err(EvolveError::InvalidConfig(
                    "sample times must be strictly increasing".into(),
                ));
            }
            last = t;
        }
        Ok(())
    }
}

/// Per-step scalars recorded while integrating.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostic {
    pub t: f64,
    pub dt: f64,
    pub linf: f64,
    pub h1_energy: f64,
}

/// Result of an integration: states at the requested sample times plus
/// the per-step diagnostic track.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<(f64, Field)>,
    pub diagnostics: Vec<StepDiagnostic>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|(t, _)| *t).collect()
    }

    pub fn field_at(&self, t: f64) -> Option<&Field> {
        self.snapshots
            .iter()
            .find(|(s, _)| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
            .map(|(_, f)| f)
    }

    pub fn last(&self) -> &Field {
        &self.snapshots.last().expect("trajectory holds state").1
    }
}

/// H1 energy `integral(u^2 + u_x^2) dx`, a first integral of the flow.
pub fn h1_energy(u: &Field) -> f64 {
    h1_energy_spectral(&u.to_spectral())
}

fn h1_energy_spectral(spec: &Spectrum) -> f64 {
    let grid = spec.grid();
    spec.coeffs()
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let xi = grid.freq(m);
            (1.0 + xi * xi) * c.norm_sqr()
        })
        .sum::<f64>()
        / grid.length()
}

/// `-(1/2) (1-dxx)^{-1} (u_x^3)` with the cubic product dealiased.
pub fn remainder_r1(u: &Field) -> Result<Field, SpectralError> {
    let ux = derivative(u)?;
    let cube = Field::new_unchecked(*u.grid(), ux.samples().iter().map(|x| x * x * x).collect());
    Ok(helmholtz_inverse(&dealias(&cube)?)?.scaled(-0.5))
}

/// `-d/dx (1-dxx)^{-1} (u^3)` with the cubic product dealiased.
pub fn remainder_r2(u: &Field) -> Result<Field, SpectralError> {
    let cube = Field::new_unchecked(*u.grid(), u.samples().iter().map(|x| x * x * x).collect());
    Ok(derivative(&helmholtz_inverse(&dealias(&cube)?)?)?.scaled(-1.0))
}

/// `-(3/2) d/dx (1-dxx)^{-1} (u u_x^2)` with the product dealiased.
pub fn remainder_r3(u: &Field) -> Result<Field, SpectralError> {
    let ux = derivative(u)?;
    let prod = Field::new_unchecked(
        *u.grid(),
        u.samples()
            .iter()
            .zip(ux.samples())
            .map(|(a, b)| a * b * b)
            .collect(),
    );
    Ok(derivative(&helmholtz_inverse(&dealias(&prod)?)?)?.scaled(-1.5))
}

/// Full right-hand side `-u^2 u_x + R1 + R2 + R3`.
///
/// All four cubic products share one derivative evaluation and are pushed
/// through frequency space together, so a full evaluation costs six
/// transforms.
pub fn rhs(u: &Field) -> Result<Field, SpectralError> {
    rhs_inner(u, true)
}

pub(crate) fn rhs_inner(u: &Field, dealias_enabled: bool) -> Result<Field, SpectralError> {
    let grid = *u.grid();
    let n = grid.points();
    let spec = u.to_spectral();

    // u_x via the derivative symbol (Nyquist zeroed). Realness holds by
    // construction here, so the reconstruction skips the symmetry check.
    let nyq = grid.nyquist();
    let mut dspec = spec.clone();
    for (m, c) in dspec.coeffs_mut().iter_mut().enumerate() {
        let xi = grid.freq(m);
        *c = if xi == -nyq {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, xi) * *c
        };
    }
    let ux = dspec.to_physical_parts().0;

    let us = u.samples();
    let uxs = ux.samples();
    let mut transport = vec![0.0; n];
    let mut cube_ux = vec![0.0; n];
    let mut cube_u = vec![0.0; n];
    let mut mixed = vec![0.0; n];
    for j in 0..n {
        let a = us[j];
        let b = uxs[j];
        transport[j] = a * a * b;
        cube_ux[j] = b * b * b;
        cube_u[j] = a * a * a;
        mixed[j] = a * b * b;
    }

    let t_spec = Field::new_unchecked(grid, transport).to_spectral();
    let r1_spec = Field::new_unchecked(grid, cube_ux).to_spectral();
    let r2_spec = Field::new_unchecked(grid, cube_u).to_spectral();
    let r3_spec = Field::new_unchecked(grid, mixed).to_spectral();

    let cutoff = 0.5 * grid.nyquist();
    let mut total = Vec::with_capacity(n);
    for m in 0..n {
        let xi = grid.freq(m);
        if dealias_enabled && xi.abs() > cutoff {
            total.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let h = 1.0 / (1.0 + xi * xi);
        let dx_sym = if xi == -nyq {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, xi)
        };
        let c = -t_spec.coeffs()[m] - 0.5 * h * r1_spec.coeffs()[m]
            + dx_sym * h * (-r2_spec.coeffs()[m] - 1.5 * r3_spec.coeffs()[m]);
        total.push(c);
    }
    Ok(Spectrum::from_coeffs(grid, total)?.to_physical_parts().0)
}

/// One classical four-stage Runge-Kutta update of `u_t = rhs(u)`.
pub fn rk4_step(u: &Field, dt: f64) -> Result<Field, SpectralError> {
    rk4_step_inner(u, dt, true)
}

pub(crate) fn rk4_step_inner(
    u: &Field,
    dt: f64,
    dealias_enabled: bool,
) -> Result<Field, SpectralError> {
    let k1 = rhs_inner(u, dealias_enabled)?;
    let k2 = rhs_inner(&u.axpy(0.5 * dt, &k1)?, dealias_enabled)?;
    let k3 = rhs_inner(&u.axpy(0.5 * dt, &k2)?, dealias_enabled)?;
    let k4 = rhs_inner(&u.axpy(dt, &k3)?, dealias_enabled)?;
    let grid = *u.grid();
    let sixth = dt / 6.0;
    let samples = (0..grid.points())
        .map(|j| {
            u.samples()[j]
                + sixth
                    * (k1.samples()[j]
                        + 2.0 * k2.samples()[j]
                        + 2.0 * k3.samples()[j]
                        + k4.samples()[j])
        })
        .collect();
    Ok(Field::new_unchecked(grid, samples))
}

/// Integrates from `u0`, recording snapshots at the configured sample
/// times. Aborts with [`EvolveError::BlowUp`] on non-finite values or
/// once the sup norm exceeds a thousand times its initial size.
pub fn evolve(u0: &Field, cfg: &SolverConfig) -> Result<Trajectory, EvolveError> {
    cfg.validate()?;
    let grid = *u0.grid();
    let dx = grid.dx();
    let linf0 = u0.linf();
    let blowup_cap = if linf0 > 0.0 { 1e3 * linf0 } else { f64::MAX };

    let mut traj = Trajectory {
        snapshots: Vec::with_capacity(cfg.sample_times.len()),
        diagnostics: Vec::new(),
    };
    let mut linf = linf0;
    traj.diagnostics.push(StepDiagnostic {
        t: 0.0,
        dt: 0.0,
        linf,
        h1_energy: h1_energy(u0),
    });

    let mut targets = cfg.sample_times.iter().copied().peekable();
    if let Some(&t0) = targets.peek() {
        if t0 == 0.0 {
            traj.snapshots.push((0.0, u0.clone()));
            targets.next();
        }
    }

    let mut u = u0.clone();
    let mut t = 0.0;
    let mut step = 0usize;
    while t < cfg.final_time {
        let bound = cfg.cfl * dx / (linf * linf).max(1.0);
        let dt_raw = match cfg.fixed_dt {
            Some(dt) => {
                if dt > bound * (1.0 + 1e-12) {
                    return Err(EvolveError::CflViolation { dt, bound, t });
                }
                dt
            }
            None => bound,
        };
        let next_stop = targets.peek().copied().unwrap_or(cfg.final_time);
        let remaining = next_stop - t;
        let (dt, landing) = if dt_raw >= remaining {
            (remaining, true)
        } else {
            (dt_raw, false)
        };
        if dt.is_nan() || dt <= 0.0 {
            return Err(EvolveError::InvalidConfig(format!(
                "time step collapsed to {dt} at t = {t}"
            )));
        }

        u = rk4_step_inner(&u, dt, cfg.dealias_enabled)?;
        step += 1;
        t = if landing { next_stop } else { t + dt };

        if !u.is_finite() {
            return Err(EvolveError::BlowUp {
                t,
                step,
                reason: "non-finite sample".into(),
                partial: traj,
            });
        }
        linf = u.linf();
        traj.diagnostics.push(StepDiagnostic {
            t,
            dt,
            linf,
            h1_energy: h1_energy(&u),
        });
        if linf > blowup_cap {
            return Err(EvolveError::BlowUp {
                t,
                step,
                reason: format!("sup norm grew to {linf:.3e} (cap {blowup_cap:.3e})"),
                partial: traj,
            });
        }

        // Landing on final_time without it being a sample just ends the
        // loop via the while condition.
        if landing && Some(next_stop) == targets.peek().copied() {
            traj.snapshots.push((t, u.clone()));
            targets.next();
        }
    }
    Ok(traj)
}

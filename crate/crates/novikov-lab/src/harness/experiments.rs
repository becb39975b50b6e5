//! Paired-evolution experiments quantifying non-uniform dependence.
//!
//! Each cell `n` builds the data pair `(u0, v0) = (f_n, f_n + g_n)` on its
//! policy grid, evolves both states to `T0`, and tabulates per-time Besov
//! norms: the pair distance, the deviation of `u` from its data, and the
//! drift-corrected deviation `w = v(t) - v0 - t V0`. Cells run
//! independently and in parallel; a blown-up solve flags its cell and the
//! run continues.

use rayon::prelude::*;
use thiserror::Error;

use crate::error::SpectralError;
use crate::field::{Field, LpExponent};
use crate::grid::GridSpec;
use crate::novikov::{evolve, EvolveError, SolverConfig, Trajectory};
use crate::paley::{besov_norm, build_partition, BesovIndex, DyadicPartition};
use crate::sequences::{drift_term, epsilon_s, f_seq, g_seq, initial_pair, SequenceError, SequenceParams};
use crate::spectral::derivative;

use super::config::ExperimentConfig;
use super::fit::{log2_slope, quadratic_t2_fit};
use super::report::{
    QuadFitRow, RateRow, ReportRow, SeparationReport, Summary, SupRow,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] super::config::ConfigError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("solver setup failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which evolutions a run needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunScope {
    /// Both states; full separation columns.
    Full,
    /// Only the `u` state (data-deviation checks).
    UOnly,
    /// Only the `v` state (drift-corrected checks).
    VOnly,
    /// No evolutions; data-level quantities only.
    DataOnly,
}

/// Per-time norms of one cell.
#[derive(Debug, Clone)]
pub struct CellRow {
    pub t: f64,
    pub delta: Option<f64>,
    pub lemma_u: Option<f64>,
    pub lemma_v: Option<f64>,
}

/// Everything measured for one dyadic index.
#[derive(Debug)]
pub struct CellOutcome {
    pub n: u32,
    pub grid: GridSpec,
    pub dt0: f64,
    pub delta0: f64,
    pub rl_value: f64,
    pub rows: Vec<CellRow>,
    pub u_growth: f64,
    pub v_growth: f64,
    pub flagged: Option<String>,
    /// Kept for callers that want the raw states (CLI trajectory dumps).
    pub u_trajectory: Option<Trajectory>,
    pub v_trajectory: Option<Trajectory>,
}

fn cell_grid(cfg: &ExperimentConfig, n: u32) -> Result<GridSpec, HarnessError> {
    GridSpec::new(cfg.length, cfg.grid_points(n)).map_err(HarnessError::Spectral)
}

/// Normalized oscillatory norm `2^(n s) || g_n^2 d f_n/dx ||_p`.
fn oscillatory_norm(params: &SequenceParams) -> Result<f64, SpectralError> {
    let f = f_seq(params);
    let g = g_seq(params);
    let df = derivative(&f)?;
    let prod = Field::new_unchecked(
        *params.grid(),
        g.samples()
            .iter()
            .zip(df.samples())
            .map(|(a, b)| a * a * b)
            .collect(),
    );
    let weight = (params.n() as f64 * params.index().s).exp2();
    Ok(weight * prod.lp_norm(params.index().p))
}

/// `(integral_0^pi |cos|^p dx / pi)^(1/p)`, the mean oscillation factor.
pub fn oscillation_factor(p: LpExponent) -> f64 {
    if p.is_infinite() {
        return 1.0;
    }
    let pv = p.value();
    if pv == 2.0 {
        return std::f64::consts::FRAC_1_SQRT_2;
    }
    // Simpson quadrature; the integrand is smooth away from pi/2 and the
    // panel count makes the error irrelevant at reporting precision.
    let n = 1 << 16;
    let h = std::f64::consts::PI / n as f64;
    let f = |x: f64| x.cos().abs().powf(pv);
    let mut sum = f(0.0) + f(std::f64::consts::PI);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(i as f64 * h);
    }
    (sum * h / 3.0 / std::f64::consts::PI).powf(1.0 / pv)
}

/// Limit of the normalized oscillatory norm: the oscillation factor times
/// the Lp norm of the cubed envelope, the latter evaluated on a grid
/// `refine` times finer than the base cell grid.
pub fn oscillatory_limit(
    cfg: &ExperimentConfig,
    refine: u32,
) -> Result<f64, HarnessError> {
    let n_max = *cfg.n_list.iter().max().expect("validated non-empty");
    let points = cfg
        .grid_points(n_max)
        .checked_shl(refine)
        .expect("refined grid size overflows usize");
    let fine = GridSpec::new(cfg.length, points)?;
    let envelope = crate::sequences::bump(&fine);
    let cubed = Field::new_unchecked(
        fine,
        envelope.samples().iter().map(|x| x * x * x).collect(),
    );
    let factor = oscillation_factor(cfg.idx.p);
    Ok(17.0 / 12.0 * factor * cubed.lp_norm(cfg.idx.p))
}

fn besov_growth(
    traj: &Trajectory,
    base: f64,
    idx: &BesovIndex,
    part: &DyadicPartition,
) -> Result<f64, SpectralError> {
    if base == 0.0 {
        return Ok(1.0);
    }
    let mut worst = 1.0_f64;
    for (_, field) in &traj.snapshots {
        worst = worst.max(besov_norm(field, idx, part)? / base);
    }
    Ok(worst)
}

/// Runs one cell. Solver blow-up is captured in `flagged`; structural
/// problems (bad grid, bad indices) abort the run.
pub fn run_cell(
    cfg: &ExperimentConfig,
    n: u32,
    scope: RunScope,
) -> Result<CellOutcome, HarnessError> {
    let part = build_partition();
    let grid = cell_grid(cfg, n)?;
    let params = SequenceParams::new(n, cfg.idx, grid)?;
    let (u0, v0) = initial_pair(&params);
    let delta0 = besov_norm(&(&v0 - &u0), &cfg.idx, &part)?;
    let rl_value = oscillatory_norm(&params)?;
    let dt0 = cfg.cfl * grid.dx() / (u0.linf().max(v0.linf()).powi(2)).max(1.0);

    let mut outcome = CellOutcome {
        n,
        grid,
        dt0,
        delta0,
        rl_value,
        rows: Vec::new(),
        u_growth: 1.0,
        v_growth: 1.0,
        flagged: None,
        u_trajectory: None,
        v_trajectory: None,
    };
    if scope == RunScope::DataOnly {
        return Ok(outcome);
    }

    let solver = SolverConfig::new(cfg.t0, cfg.sample_times())
        .and_then(|c| c.cfl(cfg.cfl))
        .map_err(|e| HarnessError::Solver(e.to_string()))?;

    let need_u = matches!(scope, RunScope::Full | RunScope::UOnly);
    let need_v = matches!(scope, RunScope::Full | RunScope::VOnly);

    fn try_evolve(
        state: &Field,
        solver: &SolverConfig,
    ) -> Result<Result<Trajectory, String>, HarnessError> {
        match evolve(state, solver) {
            Ok(traj) => Ok(Ok(traj)),
            Err(EvolveError::BlowUp { t, step, reason, .. }) => Ok(Err(format!(
                "blow-up at t = {t:.6} (step {step}): {reason}"
            ))),
            Err(other) => Err(HarnessError::Solver(other.to_string())),
        }
    }

    let mut u_traj = None;
    if need_u {
        match try_evolve(&u0, &solver)? {
            Ok(traj) => u_traj = Some(traj),
            Err(msg) => outcome.flagged = Some(msg),
        }
    }
    let mut v_traj = None;
    if outcome.flagged.is_none() && need_v {
        match try_evolve(&v0, &solver)? {
            Ok(traj) => v_traj = Some(traj),
            Err(msg) => outcome.flagged = Some(msg),
        }
    }
    if outcome.flagged.is_some() {
        return Ok(outcome);
    }

    let drift = if v_traj.is_some() {
        Some(drift_term(&v0)?)
    } else {
        None
    };

    let mut rows = Vec::with_capacity(cfg.sample_times().len());
    for &t in &cfg.sample_times() {
        let u_t = u_traj.as_ref().map(|tr| tr.field_at(t).expect("sampled"));
        let v_t = v_traj.as_ref().map(|tr| tr.field_at(t).expect("sampled"));
        let lemma_u = match u_t {
            Some(u) => Some(besov_norm(&(u - &u0), &cfg.idx, &part)?),
            None => None,
        };
        let lemma_v = match (v_t, &drift) {
            (Some(v), Some(v0_drift)) => {
                let w = (v - &v0).axpy(-t, v0_drift)?;
                Some(besov_norm(&w, &cfg.idx, &part)?)
            }
            _ => None,
        };
        let delta = match (u_t, v_t) {
            (Some(u), Some(v)) => Some(besov_norm(&(u - v), &cfg.idx, &part)?),
            _ => None,
        };
        rows.push(CellRow {
            t,
            delta,
            lemma_u,
            lemma_v,
        });
    }
    outcome.rows = rows;

    if let Some(traj) = &u_traj {
        let base = besov_norm(&u0, &cfg.idx, &part)?;
        outcome.u_growth = besov_growth(traj, base, &cfg.idx, &part)?;
    }
    if let Some(traj) = &v_traj {
        let base = besov_norm(&v0, &cfg.idx, &part)?;
        outcome.v_growth = besov_growth(traj, base, &cfg.idx, &part)?;
    }
    outcome.u_trajectory = u_traj;
    outcome.v_trajectory = v_traj;
    Ok(outcome)
}

/// Runs all configured cells (in parallel) under one scope.
pub fn run_cells(
    cfg: &ExperimentConfig,
    scope: RunScope,
) -> Result<Vec<CellOutcome>, HarnessError> {
    cfg.validate()?;
    cfg.n_list
        .par_iter()
        .map(|&n| run_cell(cfg, n, scope))
        .collect()
}

/// Fraction of `[0, T0]` treated as the late-time window for rate fits.
const RATE_WINDOW_START: f64 = 0.4;

fn assemble_summary(cfg: &ExperimentConfig, cells: &[CellOutcome]) -> Result<Summary, HarnessError> {
    let clean: Vec<&CellOutcome> = cells.iter().filter(|c| c.flagged.is_none()).collect();
    let ns: Vec<f64> = clean.iter().map(|c| c.n as f64).collect();

    let delta0s: Vec<f64> = clean.iter().map(|c| c.delta0).collect();
    let delta0_slope = if ns.len() >= 2 {
        log2_slope(&ns, &delta0s)
    } else {
        f64::NAN
    };

    let mut lemma_u_sup = Vec::new();
    let mut lemma_v_fits = Vec::new();
    let mut rates = Vec::new();
    for cell in &clean {
        if cell.rows.is_empty() {
            continue;
        }
        if cell.rows.iter().all(|r| r.lemma_u.is_some()) {
            let sup = cell
                .rows
                .iter()
                .map(|r| r.lemma_u.unwrap())
                .fold(0.0_f64, f64::max);
            lemma_u_sup.push(SupRow { n: cell.n, sup });
        }
        if cell.rows.iter().all(|r| r.lemma_v.is_some()) {
            let ts: Vec<f64> = cell.rows.iter().map(|r| r.t).collect();
            let ys: Vec<f64> = cell.rows.iter().map(|r| r.lemma_v.unwrap()).collect();
            let (a, b, rms) = quadratic_t2_fit(&ts, &ys);
            lemma_v_fits.push(QuadFitRow {
                n: cell.n,
                intercept: a,
                curvature: b,
                rms_residual: rms,
                endpoint: *ys.last().unwrap(),
            });
        }
        if cell.rows.iter().all(|r| r.delta.is_some()) {
            let window_start = RATE_WINDOW_START * cfg.t0;
            let mut rate_min = f64::INFINITY;
            let mut excess_min = f64::INFINITY;
            for r in &cell.rows {
                if r.t < window_start || r.t == 0.0 {
                    continue;
                }
                let d = r.delta.unwrap();
                rate_min = rate_min.min(d / r.t);
                let excess = (d * d - cell.delta0 * cell.delta0).max(0.0).sqrt();
                excess_min = excess_min.min(excess / r.t);
            }
            if rate_min.is_finite() {
                rates.push(RateRow {
                    n: cell.n,
                    rate_min,
                    excess_rate_min: excess_min,
                });
            }
        }
    }

    let lemma_u_slope = if lemma_u_sup.len() >= 2 {
        let xs: Vec<f64> = lemma_u_sup.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = lemma_u_sup.iter().map(|r| r.sup).collect();
        log2_slope(&xs, &ys)
    } else {
        f64::NAN
    };

    let rl_values: Vec<(u32, f64)> = clean.iter().map(|c| (c.n, c.rl_value)).collect();
    let rl_limit = oscillatory_limit(cfg, 3)?;

    let besov_growth_max = clean
        .iter()
        .map(|c| c.u_growth.max(c.v_growth))
        .fold(1.0_f64, f64::max);

    Ok(Summary {
        delta0_slope,
        lemma_u_sup,
        lemma_u_slope,
        lemma_v_fits,
        rates,
        rl_values,
        rl_limit,
        besov_growth_max,
        flagged: cells
            .iter()
            .filter_map(|c| c.flagged.clone().map(|f| (c.n, f)))
            .collect(),
    })
}

fn cell_report_rows(cfg: &ExperimentConfig, cell: &CellOutcome) -> Vec<ReportRow> {
    let template = |t: f64| ReportRow {
        n: cell.n,
        t,
        delta0: cell.delta0,
        delta: 0.0,
        lemma_u: 0.0,
        lemma_v: 0.0,
        rl_value: cell.rl_value,
        s: cfg.idx.s,
        p: cfg.idx.p.value(),
        r: cfg.idx.r.value(),
        grid_points: cell.grid.points(),
        length: cell.grid.length(),
        dt: cell.dt0,
    };
    if cell.rows.is_empty() {
        // Flagged or data-only cell: a single t = 0 row, where all three
        // evolution columns vanish identically.
        return vec![template(0.0)];
    }
    cell.rows
        .iter()
        .map(|r| {
            let mut row = template(r.t);
            row.delta = r.delta.unwrap_or(0.0);
            row.lemma_u = r.lemma_u.unwrap_or(0.0);
            row.lemma_v = r.lemma_v.unwrap_or(0.0);
            row
        })
        .collect()
}

/// Full separation experiment over the configured cells.
pub fn run_separation(cfg: &ExperimentConfig) -> Result<SeparationReport, HarnessError> {
    let cells = run_cells(cfg, RunScope::Full)?;
    let summary = assemble_summary(cfg, &cells)?;
    let mut rows = Vec::new();
    for cell in &cells {
        rows.extend(cell_report_rows(cfg, cell));
    }
    rows.sort_by(|a, b| (a.n, a.t).partial_cmp(&(b.n, b.t)).expect("finite keys"));
    Ok(SeparationReport {
        index: cfg.idx,
        rows,
        summary,
    })
}

/// Rows of the data-deviation check (`u` evolutions only).
#[derive(Debug, Clone)]
pub struct LemmaURow {
    pub n: u32,
    pub t: f64,
    pub deviation: f64,
}

#[derive(Debug)]
pub struct LemmaUReport {
    pub rows: Vec<LemmaURow>,
    pub sups: Vec<SupRow>,
    pub slope: f64,
    pub epsilon: f64,
    pub flagged: Vec<(u32, String)>,
}

/// Deviation-from-data check: evolves each `u0 = f_n` and tabulates
/// `||u(t) - u0||` in the experiment norm.
pub fn check_lemma_u(cfg: &ExperimentConfig) -> Result<LemmaUReport, HarnessError> {
    let epsilon = epsilon_s(&cfg.idx)?;
    let cells = run_cells(cfg, RunScope::UOnly)?;
    let mut rows = Vec::new();
    let mut sups = Vec::new();
    for cell in &cells {
        if cell.flagged.is_some() {
            continue;
        }
        let mut sup = 0.0_f64;
        for r in &cell.rows {
            let d = r.lemma_u.expect("scope guarantees u norms");
            sup = sup.max(d);
            rows.push(LemmaURow {
                n: cell.n,
                t: r.t,
                deviation: d,
            });
        }
        sups.push(SupRow { n: cell.n, sup });
    }
    let slope = if sups.len() >= 2 {
        let xs: Vec<f64> = sups.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = sups.iter().map(|r| r.sup).collect();
        log2_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    Ok(LemmaUReport {
        rows,
        sups,
        slope,
        epsilon,
        flagged: cells
            .iter()
            .filter_map(|c| c.flagged.clone().map(|f| (c.n, f)))
            .collect(),
    })
}

/// Rows of the drift-corrected check (`v` evolutions only).
#[derive(Debug, Clone)]
pub struct LemmaVRow {
    pub n: u32,
    pub t: f64,
    pub corrected: f64,
}

#[derive(Debug)]
pub struct LemmaVReport {
    pub rows: Vec<LemmaVRow>,
    pub fits: Vec<QuadFitRow>,
    pub flagged: Vec<(u32, String)>,
}

/// Drift-corrected deviation check: evolves each `v0 = f_n + g_n` and fits
/// `||v(t) - v0 - t V0|| ~ a + b t^2`.
pub fn check_lemma_v(cfg: &ExperimentConfig) -> Result<LemmaVReport, HarnessError> {
    let cells = run_cells(cfg, RunScope::VOnly)?;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for cell in &cells {
        if cell.flagged.is_some() {
            continue;
        }
        let ts: Vec<f64> = cell.rows.iter().map(|r| r.t).collect();
        let ys: Vec<f64> = cell
            .rows
            .iter()
            .map(|r| r.lemma_v.expect("scope guarantees v norms"))
            .collect();
        for (t, y) in ts.iter().zip(&ys) {
            rows.push(LemmaVRow {
                n: cell.n,
                t: *t,
                corrected: *y,
            });
        }
        let (a, b, rms) = quadratic_t2_fit(&ts, &ys);
        fits.push(QuadFitRow {
            n: cell.n,
            intercept: a,
            curvature: b,
            rms_residual: rms,
            endpoint: *ys.last().unwrap(),
        });
    }
    Ok(LemmaVReport {
        rows,
        fits,
        flagged: cells
            .iter()
            .filter_map(|c| c.flagged.clone().map(|f| (c.n, f)))
            .collect(),
    })
}

#[derive(Debug)]
pub struct RlReport {
    pub rows: Vec<(u32, f64)>,
    pub limit: f64,
    pub factor: f64,
}

/// Oscillatory-norm convergence check; no evolutions involved.
pub fn check_rl_limit(cfg: &ExperimentConfig) -> Result<RlReport, HarnessError> {
    if cfg.idx.p.is_infinite() {
        // sup-norm variant: the oscillation factor degenerates to 1.
        log::warn!("p = inf: the oscillatory average is replaced by the grid maximum");
    }
    let cells = run_cells(cfg, RunScope::DataOnly)?;
    Ok(RlReport {
        rows: cells.iter().map(|c| (c.n, c.rl_value)).collect(),
        limit: oscillatory_limit(cfg, 3)?,
        factor: oscillation_factor(cfg.idx.p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillation_factor_values() {
        assert!((oscillation_factor(LpExponent::TWO) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        // p = 1: mean of |cos| over a period is 2/pi.
        let got = oscillation_factor(LpExponent::ONE);
        assert!((got - 2.0 / std::f64::consts::PI).abs() < 1e-8);
        assert_eq!(oscillation_factor(LpExponent::INFINITY), 1.0);
    }

    #[test]
    fn identical_pair_separates_by_zero() {
        // Determinism: the same data evolved twice gives identical
        // trajectories, so delta must vanish identically.
        let cfg = ExperimentConfig {
            n_list: vec![3],
            t0: 0.05,
            ..ExperimentConfig::default()
        };
        let cell = run_cell(&cfg, 3, RunScope::Full).unwrap();
        assert!(cell.flagged.is_none());
        let grid = cell.grid;
        let params = SequenceParams::new(3, cfg.idx, grid).unwrap();
        let u0 = f_seq(&params);
        let solver = SolverConfig::new(cfg.t0, cfg.sample_times()).unwrap();
        let a = evolve(&u0, &solver).unwrap();
        let b = evolve(&u0, &solver).unwrap();
        for ((_, fa), (_, fb)) in a.snapshots.iter().zip(&b.snapshots) {
            assert_eq!(fa.samples(), fb.samples());
        }
    }

    #[test]
    fn cell_norms_start_exact_and_obey_the_triangle() {
        let cfg = ExperimentConfig {
            n_list: vec![3],
            t0: 0.05,
            ..ExperimentConfig::default()
        };
        let cell = run_cell(&cfg, 3, RunScope::Full).unwrap();
        assert!(cell.flagged.is_none());

        let first = &cell.rows[0];
        assert_eq!(first.t, 0.0);
        assert_eq!(first.lemma_u, Some(0.0));
        assert_eq!(first.lemma_v, Some(0.0));
        let d0 = first.delta.unwrap();
        assert!((d0 - cell.delta0).abs() <= 1e-12 * cell.delta0);

        // delta <= ||u - u0|| + ||u0 - v0|| + ||v - v0||, with the last
        // term bounded by the drift-corrected norm plus t ||V0||.
        let part = build_partition();
        let params = SequenceParams::new(3, cfg.idx, cell.grid).unwrap();
        let (_, v0) = initial_pair(&params);
        let drift_norm = besov_norm(&drift_term(&v0).unwrap(), &cfg.idx, &part).unwrap();
        for row in &cell.rows {
            let bound = row.lemma_u.unwrap()
                + cell.delta0
                + row.lemma_v.unwrap()
                + row.t * drift_norm;
            assert!(
                row.delta.unwrap() <= bound * (1.0 + 1e-9) + 1e-18,
                "t = {}: {} > {bound}",
                row.t,
                row.delta.unwrap()
            );
        }
    }

    #[test]
    fn report_rows_are_sorted_finite_and_nonnegative() {
        let cfg = ExperimentConfig {
            n_list: vec![3, 4],
            t0: 0.02,
            ..ExperimentConfig::default()
        };
        let report = run_separation(&cfg).unwrap();
        assert_eq!(report.rows.len(), 2 * cfg.sample_times().len());
        let mut last = (0u32, -1.0f64);
        for row in &report.rows {
            assert!((row.n, row.t) > last, "rows out of order");
            last = (row.n, row.t);
            for v in [
                row.t, row.delta0, row.delta, row.lemma_u, row.lemma_v, row.rl_value, row.dt,
            ] {
                assert!(v.is_finite() && v >= 0.0, "bad entry {v}");
            }
        }
        assert!(report.summary.besov_growth_max >= 1.0);
        assert!(!report.has_flags());
    }
}

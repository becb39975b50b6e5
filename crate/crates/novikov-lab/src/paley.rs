//! Dyadic frequency decomposition and discrete Besov norms.
//!
//! The partition pair `(chi, varphi)` is built from a C-infinity
//! smoothstep: `chi` equals 1 inside radius 3/4, vanishes outside 4/3, and
//! `varphi(xi) = chi(xi/2) - chi(xi)`. The telescoping makes
//! `chi(xi) + sum_{j>=0} varphi(2^-j xi) = 1` exact, and `varphi` is
//! identically 1 on `4/3 <= |xi| <= 3/2`.

use log::warn;

use crate::error::SpectralError;
use crate::field::{Field, LpExponent};
use crate::grid::GridSpec;
use crate::spectral::{Multiplier, Spectrum};

/// `exp(-1/t)` blend: 0 for `t <= 0`, 1 for `t >= 1`, C-infinity in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// The radial cutoff pair generating the dyadic blocks.
#[derive(Debug, Clone, Copy, Default)]
pub struct DyadicPartition {
    _priv: (),
}

/// Constructs the standard partition profiles.
pub fn build_partition() -> DyadicPartition {
    DyadicPartition::default()
}

impl DyadicPartition {
    pub fn new() -> Self {
        Self::default()
    }

    /// Low-frequency profile: 1 on `|xi| <= 3/4`, 0 on `|xi| >= 4/3`.
    pub fn chi(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a <= 0.75 {
            1.0
        } else if a >= 4.0 / 3.0 {
            0.0
        } else {
            smooth_step((4.0 / 3.0 - a) / (4.0 / 3.0 - 0.75))
        }
    }

    /// Annular profile supported in `3/4 <= |xi| <= 8/3`.
    pub fn varphi(&self, xi: f64) -> f64 {
        self.chi(0.5 * xi) - self.chi(xi)
    }

    /// Symbol of the block `Delta_j` at frequency `xi`.
    pub fn block_symbol(&self, j: i32, xi: f64) -> f64 {
        if j < -1 {
            0.0
        } else if j == -1 {
            self.chi(xi)
        } else {
            self.varphi(xi * (-j as f64).exp2())
        }
    }
}

/// Besov indices `(s, p, r)`: regularity, integrability, summability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovIndex {
    pub s: f64,
    pub p: LpExponent,
    pub r: LpExponent,
}

impl BesovIndex {
    pub fn new(s: f64, p: LpExponent, r: LpExponent) -> Self {
        Self { s, p, r }
    }
}

/// Largest block index kept on a grid: the biggest `j` with
/// `(3/4) 2^j <= nyquist` (at least -1).
pub fn max_block_index(grid: &GridSpec) -> i32 {
    let mut j = -1;
    while 0.75 * ((j + 1) as f64).exp2() <= grid.nyquist() {
        j += 1;
    }
    j
}

/// Frequency-localized piece `Delta_j u`. Blocks below `j = -1` are
/// identically zero.
pub fn dyadic_block(u: &Field, j: i32, part: &DyadicPartition) -> Result<Field, SpectralError> {
    if j < -1 {
        return Ok(Field::zeros(*u.grid()));
    }
    block_multiplier(*u.grid(), j, part).apply(u)
}

fn block_multiplier(grid: GridSpec, j: i32, part: &DyadicPartition) -> Multiplier {
    Multiplier::from_real_symbol(grid, |xi| part.block_symbol(j, xi))
}

/// Low-frequency cut-off `S_j u`, the sum of blocks below `j`.
pub fn low_cutoff(u: &Field, j: i32, part: &DyadicPartition) -> Result<Field, SpectralError> {
    let grid = *u.grid();
    if j <= -1 {
        return Ok(Field::zeros(grid));
    }
    let symbol = move |xi: f64| -> f64 { (-1..j).map(|jp| part.block_symbol(jp, xi)).sum() };
    Multiplier::from_real_symbol(grid, symbol).apply(u)
}

/// Per-block Lp norms `(j, ||Delta_j u||_p)` for `j = -1 ..= j_max`.
pub fn block_profile(
    u: &Field,
    p: LpExponent,
    part: &DyadicPartition,
) -> Result<Vec<(i32, f64)>, SpectralError> {
    let spec = u.to_spectral();
    block_profile_spectral(&spec, p, part)
}

fn block_profile_spectral(
    spec: &Spectrum,
    p: LpExponent,
    part: &DyadicPartition,
) -> Result<Vec<(i32, f64)>, SpectralError> {
    let grid = *spec.grid();
    let scale = spec.amplitude_bound();
    let jmax = max_block_index(&grid);
    let mut rows = Vec::with_capacity((jmax + 2) as usize);
    for j in -1..=jmax {
        let block = block_multiplier(grid, j, part)
            .apply_spectrum(spec)?
            .to_physical_checked_against(scale)?;
        rows.push((j, block.lp_norm(p)));
    }
    Ok(rows)
}

/// Besov norm decomposition: the aggregated value plus the per-block
/// weighted contributions it was built from.
#[derive(Debug, Clone)]
pub struct BesovDetail {
    pub value: f64,
    /// Rows `(j, ||Delta_j u||_p, 2^(j s) ||Delta_j u||_p)`.
    pub blocks: Vec<(i32, f64, f64)>,
    /// Share of the top block in the aggregate; large values mean the
    /// field is not resolved on this grid.
    pub tail_fraction: f64,
}

impl BesovDetail {
    pub fn is_resolved(&self) -> bool {
        self.tail_fraction <= 1e-8
    }
}

/// Discrete Besov norm: `l^r` aggregation of `2^(j s) ||Delta_j u||_p`
/// over the blocks resolved on the grid. Logs a warning when the top
/// block carries more than 1e-8 of the total.
pub fn besov_norm(
    u: &Field,
    idx: &BesovIndex,
    part: &DyadicPartition,
) -> Result<f64, SpectralError> {
    Ok(besov_detail(u, idx, part)?.value)
}

pub fn besov_detail(
    u: &Field,
    idx: &BesovIndex,
    part: &DyadicPartition,
) -> Result<BesovDetail, SpectralError> {
    let spec = u.to_spectral();
    besov_detail_spectral(&spec, idx, part)
}

pub(crate) fn besov_detail_spectral(
    spec: &Spectrum,
    idx: &BesovIndex,
    part: &DyadicPartition,
) -> Result<BesovDetail, SpectralError> {
    let profile = block_profile_spectral(spec, idx.p, part)?;
    let blocks: Vec<(i32, f64, f64)> = profile
        .into_iter()
        .map(|(j, lp)| (j, lp, (j as f64 * idx.s).exp2() * lp))
        .collect();
    let value = if idx.r.is_infinite() {
        blocks.iter().fold(0.0_f64, |m, b| m.max(b.2))
    } else {
        let rv = idx.r.value();
        let sum: f64 = blocks.iter().map(|b| b.2.powf(rv)).sum();
        sum.powf(1.0 / rv)
    };
    let top = blocks.last().map(|b| b.2).unwrap_or(0.0);
    let tail_fraction = if value > 0.0 { top / value } else { 0.0 };
    let detail = BesovDetail {
        value,
        blocks,
        tail_fraction,
    };
    if !detail.is_resolved() {
        warn!(
            "Besov norm under-resolved: top block carries {:.3e} of the total on {}",
            detail.tail_fraction,
            spec.grid()
        );
    }
    Ok(detail)
}

/// Max partition-of-unity defect `|chi(xi) + sum_j varphi(2^-j xi) - 1|`
/// over `count` quasi-uniform sample points in `[0, xi_max]`, summing
/// blocks `0 ..= j_top`.
pub fn partition_unity_error(
    part: &DyadicPartition,
    count: usize,
    xi_max: f64,
    j_top: i32,
) -> f64 {
    let golden = 0.618_033_988_749_894_9_f64;
    let mut worst = 0.0_f64;
    for i in 0..count {
        let frac = (i as f64 * golden).fract();
        let xi = frac * xi_max;
        let sum: f64 = part.chi(xi)
            + (0..=j_top)
                .map(|j| part.varphi(xi * (-j as f64).exp2()))
                .sum::<f64>();
        worst = worst.max((sum - 1.0).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn profile_plateaus() {
        let p = build_partition();
        assert_eq!(p.chi(0.0), 1.0);
        assert_eq!(p.chi(0.75), 1.0);
        assert_eq!(p.chi(2.0), 0.0);
        assert_eq!(p.varphi(17.0 / 12.0), 1.0);
        assert_eq!(p.varphi(4.0 / 3.0), 1.0);
        assert_eq!(p.varphi(1.5), 1.0);
        assert_eq!(p.varphi(0.5), 0.0);
        assert_eq!(p.varphi(3.0), 0.0);
        // Valued in [0, 1] across the transition.
        for i in 0..1000 {
            let xi = 3.0 * i as f64 / 1000.0;
            let c = p.chi(xi);
            let v = p.varphi(xi);
            assert!((0.0..=1.0).contains(&c));
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn unity_defect_is_tiny() {
        let p = build_partition();
        assert!(partition_unity_error(&p, 1000, 1.0e5, 20) < 1e-10);
    }

    #[test]
    fn separated_scales_have_disjoint_support() {
        let p = build_partition();
        for i in 0..2000 {
            let xi = 1.0e4 * (i as f64 * 0.618_033_988_749_894_9).fract();
            for j in 0..10 {
                for jp in (j + 2)..12 {
                    let a = p.varphi(xi * (-j as f64).exp2());
                    let b = p.varphi(xi * (-jp as f64).exp2());
                    assert!(a * b == 0.0, "xi={xi} j={j} j'={jp}");
                }
            }
        }
    }

    #[test]
    fn low_block_keeps_constants() {
        let g = GridSpec::new(2.0 * PI, 64).unwrap();
        let p = build_partition();
        let c = Field::constant(g, 3.25);
        let b = dyadic_block(&c, -1, &p).unwrap();
        for v in b.samples() {
            assert!((v - 3.25).abs() < 1e-12);
        }
        assert!(dyadic_block(&c, -3, &p).unwrap().linf() == 0.0);
    }

    #[test]
    fn cutoff_definitions() {
        let g = GridSpec::new(2.0 * PI, 128).unwrap();
        let p = build_partition();
        let u = Field::from_fn(g, |x| x.sin() + 0.5 * (9.0 * x).cos() + 0.25);
        let s0 = low_cutoff(&u, 0, &p).unwrap();
        let d = dyadic_block(&u, -1, &p).unwrap();
        for (a, b) in s0.samples().iter().zip(d.samples()) {
            assert!((a - b).abs() < 1e-13);
        }
        // S_j -> u once every mode is below (3/4) 2^(j-1).
        let sj = low_cutoff(&u, 6, &p).unwrap();
        let scale = u.linf();
        for (a, b) in sj.samples().iter().zip(u.samples()) {
            assert!((a - b).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn single_block_norm_weighting() {
        // A pure tone near 2^4 lands in block 4 alone; every r gives the
        // same single-term aggregate.
        let g = GridSpec::new(2.0 * PI, 256).unwrap();
        let p = build_partition();
        let u = Field::from_fn(g, |x| (22.0 * x).sin());
        for (s, r) in [(0.5, 1.0), (2.0, 2.0), (1.0, f64::INFINITY)] {
            let idx = BesovIndex::new(s, LpExponent::TWO, LpExponent::new(r).unwrap());
            let norm = besov_norm(&u, &idx, &p).unwrap();
            let want = (4.0 * s).exp2() * u.lp_norm(LpExponent::TWO);
            assert!(
                (norm - want).abs() < 1e-10 * want,
                "s={s} r={r}: {norm} vs {want}"
            );
        }
    }

    #[test]
    fn besov_monotone_in_regularity_above_low_block() {
        // The weight 2^(j s) is nondecreasing in s for every block j >= 0,
        // so the norm is monotone in s once the low block is empty. (It
        // cannot be monotone in general: the j = -1 weight is 2^(-s), and
        // a constant field has norm 2^(-s) |c| L^(1/p).)
        let g = GridSpec::new(2.0 * PI, 256).unwrap();
        let p = build_partition();
        let u = Field::from_fn(g, |x| (3.0 * x).sin() + 0.3 * (21.0 * x).cos());
        let mut last = 0.0;
        for i in 0..8 {
            let s = -1.0 + i as f64 * 0.75;
            let idx = BesovIndex::new(s, LpExponent::TWO, LpExponent::TWO);
            let v = besov_norm(&u, &idx, &p).unwrap();
            assert!(v >= last, "s = {s}: {v} < {last}");
            last = v;
        }

        let c = Field::constant(g, 2.0);
        for s in [0.0, 1.0, 2.0] {
            let idx = BesovIndex::new(s, LpExponent::TWO, LpExponent::TWO);
            let v = besov_norm(&c, &idx, &p).unwrap();
            let want = (-s).exp2() * 2.0 * (2.0 * PI).sqrt();
            assert!((v - want).abs() < 1e-10 * want);
        }
    }

    #[test]
    fn marginally_resolved_fields_are_reported() {
        let g = GridSpec::new(2.0 * PI, 64).unwrap();
        let p = build_partition();
        let idx = BesovIndex::new(1.0, LpExponent::TWO, LpExponent::TWO);
        let near_nyquist = Field::from_fn(g, |x| (28.0 * x).cos());
        let detail = besov_detail(&near_nyquist, &idx, &p).unwrap();
        assert!(!detail.is_resolved());
        let smooth = Field::from_fn(g, |x| (2.0 * x).cos());
        assert!(besov_detail(&smooth, &idx, &p).unwrap().is_resolved());
    }

    #[test]
    fn partition_sums_to_identity_on_grid() {
        let g = GridSpec::new(2.0 * PI, 256).unwrap();
        let p = build_partition();
        let u = Field::from_fn(g, |x| (100.0 * x).cos() + x.sin() - 0.4);
        let mut acc = Field::zeros(g);
        for j in -1..=max_block_index(&g) {
            acc = &acc + &dyadic_block(&u, j, &p).unwrap();
        }
        let scale = u.lp_norm(LpExponent::TWO);
        let diff = (&acc - &u).lp_norm(LpExponent::TWO);
        assert!(diff < 1e-10 * scale, "defect {diff}");
    }
}

//! Report types and their on-disk formats.
//!
//! The separation CSV has the fixed header
//! `n,t,delta0,delta,lemma_u,lemma_v,rl_value,s,p,r,N,L,dt`; floats are
//! printed with Rust's shortest round-trip formatting, so parsing the file
//! back reproduces the numbers bit for bit. The fitted constants go into a
//! JSON-like plain-text block written next to the CSV
//! (`<stem>.summary.txt`).
//!
//! Trajectories serialize to a header-less CSV (rows `t,u_0,...,u_{N-1}`)
//! and to a little-endian binary: magic `NVLB`, version u32, point count
//! u64, domain length f64, snapshot count u64, then per snapshot the time
//! f64 followed by the raw samples.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::novikov::Trajectory;
use crate::paley::BesovIndex;

/// One `(n, t)` cell of the separation experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: u32,
    pub t: f64,
    /// Initial distance between the paired data.
    pub delta0: f64,
    /// Distance between the evolved states at `t`.
    pub delta: f64,
    /// Deviation of the first state from its data.
    pub lemma_u: f64,
    /// Drift-corrected deviation of the second state.
    pub lemma_v: f64,
    /// Normalized oscillatory norm driving the lower bound.
    pub rl_value: f64,
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub grid_points: usize,
    pub length: f64,
    /// First accepted time step of the cell.
    pub dt: f64,
}

pub const REPORT_HEADER: &str = "n,t,delta0,delta,lemma_u,lemma_v,rl_value,s,p,r,N,L,dt";

/// Per-index lemma-style fit: sup over time of the deviation norm.
#[derive(Debug, Clone)]
pub struct SupRow {
    pub n: u32,
    pub sup: f64,
}

/// Per-index quadratic fit of the drift-corrected deviation.
#[derive(Debug, Clone)]
pub struct QuadFitRow {
    pub n: u32,
    pub intercept: f64,
    pub curvature: f64,
    pub rms_residual: f64,
    pub endpoint: f64,
}

/// Per-index separation rates.
#[derive(Debug, Clone)]
pub struct RateRow {
    pub n: u32,
    /// `min_t delta(n,t)/t` over the late-time window.
    pub rate_min: f64,
    /// Same, after removing the persistent initial-distance component
    /// in quadrature: `sqrt(max(delta^2 - delta0^2, 0))/t`.
    pub excess_rate_min: f64,
}

/// Fitted constants and slopes accompanying the row table.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub delta0_slope: f64,
    pub lemma_u_sup: Vec<SupRow>,
    pub lemma_u_slope: f64,
    pub lemma_v_fits: Vec<QuadFitRow>,
    pub rates: Vec<RateRow>,
    pub rl_values: Vec<(u32, f64)>,
    pub rl_limit: f64,
    /// Largest observed `sup_t ||state(t)|| / ||state(0)||` in the
    /// experiment norm, across both evolutions and all cells.
    pub besov_growth_max: f64,
    pub flagged: Vec<(u32, String)>,
}

/// Full outcome of a separation run.
#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub index: BesovIndex,
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
}

impl SeparationReport {
    pub fn has_flags(&self) -> bool {
        !self.summary.flagged.is_empty()
    }
}

fn write_row(out: &mut String, row: &ReportRow) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        row.n,
        row.t,
        row.delta0,
        row.delta,
        row.lemma_u,
        row.lemma_v,
        row.rl_value,
        row.s,
        row.p,
        row.r,
        row.grid_points,
        row.length,
        row.dt
    );
}

/// Renders the row table as CSV text (header always present).
pub fn report_csv(rep: &SeparationReport) -> String {
    let mut out = String::new();
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for row in &rep.rows {
        write_row(&mut out, row);
    }
    out
}

/// Renders the summary block.
pub fn summary_text(rep: &SeparationReport) -> String {
    let mut out = String::new();
    let s = &rep.summary;
    let _ = writeln!(out, "{{");
    let _ = writeln!(
        out,
        "  index: {{ s: {}, p: {}, r: {} }},",
        rep.index.s, rep.index.p, rep.index.r
    );
    let _ = writeln!(out, "  delta0_slope: {},", s.delta0_slope);
    let _ = writeln!(out, "  lemma_u_slope: {},", s.lemma_u_slope);
    let _ = writeln!(out, "  lemma_u_sup: [");
    for row in &s.lemma_u_sup {
        let _ = writeln!(out, "    {{ n: {}, sup: {} }},", row.n, row.sup);
    }
    let _ = writeln!(out, "  ],");
    let _ = writeln!(out, "  lemma_v_fits: [");
    for f in &s.lemma_v_fits {
        let _ = writeln!(
            out,
            "    {{ n: {}, intercept: {}, curvature: {}, rms_residual: {}, endpoint: {} }},",
            f.n, f.intercept, f.curvature, f.rms_residual, f.endpoint
        );
    }
    let _ = writeln!(out, "  ],");
    let _ = writeln!(out, "  separation_rates: [");
    for r in &s.rates {
        let _ = writeln!(
            out,
            "    {{ n: {}, rate_min: {}, excess_rate_min: {} }},",
            r.n, r.rate_min, r.excess_rate_min
        );
    }
    let _ = writeln!(out, "  ],");
    let _ = writeln!(out, "  rl_values: [");
    for (n, v) in &s.rl_values {
        let _ = writeln!(out, "    {{ n: {n}, value: {v} }},");
    }
    let _ = writeln!(out, "  ],");
    let _ = writeln!(out, "  rl_limit: {},", s.rl_limit);
    let _ = writeln!(out, "  besov_growth_max: {},", s.besov_growth_max);
    let _ = writeln!(out, "  flagged: [");
    for (n, reason) in &s.flagged {
        let _ = writeln!(out, "    {{ n: {n}, reason: {reason:?} }},");
    }
    let _ = writeln!(out, "  ],");
    let _ = writeln!(out, "}}");
    out
}

/// Writes the CSV at `path` and the summary block next to it.
pub fn emit_report(rep: &SeparationReport, path: &Path) -> io::Result<PathBuf> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, report_csv(rep))?;
    let summary_path = path.with_extension("summary.txt");
    fs::write(&summary_path, summary_text(rep))?;
    Ok(summary_path)
}

/// Parses a separation CSV produced by [`emit_report`].
pub fn parse_report_csv(text: &str) -> io::Result<Vec<ReportRow>> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == REPORT_HEADER => {}
        other => return Err(bad(format!("unexpected header {other:?}"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 13 {
            return Err(bad(format!("row {}: expected 13 columns", i + 2)));
        }
        let f = |k: usize| -> io::Result<f64> {
            cols[k]
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}: column {}: {e}", i + 2, k)))
        };
        rows.push(ReportRow {
            n: cols[0]
                .parse()
                .map_err(|e| bad(format!("row {}: n: {e}", i + 2)))?,
            t: f(1)?,
            delta0: f(2)?,
            delta: f(3)?,
            lemma_u: f(4)?,
            lemma_v: f(5)?,
            rl_value: f(6)?,
            s: f(7)?,
            p: f(8)?,
            r: f(9)?,
            grid_points: cols[10]
                .parse()
                .map_err(|e| bad(format!("row {}: N: {e}", i + 2)))?,
            length: f(11)?,
            dt: f(12)?,
        });
    }
    Ok(rows)
}

/// Writes trajectory snapshots as rows `t,u_0,...,u_{N-1}`.
pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> io::Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    for (t, field) in &traj.snapshots {
        write!(w, "{t}")?;
        for v in field.samples() {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub const TRAJECTORY_MAGIC: &[u8; 4] = b"NVLB";

/// Writes the compact binary trajectory format described in the module
/// docs.
pub fn write_trajectory_binary(traj: &Trajectory, path: &Path) -> io::Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(TRAJECTORY_MAGIC)?;
    w.write_all(&1u32.to_le_bytes())?;
    let (points, length) = match traj.snapshots.first() {
        Some((_, f)) => (f.grid().points() as u64, f.grid().length()),
        None => (0, 0.0),
    };
    w.write_all(&points.to_le_bytes())?;
    w.write_all(&length.to_le_bytes())?;
    w.write_all(&(traj.snapshots.len() as u64).to_le_bytes())?;
    for (t, field) in &traj.snapshots {
        w.write_all(&t.to_le_bytes())?;
        for v in field.samples() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::LpExponent;

    fn sample_report() -> SeparationReport {
        SeparationReport {
            index: BesovIndex::new(2.0, LpExponent::TWO, LpExponent::TWO),
            rows: vec![ReportRow {
                n: 4,
                t: 0.016666666666666666,
                delta0: 0.02143297,
                delta: 0.0214329912,
                lemma_u: 3.3e-5,
                lemma_v: 1.7e-6,
                rl_value: 0.00287,
                s: 2.0,
                p: 2.0,
                r: 2.0,
                grid_points: 1 << 15,
                length: 256.0 * std::f64::consts::PI,
                dt: 1.0 / 81.0,
            }],
            summary: Summary::default(),
        }
    }

    #[test]
    fn header_is_byte_exact() {
        let rep = SeparationReport {
            rows: vec![],
            ..sample_report()
        };
        let csv = report_csv(&rep);
        assert_eq!(csv, format!("{REPORT_HEADER}\n"));
    }

    #[test]
    fn roundtrip_preserves_numbers_exactly() {
        let rep = sample_report();
        let parsed = parse_report_csv(&report_csv(&rep)).unwrap();
        assert_eq!(parsed, rep.rows);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(parse_report_csv("a,b,c\n1,2,3\n").is_err());
    }
}

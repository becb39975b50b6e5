//! Experiment orchestration: configuration, runners, and report output.

pub mod config;
pub mod experiments;
pub mod fit;
pub mod report;

pub use config::{parse_config, ConfigError, ExperimentConfig, SAMPLE_COUNT};
pub use experiments::{
    check_lemma_u, check_lemma_v, check_rl_limit, run_cell, run_cells, run_separation,
    CellOutcome, CellRow, HarnessError, LemmaUReport, LemmaURow, LemmaVReport, LemmaVRow,
    RlReport, RunScope,
};
pub use report::{
    emit_report, parse_report_csv, report_csv, summary_text, write_trajectory_binary,
    write_trajectory_csv, QuadFitRow, RateRow, ReportRow, SeparationReport, Summary, SupRow,
    REPORT_HEADER,
};

//! Command-line front end for the experiment harness.
//!
//! Exit codes: 0 on success, 1 on configuration or I/O errors, 2 when a
//! run finished but flagged at least one cell.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use novikov_lab::harness::{
    check_lemma_u, check_lemma_v, check_rl_limit, emit_report, parse_config, run_separation,
    write_trajectory_binary, write_trajectory_csv, ExperimentConfig,
};
use novikov_lab::novikov::{evolve, SolverConfig};
use novikov_lab::{
    besov_detail, block_profile, build_partition, f_seq, g_seq, partition_unity_error,
    BesovIndex, Field, GridSpec, LpExponent, SequenceParams,
};

#[derive(Parser)]
#[command(name = "novikov-lab", version, about = "Pseudo-spectral experiments for the Novikov equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the dyadic partition of unity on sampled frequencies.
    PartitionCheck {
        /// Number of sample frequencies.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Top of the sampled frequency range.
        #[arg(long, default_value_t = 1.0e5)]
        xi_max: f64,
        /// Highest dyadic scale included in the sum.
        #[arg(long, default_value_t = 20)]
        j_top: i32,
    },
    /// Besov norm and block profile of a sampled field read from CSV.
    Besov(BesovArgs),
    /// Build one data pair and print its norms and block profiles.
    Sequence(SequenceArgs),
    /// Evolve the first configured cell's data and dump the trajectory.
    Evolve(ConfigArg),
    /// Full paired-evolution separation experiment.
    Separation(ConfigArg),
    /// Deviation-from-data check (first state only).
    LemmaU(ConfigArg),
    /// Drift-corrected deviation check (second state only).
    LemmaV(ConfigArg),
    /// Oscillatory-norm convergence check (no evolutions).
    RlLimit(ConfigArg),
}

#[derive(Args)]
struct BesovArgs {
    /// CSV with one sample value per row (optional `u` header).
    input: PathBuf,
    #[arg(long)]
    s: f64,
    /// Integrability exponent (number or `inf`).
    #[arg(long, default_value = "2")]
    p: String,
    /// Summability exponent (number or `inf`).
    #[arg(long, default_value = "2")]
    r: String,
    /// Domain length of the sampled field.
    #[arg(long)]
    length: f64,
}

#[derive(Args)]
struct SequenceArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 2.0)]
    s: f64,
    #[arg(long, default_value = "2")]
    p: String,
    #[arg(long, default_value = "2")]
    r: String,
    /// Domain length.
    #[arg(long, default_value_t = 256.0 * std::f64::consts::PI)]
    length: f64,
    /// Exponent offset of the grid policy `N = 2^(n + offset)`.
    #[arg(long, default_value_t = 11)]
    n_policy: u32,
    /// Write the sampled pair to this CSV (`x,f,g` columns).
    #[arg(long)]
    emit_field: Option<PathBuf>,
}

#[derive(Args)]
struct ConfigArg {
    /// Plain-text `key = value` experiment configuration.
    #[arg(long)]
    config: PathBuf,
}

fn parse_exponent(text: &str) -> Result<LpExponent> {
    let v = match text {
        "inf" | "infinity" => f64::INFINITY,
        other => other.parse::<f64>().context("exponent must be a number or `inf`")?,
    };
    LpExponent::new(v).map_err(|e| anyhow::anyhow!(e))
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg = parse_config(&text)?;
    Ok(cfg)
}

fn read_samples_csv(path: &PathBuf) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading field {}", path.display()))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || (i == 0 && trimmed == "u") {
            continue;
        }
        values.push(
            trimmed
                .parse::<f64>()
                .with_context(|| format!("line {}: expected a number", i + 1))?,
        );
    }
    Ok(values)
}

fn print_profile(rows: &[(i32, f64)]) {
    println!("j,norm");
    for (j, norm) in rows {
        println!("{j},{norm}");
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::PartitionCheck {
            samples,
            xi_max,
            j_top,
        } => {
            let part = build_partition();
            let err = partition_unity_error(&part, samples, xi_max, j_top);
            println!("partition unity defect: {err:.3e} over {samples} samples in [0, {xi_max}]");
            if err < 1e-10 {
                Ok(ExitCode::SUCCESS)
            } else {
                bail!("partition defect {err:.3e} exceeds 1e-10");
            }
        }
        Command::Besov(args) => {
            let samples = read_samples_csv(&args.input)?;
            let grid = GridSpec::new(args.length, samples.len())?;
            let field = Field::from_samples(grid, samples)?;
            let idx = BesovIndex::new(args.s, parse_exponent(&args.p)?, parse_exponent(&args.r)?);
            let part = build_partition();
            let detail = besov_detail(&field, &idx, &part)?;
            println!(
                "besov_norm = {} (s = {}, p = {}, r = {})",
                detail.value, idx.s, idx.p, idx.r
            );
            if !detail.is_resolved() {
                eprintln!(
                    "warning: top block holds {:.3e} of the norm; the field is marginally resolved",
                    detail.tail_fraction
                );
            }
            print_profile(
                &detail
                    .blocks
                    .iter()
                    .map(|(j, lp, _)| (*j, *lp))
                    .collect::<Vec<_>>(),
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sequence(args) => {
            let grid = GridSpec::new(args.length, 1usize << (args.n + args.n_policy))?;
            let idx = BesovIndex::new(args.s, parse_exponent(&args.p)?, parse_exponent(&args.r)?);
            let params = SequenceParams::new(args.n, idx, grid)?;
            let f = f_seq(&params);
            let g = g_seq(&params);
            let part = build_partition();
            let fd = besov_detail(&f, &idx, &part)?;
            let gd = besov_detail(&g, &idx, &part)?;
            println!("n = {}, carrier = {}, grid: {}", args.n, params.carrier(), grid);
            println!("packet besov_norm     = {}", fd.value);
            println!("companion besov_norm  = {}", gd.value);
            println!("packet block profile:");
            print_profile(&block_profile(&f, idx.p, &part)?);
            println!("companion block profile:");
            print_profile(&block_profile(&g, idx.p, &part)?);
            if let Some(path) = args.emit_field {
                let mut out = String::from("x,f,g\n");
                for j in 0..grid.points() {
                    out.push_str(&format!(
                        "{},{},{}\n",
                        grid.node(j),
                        f.samples()[j],
                        g.samples()[j]
                    ));
                }
                fs::write(&path, out)
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("wrote samples to {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Evolve(arg) => {
            let cfg = load_config(&arg.config)?;
            let n = cfg.n_list[0];
            let grid = GridSpec::new(cfg.length, cfg.grid_points(n))?;
            let params = SequenceParams::new(n, cfg.idx, grid)?;
            let u0 = f_seq(&params);
            let solver = SolverConfig::new(cfg.t0, cfg.sample_times())
                .and_then(|c| c.cfl(cfg.cfl))
                .map_err(|e| anyhow::anyhow!(e))?;
            let traj = evolve(&u0, &solver).map_err(|e| anyhow::anyhow!(e.to_string()))?;
            fs::create_dir_all(&cfg.out_dir)?;
            let csv = cfg.out_dir.join(format!("trajectory_n{n}.csv"));
            let bin = cfg.out_dir.join(format!("trajectory_n{n}.bin"));
            write_trajectory_csv(&traj, &csv)?;
            write_trajectory_binary(&traj, &bin)?;
            println!(
                "evolved n = {n} to T = {} ({} snapshots, {} steps); wrote {} and {}",
                cfg.t0,
                traj.snapshots.len(),
                traj.diagnostics.len() - 1,
                csv.display(),
                bin.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Separation(arg) => {
            let cfg = load_config(&arg.config)?;
            let report = run_separation(&cfg)?;
            fs::create_dir_all(&cfg.out_dir)?;
            let csv = cfg.out_dir.join("separation.csv");
            let summary = emit_report(&report, &csv)?;
            println!("wrote {} and {}", csv.display(), summary.display());
            print!("{}", novikov_lab::harness::summary_text(&report));
            if report.has_flags() {
                eprintln!("{} cell(s) flagged", report.summary.flagged.len());
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::LemmaU(arg) => {
            let cfg = load_config(&arg.config)?;
            let report = check_lemma_u(&cfg)?;
            fs::create_dir_all(&cfg.out_dir)?;
            let path = cfg.out_dir.join("lemma_u.csv");
            let mut out = String::from("n,t,deviation\n");
            for row in &report.rows {
                out.push_str(&format!("{},{},{}\n", row.n, row.t, row.deviation));
            }
            fs::write(&path, out)?;
            println!("decay exponent floor: {}", report.epsilon);
            for sup in &report.sups {
                println!("n = {}: sup deviation = {}", sup.n, sup.sup);
            }
            println!("fitted log2 slope: {}", report.slope);
            println!("wrote {}", path.display());
            if report.flagged.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("{} cell(s) flagged", report.flagged.len());
                Ok(ExitCode::from(2))
            }
        }
        Command::LemmaV(arg) => {
            let cfg = load_config(&arg.config)?;
            let report = check_lemma_v(&cfg)?;
            fs::create_dir_all(&cfg.out_dir)?;
            let path = cfg.out_dir.join("lemma_v.csv");
            let mut out = String::from("n,t,corrected_deviation\n");
            for row in &report.rows {
                out.push_str(&format!("{},{},{}\n", row.n, row.t, row.corrected));
            }
            fs::write(&path, out)?;
            for f in &report.fits {
                println!(
                    "n = {}: intercept = {}, curvature = {}, rms residual = {} (endpoint {})",
                    f.n, f.intercept, f.curvature, f.rms_residual, f.endpoint
                );
            }
            println!("wrote {}", path.display());
            if report.flagged.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("{} cell(s) flagged", report.flagged.len());
                Ok(ExitCode::from(2))
            }
        }
        Command::RlLimit(arg) => {
            let cfg = load_config(&arg.config)?;
            let report = check_rl_limit(&cfg)?;
            fs::create_dir_all(&cfg.out_dir)?;
            let path = cfg.out_dir.join("rl_limit.csv");
            let mut out = String::from("n,value\n");
            for (n, v) in &report.rows {
                out.push_str(&format!("{n},{v}\n"));
            }
            fs::write(&path, out)?;
            println!("oscillation factor: {}", report.factor);
            println!("limit value: {}", report.limit);
            for (n, v) in &report.rows {
                println!(
                    "n = {n}: value = {v} (relative gap {:.4})",
                    (v - report.limit).abs() / report.limit
                );
            }
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

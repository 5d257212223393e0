use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use mdi_bench::config::ExperimentConfig;
use mdi_bench::coupled::run_coupled_plot;
use mdi_bench::output::{metadata, output_path, write_csv, write_json};
use mdi_bench::radius_report::run_radius_report;
use mdi_bench::sweep::{run_ber_sweep, BerRow};
use mdi_bench::trace_convert::{convert, generate};
use mdi_bench::{with_workers, BenchError, Result};

#[derive(Debug, Parser)]
#[command(name = "mdi-bench", version, about = "Monte-Carlo benchmarks for delta-Ising MIMO detection")]
struct Cli {
    /// Experiment configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Config override `section.key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// BER per SNR and detector.
    BerSweep,
    /// Paired per-instance metrics ranked by the first one.
    CoupledPlot,
    /// Run-time and wrong-prediction rates of the radius heuristics.
    RadiusReport,
    /// Convert a channel trace between binary and JSON, or synthesize one.
    TraceConvert {
        /// Trace to read (`.json` for JSON, anything else binary).
        #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
        input: Option<PathBuf>,
        /// Generate this many Rayleigh channels of the configured size.
        #[arg(long)]
        generate: Option<usize>,
        /// Destination (`.json` for JSON, anything else binary).
        output: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p, &cli.overrides)?,
        None => ExperimentConfig::parse("", &cli.overrides)?,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct SweepJson<'a> {
    version: &'static str,
    seed: u64,
    config_hash: String,
    rows: &'a [BerRow],
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::BerSweep => {
            let result = with_workers(cli.workers, || run_ber_sweep(&cfg))??;
            let meta = metadata(&cfg, "ber-sweep");
            write_csv(&output_path(&cfg, "ber_sweep.csv")?, &meta, &result.rows)?;
            let json = SweepJson {
                version: env!("CARGO_PKG_VERSION"),
                seed: cfg.seed,
                config_hash: cfg.hash(),
                rows: &result.rows,
            };
            write_json(&output_path(&cfg, "ber_sweep.json")?, &json)?;
            std::fs::write(output_path(&cfg, "config.toml")?, cfg.canonical())?;
            println!("{:>8}  {:<9} {:>12}  {:>10}  99.9% interval", "snr_db", "detector", "bits", "ber");
            for r in &result.rows {
                println!(
                    "{:>8}  {:<9} {:>12}  {:>10.3e}  [{:.3e}, {:.3e}]",
                    r.snr_db, r.detector, r.bits, r.ber, r.ci_low, r.ci_high
                );
            }
        }
        Command::CoupledPlot => {
            let points = with_workers(cli.workers, || run_coupled_plot(&cfg))??;
            let mut meta = metadata(&cfg, "coupled-plot");
            meta.push(format!("# metric_a: {}", cfg.coupled.metric_a));
            meta.push(format!("# metric_b: {}", cfg.coupled.metric_b));
            for p in &points {
                let n = p.a.len() as f64;
                let line = format!(
                    "snr_db {}: mean {} = {}, mean {} = {}",
                    p.snr_db,
                    cfg.coupled.metric_a,
                    p.a.iter().sum::<f64>() / n,
                    cfg.coupled.metric_b,
                    p.b.iter().sum::<f64>() / n
                );
                println!("{line}");
                meta.push(format!("# {line}"));
            }
            let records: Vec<_> = points.iter().flat_map(|p| p.records.iter()).collect();
            write_csv(&output_path(&cfg, "coupled_plot.csv")?, &meta, &records)?;
        }
        Command::RadiusReport => {
            let rows = with_workers(cli.workers, || run_radius_report(&cfg))??;
            let mut meta = metadata(&cfg, "radius-report");
            meta.push(format!("# guess: {:?}", cfg.radius_report.guess));
            write_csv(&output_path(&cfg, "radius_report.csv")?, &meta, &rows)?;
            for r in &rows {
                println!(
                    "{:>8}  {:<5} run-time {:6.2}%  wrong {:6.2}%",
                    r.snr_db, r.heuristic, r.run_time_pct, r.wrong_pct
                );
            }
        }
        Command::TraceConvert {
            input,
            generate: count,
            output,
        } => {
            let t = match (input, count) {
                (Some(i), _) => convert(i, output)?,
                (None, Some(n)) => {
                    cfg.validate(mdi_bench::config::Purpose::Sweep)?;
                    generate(&cfg, *n, output)?
                }
                (None, None) => return Err(BenchError::Config("trace-convert needs --input or --generate".into())),
            };
            println!(
                "wrote {} channels ({}x{}) to {}",
                t.header.count,
                t.header.nr,
                t.header.nt,
                output.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

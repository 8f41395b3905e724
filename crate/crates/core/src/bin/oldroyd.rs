use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use oldroyd::cli_io::config::parse_window;
use oldroyd::cli_io::sweep::{format_sweep, parse_values};
use oldroyd::cli_io::{self, ConfigMap, RunConfig, RunError, SimulateOptions};

/// Pseudo-spectral simulator and diagnostics for 2-D Oldroyd-B type models.
///
/// Exit codes: 0 success, 1 error, 2 blow-up suspected (BKM accumulator
/// accelerating), 3 CFL failure. Set OLDROYD_OUTPUT_ROOT to place relative
/// output directories under another root.
#[derive(Parser)]
#[command(name = "oldroyd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write series.csv, report.json, checkpoint.bin.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Continue from the checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Recompute accumulators and fits from a stored series.csv.
    Diagnose {
        #[arg(long)]
        series: PathBuf,
        /// Run configuration, for parameter-dependent checks.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Decay-fit window `t_lo:t_hi`.
        #[arg(long, value_parser = window)]
        window: Option<(f64, f64)>,
    },
    /// Run the configuration once per value of one numeric key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Fit the H1 decay exponent over a time window.
    Fit {
        #[arg(long)]
        series: PathBuf,
        #[arg(long, value_parser = window)]
        window: (f64, f64),
    },
}

fn window(s: &str) -> Result<(f64, f64), String> {
    parse_window(s).ok_or_else(|| format!("expected t_lo:t_hi with t_lo < t_hi, got `{s}`"))
}

fn run(cli: Cli) -> Result<u8, RunError> {
    match cli.command {
        Command::Simulate { config, resume } => {
            let cfg = RunConfig::from_file(&config)?;
            let out = cli_io::simulate(&cfg, SimulateOptions { resume })?;
            let r = &out.report;
            println!(
                "{}: {} steps to t = {} in {}",
                serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                r.steps_completed,
                r.t_final,
                out.output_dir.display()
            );
            if let Some(c) = &r.cfl_failure {
                eprintln!(
                    "CFL failure at step {}: dt = {} exceeds admissible {}",
                    c.step, c.dt, c.admissible
                );
            }
            Ok(out.exit_code())
        }
        Command::Diagnose {
            series,
            config,
            window,
        } => {
            let cfg = config.map(|p| RunConfig::from_file(&p)).transpose()?;
            let s = cli_io::diagnose(&series, cfg.as_ref(), window)?;
            println!("{}", serde_json::to_string_pretty(&s).expect("summary serializes"));
            Ok(if s.bkm_suspect { 2 } else { 0 })
        }
        Command::Sweep {
            config,
            axis,
            values,
        } => {
            let base = ConfigMap::from_file(&config)?;
            let rows = cli_io::sweep(&base, &axis, &parse_values(&values))?;
            print!("{}", format_sweep(&axis, &rows));
            Ok(0)
        }
        Command::Fit { series, window } => {
            let f = cli_io::fit(&series, window)?;
            println!("{}", serde_json::to_string_pretty(&f).expect("fit serializes"));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sse_cli::commands::{cmd_filter_report, cmd_gate_noise, cmd_run, cmd_spectrum, cmd_sweep_k, cmd_sweep_noise};
use sse_cli::output::{fmt_f64, fmt_opt, OutputDir};
use sse_cli::{CliError, CliResult, ExperimentConfig, ModeSpec};

#[derive(Parser)]
#[command(name = "sse", version, about = "Shadow subspace expansion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Replaces the shadow and noise seeds.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    /// Estimator mode: exact, gauss:<eps>, shadowvar:<Ns> or sampled:<Ns>.
    #[arg(long, global = true)]
    mode: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// One pipeline run: result JSON, spectrum and per-level energies.
    Run,
    /// Error against K over `sweep.k_values`.
    SweepK,
    /// Error against estimator noise over `sweep.noise_levels`.
    SweepNoise,
    /// Depolarizing gate noise at the fault rates `sweep.lambdas`.
    GateNoise,
    /// Overlap spectrum and the shot-noise bound.
    Spectrum,
    /// Operator ranking by two-dimensional energy gap.
    FilterReport,
}

fn load(cli: &Cli) -> CliResult<ExperimentConfig> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(mode) = &cli.mode {
        ModeSpec::parse(mode)?;
        cfg.estimator.mode = mode.clone();
    }
    if let Some(seed) = cli.seed_override {
        cfg.seeds.shadows = seed;
        cfg.seeds.noise = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    } else {
        cfg.output.dir = cfg.resolve(&cfg.output.dir.clone());
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> CliResult<()> {
    let cfg = load(cli)?;
    let mut out = OutputDir::create(&cfg.output.dir)?;
    match cli.command {
        Command::Run => {
            let r = cmd_run(&cfg, &mut out)?;
            println!("E_direct   {}", fmt_f64(r.e_direct));
            println!("E_sse      {}", fmt_f64(r.e_sse));
            println!("E_reported {}", fmt_f64(r.e_reported));
            println!("K {}  K_tilde {}  error {}", r.k, r.k_tilde, fmt_opt(r.error));
        }
        Command::SweepK => {
            let (_, summary) = cmd_sweep_k(&cfg, &mut out)?;
            for s in summary {
                println!("K {:>5}  median error {}  median K_tilde {}", s.level, fmt_opt(s.median_error), s.median_k_tilde);
            }
        }
        Command::SweepNoise => {
            let (summary, report) = cmd_sweep_noise(&cfg, &mut out)?;
            for s in summary {
                println!("level {}  median error {}  median K_tilde {}", fmt_f64(s.level), fmt_opt(s.median_error), s.median_k_tilde);
            }
            println!("log-log slope {}", fmt_opt(report.loglog_slope));
        }
        Command::GateNoise => {
            let (_, summary) = cmd_gate_noise(&cfg, &mut out)?;
            for s in summary {
                println!(
                    "lambda {}  median improvement {}  median K_tilde {} (unclamped {})",
                    fmt_f64(s.lambda),
                    fmt_f64(s.median_improvement),
                    s.median_k_tilde,
                    s.median_k_tilde_unclamped
                );
            }
        }
        Command::Spectrum => {
            let r = cmd_spectrum(&cfg, &mut out)?;
            println!("K {}  largest {}  above floor {}  negative {}", r.k, fmt_f64(r.largest), r.above_floor, r.negative);
            println!("bound {}", fmt_opt(r.bound));
        }
        Command::FilterReport => {
            let f = cmd_filter_report(&cfg, &mut out)?;
            println!("{} candidates, {} kept", f.basis_len(), f.k_kept);
        }
    }
    for p in out.written() {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use clap::{Parser, Subcommand};
use rarewave::commands;
use rarewave::config::ExperimentConfig;
use rarewave::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_VALIDATION: u8 = 2;
const EXIT_CHECK: u8 = 3;
const EXIT_BLOWUP: u8 = 4;

#[derive(Parser)]
#[command(
    name = "rarewave",
    about = "Planar 3-rarefaction wave laboratory for the compressible Navier-Stokes-Fourier system"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config file (sectioned key = value text)
    #[arg(long)]
    config: PathBuf,
    /// Output directory for reports, CSVs and field dumps
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for the numerical kernels
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify the wave construction: invariants, derivative identities, decay fits
    WaveCheck(Common),
    /// Run the perturbed Navier-Stokes-Fourier simulation around the smooth profile
    Simulate(Common),
    /// Fit Lp decay slopes of the profile derivatives against the predicted rates
    DecayStudy(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(&common.config)?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(n) = common.threads {
        cfg.threads = n;
    }
    let warnings = cfg.validate()?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::BlowUp { .. } => EXIT_BLOWUP,
        Error::Check(_) | Error::NotARarefaction { .. } => EXIT_CHECK,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.cmd {
        Cmd::WaveCheck(c) | Cmd::Simulate(c) | Cmd::DecayStudy(c) => c,
    };
    let cfg = match load(common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_for(&e).max(EXIT_VALIDATION));
        }
    };

    let result = match &cli.cmd {
        Cmd::WaveCheck(c) => commands::cmd_wave_check(&cfg, &c.out).map(|report| {
            print!("{}", report.render());
            report.passed()
        }),
        Cmd::Simulate(c) => commands::cmd_simulate(&cfg, &c.out).map(|out| {
            print!("{}", out.render());
            true
        }),
        Cmd::DecayStudy(c) => commands::cmd_decay_study(&cfg, &c.out).map(|study| {
            for r in &study.rows {
                println!(
                    "{:12} fitted {:+.4}  predicted {:+.4}  tol {:.3}",
                    r.label, r.fitted, r.predicted, r.within
                );
            }
            study.passed()
        }),
    };

    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

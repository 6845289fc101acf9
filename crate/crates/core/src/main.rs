use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use milac::harness::{emit_results, run_sweep, run_verify, ExperimentConfig, SweepKind};

/// MiLAC-aided MIMO channel estimation simulator.
#[derive(Parser)]
#[command(name = "milac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// NMSE versus SNR for each scheme.
    NmseSweep(Common),
    /// Online real-operation counts versus receive antennas.
    ComplexitySweep(Common),
    /// Per-chain PAPR of the transmitted training signals.
    PaprReport(Common),
    /// Fast invariant checks; exits 1 on any failure.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Inject a deliberate fault: none, admittance or multiplier.
        #[arg(long)]
        fault: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma list, e.g. `milac-ls,digital-mmse`.
    #[arg(long)]
    schemes: Option<String>,
    /// Comma list or `start:stop:step` in dB.
    #[arg(long)]
    snr: Option<String>,
    /// Comma list of `NTxNR` or `N`, e.g. `8x8,16`.
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// csv, svg or both.
    #[arg(long)]
    format: Option<String>,
    /// Add the 64x64 size to the NMSE sweep.
    #[arg(long)]
    long: bool,
}

fn build_config(
    kind: SweepKind,
    common: &Common,
    fault: Option<&str>,
) -> milac::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::defaults(kind);
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| milac::Error::Config {
            field: "config".into(),
            reason: format!("{}: {e}", path.display()),
        })?;
        cfg.apply_file(&text)?;
    }
    let overrides = [
        ("seed", common.seed.map(|v| v.to_string())),
        ("trials", common.trials.map(|v| v.to_string())),
        ("out", common.out.as_ref().map(|p| p.display().to_string())),
        ("schemes", common.schemes.clone()),
        ("snr", common.snr.clone()),
        ("size", common.size.clone()),
        ("workers", common.workers.map(|v| v.to_string())),
        ("format", common.format.clone()),
        ("fault", fault.map(str::to_string)),
    ];
    for (key, value) in overrides {
        if let Some(value) = value {
            cfg.set(key, &value)?;
        }
    }
    if common.long && !cfg.sizes.contains(&(64, 64)) {
        cfg.sizes.push((64, 64));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common, fault, stem) = match &cli.command {
        Command::NmseSweep(c) => (SweepKind::NmseVsSnr, c, None, "nmse_sweep"),
        Command::ComplexitySweep(c) => (SweepKind::ComplexityVsNrx, c, None, "complexity_sweep"),
        Command::PaprReport(c) => (SweepKind::Papr, c, None, "papr_report"),
        Command::Verify { common, fault } => {
            (SweepKind::Verify, common, fault.as_deref(), "verify")
        }
    };
    let cfg = match build_config(kind, common, fault) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };

    if kind == SweepKind::Verify {
        return match run_verify(&cfg) {
            Ok(report) => {
                println!("{report}");
                if report.all_passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("verify aborted: {e}");
                ExitCode::from(1)
            }
        };
    }

    let written =
        run_sweep(&cfg).and_then(|table| emit_results(&table, &cfg.out_dir, stem, cfg.format));
    match written {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

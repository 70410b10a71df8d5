use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fockqi_cli::{run, CliResult, RunConfig};

/// Quantum-illumination simulator for engineered non-Gaussian probes.
///
/// Settings come from defaults, then `--config`, then individual flags.
#[derive(Debug, Parser)]
#[command(name = "fockqi", version)]
struct Args {
    /// Figure preset (fig1a … fig12) or `all`.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory for CSV files.
    #[arg(long)]
    out: Option<String>,
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Squeezing parameter.
    #[arg(long)]
    r: Option<String>,
    /// Target reflectivity.
    #[arg(long)]
    kappa: Option<String>,
    /// Mean thermal background photons.
    #[arg(long)]
    nth: Option<String>,
    /// Transmissivity of the extra loss on the return mode (`none` to disable).
    #[arg(long)]
    eta: Option<String>,
    /// Fock cutoff per mode.
    #[arg(long)]
    nmax: Option<String>,
    /// Environment cutoff for the attenuator (`auto` by default).
    #[arg(long = "env-cutoff")]
    env_cutoff: Option<String>,
    /// Transmissivity grid: comma list or start:stop:count.
    #[arg(long = "T")]
    t_grid: Option<String>,
    /// Copy-count grid: comma list.
    #[arg(long = "K")]
    k_grid: Option<String>,
    /// Reflectivity grid for receiver presets.
    #[arg(long = "kappa-grid")]
    kappa_grid: Option<String>,
    /// Comma list of protocols (tmss, pa, ps, pc, nlpa1, nlpa2).
    #[arg(long)]
    protocols: Option<String>,
    /// Receiver scheme (dhd or photon_diff).
    #[arg(long)]
    scheme: Option<String>,
    /// Sweep parameter (T, kappa, K, eta, r).
    #[arg(long)]
    sweep: Option<String>,
    /// Sweep metric (entropy, success, q, p_error, exponent, gain, snr_db).
    #[arg(long)]
    metric: Option<String>,
    /// Sweep values: comma list or start:stop:count.
    #[arg(long)]
    grid: Option<String>,
    /// Photons used by each local operation (1 or 2).
    #[arg(long = "local-photons")]
    local_photons: Option<String>,
    /// Operating-point criterion (entropy or success).
    #[arg(long = "t-choice")]
    t_choice: Option<String>,
}

fn build_config(args: &Args) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    let overrides = [
        ("preset", &args.preset),
        ("out", &args.out),
        ("r", &args.r),
        ("kappa", &args.kappa),
        ("nth", &args.nth),
        ("eta", &args.eta),
        ("nmax", &args.nmax),
        ("env_cutoff", &args.env_cutoff),
        ("T", &args.t_grid),
        ("K", &args.k_grid),
        ("kappa_grid", &args.kappa_grid),
        ("protocols", &args.protocols),
        ("scheme", &args.scheme),
        ("sweep", &args.sweep),
        ("metric", &args.metric),
        ("grid", &args.grid),
        ("local_photons", &args.local_photons),
        ("t_choice", &args.t_choice),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result = build_config(&args).and_then(|cfg| run(&cfg));
    match result {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            for file in &report.files {
                println!("wrote {}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Command-line front end: configuration, figure presets and parameter
//! sweeps over the `fockqi` simulation library.

pub mod config;
pub mod error;
pub mod eval;
pub mod output;
pub mod presets;
pub mod sweep;

use std::path::PathBuf;

pub use config::RunConfig;
pub use error::{CliError, CliResult};

/// Files produced by one invocation, with a human-readable summary.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

/// Runs the sweep if one is configured, otherwise the preset(s).
pub fn run(cfg: &RunConfig) -> CliResult<RunReport> {
    cfg.validate()?;
    let mut report = RunReport::default();
    if cfg.sweep.is_some() {
        let table = sweep::run_sweep(cfg)?;
        let stem = sweep::sweep_file_stem(cfg).expect("sweep and metric are set");
        report.files.push(table.write(&cfg.out_dir, &stem)?);
        return Ok(report);
    }
    if cfg.preset == "custom" {
        return Err(CliError::usage("nothing to do: give --preset or --sweep"));
    }
    for name in presets::preset_names(&cfg.preset) {
        let out = presets::run_preset(&name, cfg)?;
        for (p, t) in &out.t_stars {
            report.summary.push(format!("{name}: T*[{p}] = {t}"));
        }
        report.files.push(out.table.write(&cfg.out_dir, &out.name)?);
    }
    Ok(report)
}

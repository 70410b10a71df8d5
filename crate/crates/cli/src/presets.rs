//! Named figure presets. Each preset writes one CSV named after itself.

use fockqi::receiver::Scheme;
use rayon::prelude::*;

use crate::config::{Protocol, RunConfig, TChoice};
use crate::error::{CliError, CliResult};
use crate::eval::{log10_p_error, p_error, t_star, table, Evaluator};
use crate::output::{Cell, Table};

pub const PRESETS: [&str; 17] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig3", "fig4a", "fig4b", "fig4c", "fig4d", "fig7a", "fig7b", "fig8",
    "fig9a", "fig9b", "fig11a", "fig11b", "fig12",
];

/// Loss applied to the engineered probes in the lossy presets when none is
/// configured.
pub const DEFAULT_PRESET_ETA: f64 = 0.1;

/// Copy count used by the receiver presets.
pub const RECEIVER_COPIES: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub struct PresetOutput {
    pub name: String,
    pub table: Table,
    /// Operating transmissivities used by the preset, if any.
    pub t_stars: Vec<(Protocol, f64)>,
}

fn with_locals(cfg: &RunConfig, photons: usize) -> RunConfig {
    RunConfig {
        local_photons: photons,
        ..cfg.clone()
    }
}

fn prefixed(prefix: &str, protocols: &[Protocol]) -> Vec<String> {
    protocols.iter().map(|p| format!("{prefix}_{p}")).collect()
}

fn t_table(cfg: &RunConfig, prefix: &str, protocols: &[Protocol], values: Vec<Vec<f64>>) -> Table {
    let mut header = vec!["T".to_string()];
    header.extend(prefixed(prefix, protocols));
    let mut out = Table::new(header);
    for (t, row) in cfg.t_grid.iter().zip(values) {
        let mut cells = vec![Cell::Real(*t)];
        cells.extend(row.into_iter().map(Cell::Real));
        out.push(cells);
    }
    out
}

fn entropy_table(cfg: &RunConfig, protocols: &[Protocol]) -> CliResult<Table> {
    let ev = Evaluator::new(cfg)?;
    let values = table(protocols, &cfg.t_grid, |p, t| ev.entropy(p, t))?;
    Ok(t_table(cfg, "EV", protocols, values))
}

fn success_table(cfg: &RunConfig, protocols: &[Protocol]) -> CliResult<Table> {
    let ev = Evaluator::new(cfg)?;
    let values = table(protocols, &cfg.t_grid, |p, t| ev.success(p, t))?;
    Ok(t_table(cfg, "P", protocols, values))
}

/// Operating points of every protocol that depends on `T`.
pub fn operating_points(ev: &Evaluator, protocols: &[Protocol], choice: TChoice, grid: &[f64]) -> CliResult<Vec<(Protocol, f64)>> {
    let mut out = Vec::new();
    for &p in protocols {
        if let Some(t) = t_star(ev, p, choice, grid)? {
            out.push((p, t));
        }
    }
    Ok(out)
}

fn t_of(points: &[(Protocol, f64)], p: Protocol) -> f64 {
    points.iter().find(|(q, _)| *q == p).map_or(0.0, |(_, t)| *t)
}

/// K-copy error curves `½Q^K`, also in log₁₀ form because the linear values
/// underflow at large K. Engineered probes see `probe_eta`; the TMSS
/// column sees `cfg.eta`.
fn error_curve_table(cfg: &RunConfig, engineered: &[Protocol], choice: TChoice, probe_eta: Option<f64>) -> CliResult<(Table, Vec<(Protocol, f64)>)> {
    let ev = Evaluator::with_params(cfg, cfg.r, cfg.kappa, probe_eta)?;
    let reference = Evaluator::with_params(cfg, cfg.r, cfg.kappa, cfg.eta)?;
    let points = operating_points(&ev, engineered, choice, &cfg.t_grid)?;
    let mut qs = engineered
        .par_iter()
        .map(|&p| ev.q(p, t_of(&points, p)))
        .collect::<CliResult<Vec<f64>>>()?;
    qs.push(reference.q(Protocol::Tmss, 0.0)?);

    let mut protocols = engineered.to_vec();
    protocols.push(Protocol::Tmss);
    let mut header = vec!["K".to_string()];
    header.extend(prefixed("perr", &protocols));
    header.extend(prefixed("log10_perr", &protocols));
    let mut out = Table::new(header);
    for &k in &cfg.k_grid {
        let mut row = vec![Cell::Int(k)];
        row.extend(qs.iter().map(|&q| Cell::Real(p_error(q, k))));
        row.extend(qs.iter().map(|&q| Cell::Real(log10_p_error(q, k))));
        out.push(row);
    }
    Ok((out, points))
}

/// Gain `G = ε_α / ε_TMSS` over the `T` grid; the reference exponent uses
/// `cfg.eta` while engineered probes see `probe_eta`.
fn gain_table(cfg: &RunConfig, protocols: &[Protocol], probe_eta: Option<f64>) -> CliResult<Table> {
    let ev = Evaluator::with_params(cfg, cfg.r, cfg.kappa, probe_eta)?;
    let reference = Evaluator::with_params(cfg, cfg.r, cfg.kappa, cfg.eta)?;
    let eps_ref = reference.exponent(Protocol::Tmss, 0.0)?;
    if !(eps_ref > 0.0) {
        return Err(CliError::usage("TMSS reference exponent vanishes; gain is undefined"));
    }
    let values = table(protocols, &cfg.t_grid, |p, t| Ok(ev.exponent(p, t)? / eps_ref))?;
    Ok(t_table(cfg, "G", protocols, values))
}

/// Receiver SNR (dB) over the κ grid at each protocol's operating point.
fn snr_table(cfg: &RunConfig, protocols: &[Protocol], scheme_of: impl Fn(Protocol) -> Scheme + Sync) -> CliResult<(Table, Vec<(Protocol, f64)>)> {
    let base = Evaluator::new(cfg)?;
    let points = operating_points(&base, protocols, cfg.t_choice, &cfg.t_grid)?;
    let rows = cfg
        .kappa_grid
        .par_iter()
        .map(|&kappa| {
            let ev = Evaluator::with_params(cfg, cfg.r, kappa, cfg.eta)?;
            protocols
                .iter()
                .map(|&p| {
                    Ok(ev
                        .receiver_stats(p, t_of(&points, p), scheme_of(p), RECEIVER_COPIES)?
                        .map_or(f64::NAN, |s| s.snr_db))
                })
                .collect::<CliResult<Vec<f64>>>()
        })
        .collect::<CliResult<Vec<Vec<f64>>>>()?;
    let mut header = vec!["kappa".to_string()];
    header.extend(prefixed("snr_db", protocols));
    let mut out = Table::new(header);
    for (kappa, row) in cfg.kappa_grid.iter().zip(rows) {
        let mut cells = vec![Cell::Real(*kappa)];
        cells.extend(row.into_iter().map(Cell::Real));
        out.push(cells);
    }
    Ok((out, points))
}

fn lossy_eta(cfg: &RunConfig) -> Option<f64> {
    Some(cfg.eta.unwrap_or(DEFAULT_PRESET_ETA))
}

/// Runs one named preset.
pub fn run_preset(name: &str, cfg: &RunConfig) -> CliResult<PresetOutput> {
    let one = with_locals(cfg, 1);
    let two = with_locals(cfg, 2);
    let locals_nlpa1 = [Protocol::Pa, Protocol::Ps, Protocol::Pc, Protocol::Nlpa1];
    let locals_nlpa2 = [Protocol::Pa, Protocol::Ps, Protocol::Pc, Protocol::Nlpa2];
    let gain_order = |nl: Protocol| [nl, Protocol::Pa, Protocol::Pc, Protocol::Ps];
    // Lossy presets keep the TMSS reference noiseless.
    let noiseless_two = RunConfig { eta: None, ..two.clone() };

    let (table, t_stars) = match name {
        "fig1a" => {
            let mut protos = locals_nlpa1.to_vec();
            protos.push(Protocol::Tmss);
            (entropy_table(&one, &protos)?, vec![])
        }
        "fig1b" => (success_table(&one, &locals_nlpa1)?, vec![]),
        "fig1c" => error_curve_table(&one, &locals_nlpa1, TChoice::Entropy, one.eta)?,
        "fig1d" => error_curve_table(&one, &locals_nlpa1, TChoice::Success, one.eta)?,
        "fig3" => (gain_table(&one, &gain_order(Protocol::Nlpa1), one.eta)?, vec![]),
        "fig4a" => (entropy_table(&two, &locals_nlpa2)?, vec![]),
        "fig4b" => (success_table(&two, &locals_nlpa2)?, vec![]),
        "fig4c" => error_curve_table(&two, &locals_nlpa2, TChoice::Entropy, two.eta)?,
        "fig4d" => error_curve_table(&two, &locals_nlpa2, TChoice::Success, two.eta)?,
        "fig7a" => error_curve_table(&two, &locals_nlpa1, TChoice::Entropy, two.eta)?,
        "fig7b" => error_curve_table(&two, &locals_nlpa1, TChoice::Success, two.eta)?,
        "fig8" => (gain_table(&two, &gain_order(Protocol::Nlpa1), two.eta)?, vec![]),
        "fig9a" | "fig9b" => {
            let mut protos = locals_nlpa1.to_vec();
            protos.push(Protocol::Tmss);
            let photon_diff_nlpa = name == "fig9b";
            snr_table(&two, &protos, |p| {
                if photon_diff_nlpa && p == Protocol::Nlpa1 {
                    Scheme::PhotonDiff
                } else {
                    Scheme::Dhd
                }
            })?
        }
        "fig11a" => error_curve_table(&noiseless_two, &locals_nlpa1, TChoice::Entropy, lossy_eta(cfg))?,
        "fig11b" => error_curve_table(&noiseless_two, &locals_nlpa1, TChoice::Success, lossy_eta(cfg))?,
        "fig12" => (gain_table(&noiseless_two, &gain_order(Protocol::Nlpa1), lossy_eta(cfg))?, vec![]),
        other => {
            return Err(CliError::usage(format!(
                "unknown preset '{other}' (expected one of {} or all)",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(PresetOutput {
        name: name.to_string(),
        table,
        t_stars,
    })
}

/// Expands `all` into every preset.
pub fn preset_names(name: &str) -> Vec<String> {
    if name == "all" {
        PRESETS.iter().map(|s| s.to_string()).collect()
    } else {
        vec![name.to_string()]
    }
}

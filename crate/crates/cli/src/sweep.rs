//! One-parameter sweeps written in long format: `<param>,protocol,<metric>`.

use rayon::prelude::*;

use crate::config::{Metric, Protocol, RunConfig, SweepParam};
use crate::error::{CliError, CliResult};
use crate::eval::{p_error, t_star, Evaluator};
use crate::output::{Cell, Table};

/// Value of `metric` for `protocol` at transmissivity `t`.
pub fn metric_value(
    cfg: &RunConfig,
    ev: &Evaluator,
    reference: &Evaluator,
    metric: Metric,
    protocol: Protocol,
    t: f64,
    copies: u64,
) -> CliResult<f64> {
    match metric {
        Metric::Entropy => ev.entropy(protocol, t),
        Metric::Success => ev.success(protocol, t),
        Metric::Q => ev.q(protocol, t),
        Metric::PError => Ok(p_error(ev.q(protocol, t)?, copies)),
        Metric::Exponent => ev.exponent(protocol, t),
        Metric::Gain => {
            if protocol == Protocol::Tmss {
                return Err(CliError::usage("gain is defined relative to tmss; drop tmss from the protocols"));
            }
            let eps_ref = reference.exponent(Protocol::Tmss, 0.0)?;
            if !(eps_ref > 0.0) {
                return Err(CliError::usage("TMSS reference exponent vanishes; gain is undefined"));
            }
            Ok(ev.exponent(protocol, t)? / eps_ref)
        }
        Metric::SnrDb => Ok(ev
            .receiver_stats(protocol, t, cfg.scheme, copies)?
            .map_or(f64::NAN, |s| s.snr_db)),
    }
}

fn sweep_values(cfg: &RunConfig, param: SweepParam) -> CliResult<Vec<f64>> {
    Ok(match (&cfg.grid, param) {
        (Some(g), _) => g.clone(),
        (None, SweepParam::T) => cfg.t_grid.clone(),
        (None, SweepParam::Kappa) => cfg.kappa_grid.clone(),
        (None, SweepParam::K) => cfg.k_grid.iter().map(|&k| k as f64).collect(),
        (None, p) => return Err(CliError::usage(format!("sweep over {} needs --grid", p.name()))),
    })
}

/// Runs the configured sweep. Protocols other than the swept `T` sit at their
/// operating transmissivity (chosen by `t_choice`).
pub fn run_sweep(cfg: &RunConfig) -> CliResult<Table> {
    let param = cfg.sweep.ok_or_else(|| CliError::usage("no sweep parameter given"))?;
    let metric = cfg.metric.ok_or_else(|| CliError::usage("sweep needs --metric"))?;
    let values = sweep_values(cfg, param)?;
    if param == SweepParam::K && values.iter().any(|k| !(*k >= 1.0 && k.fract() == 0.0)) {
        return Err(CliError::usage("K sweep values must be positive integers"));
    }
    let default_copies = cfg.k_grid[0];

    let points = values
        .par_iter()
        .map(|&v| {
            let (r, kappa, eta) = match param {
                SweepParam::R => (v, cfg.kappa, cfg.eta),
                SweepParam::Kappa => (cfg.r, v, cfg.eta),
                SweepParam::Eta => (cfg.r, cfg.kappa, Some(v)),
                SweepParam::T | SweepParam::K => (cfg.r, cfg.kappa, cfg.eta),
            };
            let ev = Evaluator::with_params(cfg, r, kappa, eta)?;
            let reference = Evaluator::with_params(cfg, r, kappa, None)?;
            let copies = if param == SweepParam::K { v as u64 } else { default_copies };
            cfg.protocols
                .iter()
                .map(|&p| {
                    let t = match param {
                        SweepParam::T => v,
                        _ => t_star(&ev, p, cfg.t_choice, &cfg.t_grid)?.unwrap_or(0.0),
                    };
                    metric_value(cfg, &ev, &reference, metric, p, t, copies)
                })
                .collect::<CliResult<Vec<f64>>>()
        })
        .collect::<CliResult<Vec<Vec<f64>>>>()?;

    let mut out = Table::new(vec![param.name().to_string(), "protocol".to_string(), metric.name().to_string()]);
    for (v, row) in values.iter().zip(points) {
        for (p, x) in cfg.protocols.iter().zip(row) {
            let key = if param == SweepParam::K { Cell::Int(*v as u64) } else { Cell::Real(*v) };
            out.push(vec![key, Cell::Text(p.name().to_string()), Cell::Real(x)]);
        }
    }
    Ok(out)
}

/// `sweep_<param>_<metric>`.
pub fn sweep_file_stem(cfg: &RunConfig) -> Option<String> {
    Some(format!("sweep_{}_{}", cfg.sweep?.name(), cfg.metric?.name()))
}

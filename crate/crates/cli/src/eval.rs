//! Per-protocol figures of merit at fixed physical parameters.

use fockqi::channel::{ChannelParams, HypothesisModel};
use fockqi::discriminate::{chernoff_q, error_exponent};
use fockqi::engineer::{
    apply_local_ngo, marginal_entropy, nlpa_state, tmss, ConditionalOutcome, NgoSpec, SqueezeParams, TargetModes,
};
use fockqi::receiver::{Receiver, ReceiverStats, Scheme};
use fockqi::FockRegister;
use rayon::prelude::*;

use crate::config::{Protocol, RunConfig, TChoice};
use crate::error::{CliError, CliResult};

/// Probe factory plus the hypothesis channels for one parameter point.
#[derive(Clone, Debug)]
pub struct Evaluator {
    squeeze: SqueezeParams,
    n_max: usize,
    local_photons: usize,
    channel: ChannelParams,
    tmss_state: FockRegister,
    model: HypothesisModel,
}

impl Evaluator {
    pub fn new(cfg: &RunConfig) -> CliResult<Self> {
        Self::with_params(cfg, cfg.r, cfg.kappa, cfg.eta)
    }

    /// Same cutoffs and noise as `cfg`, with the swept quantities replaced.
    pub fn with_params(cfg: &RunConfig, r: f64, kappa: f64, eta: Option<f64>) -> CliResult<Self> {
        let squeeze = SqueezeParams::new(r)?;
        let channel = ChannelParams::new(kappa, cfg.n_th, eta, cfg.env_cutoff)?;
        Ok(Self {
            squeeze,
            n_max: cfg.n_max,
            local_photons: cfg.local_photons,
            channel,
            tmss_state: tmss(squeeze, cfg.n_max)?,
            model: HypothesisModel::new(channel, cfg.n_max)?,
        })
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.channel
    }

    /// The heralded probe; impossible heralds come back with `state: None`.
    pub fn probe(&self, protocol: Protocol, t: f64) -> CliResult<ConditionalOutcome> {
        let targets = if self.local_photons == 2 {
            TargetModes::Both
        } else {
            TargetModes::B
        };
        let out = match protocol {
            Protocol::Tmss => ConditionalOutcome {
                state: Some(self.tmss_state.clone()),
                success_probability: 1.0,
                leakage: 0.0,
            },
            Protocol::Pa => apply_local_ngo(&self.tmss_state, &NgoSpec::addition(t, targets)?)?,
            Protocol::Ps => apply_local_ngo(&self.tmss_state, &NgoSpec::subtraction(t, targets)?)?,
            Protocol::Pc => apply_local_ngo(&self.tmss_state, &NgoSpec::catalysis(t, targets)?)?,
            Protocol::Nlpa1 => nlpa_state(1, self.squeeze, t, self.n_max)?,
            Protocol::Nlpa2 => nlpa_state(2, self.squeeze, t, self.n_max)?,
        };
        Ok(out)
    }

    /// Entanglement entropy in bits; NaN for an impossible herald.
    pub fn entropy(&self, protocol: Protocol, t: f64) -> CliResult<f64> {
        match self.probe(protocol, t)?.state {
            Some(s) => Ok(marginal_entropy(&s, 0)?),
            None => Ok(f64::NAN),
        }
    }

    pub fn success(&self, protocol: Protocol, t: f64) -> CliResult<f64> {
        Ok(self.probe(protocol, t)?.success_probability)
    }

    /// Chernoff coefficient and heralding probability; `(NaN, 0)` for an
    /// impossible herald.
    pub fn q_and_success(&self, protocol: Protocol, t: f64) -> CliResult<(f64, f64)> {
        let probe = self.probe(protocol, t)?;
        if probe.state.is_none() {
            return Ok((f64::NAN, 0.0));
        }
        let (rho0, rho1) = self.model.pair(&probe.density()?)?;
        let (q, _) = chernoff_q(&rho0, &rho1)?;
        Ok((q, probe.success_probability))
    }

    pub fn q(&self, protocol: Protocol, t: f64) -> CliResult<f64> {
        Ok(self.q_and_success(protocol, t)?.0)
    }

    /// Error exponent, weighted by the heralding probability for every
    /// protocol except the deterministic TMSS reference.
    pub fn exponent(&self, protocol: Protocol, t: f64) -> CliResult<f64> {
        let (q, p) = self.q_and_success(protocol, t)?;
        if q.is_nan() {
            return Ok(f64::NAN);
        }
        Ok(error_exponent(q, p, protocol != Protocol::Tmss)?)
    }

    pub fn receiver_stats(&self, protocol: Protocol, t: f64, scheme: Scheme, copies: u64) -> CliResult<Option<ReceiverStats>> {
        let probe = self.probe(protocol, t)?;
        if probe.state.is_none() {
            return Ok(None);
        }
        let receiver = Receiver::new(self.channel, scheme, self.n_max)?;
        Ok(Some(receiver.stats(&probe.density()?, copies)?))
    }
}

/// `½ Q^K`, the Chernoff-bound error after `K` copies.
pub fn p_error(q: f64, copies: u64) -> f64 {
    if q.is_nan() {
        return f64::NAN;
    }
    0.5 * q.powf(copies as f64)
}

/// `log₁₀(½ Q^K)`, finite where the linear value underflows.
pub fn log10_p_error(q: f64, copies: u64) -> f64 {
    if q.is_nan() {
        return f64::NAN;
    }
    0.5f64.log10() + copies as f64 * q.log10()
}

/// Evaluates `f` over every `(protocol, T)` pair in parallel, returning one
/// row per `T` in grid order.
pub fn table<F>(protocols: &[Protocol], t_grid: &[f64], f: F) -> CliResult<Vec<Vec<f64>>>
where
    F: Fn(Protocol, f64) -> CliResult<f64> + Sync,
{
    let jobs: Vec<(usize, Protocol, f64)> = t_grid
        .iter()
        .enumerate()
        .flat_map(|(i, &t)| protocols.iter().map(move |&p| (i, p, t)))
        .collect();
    let values = jobs
        .par_iter()
        .map(|&(_, p, t)| f(p, t))
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(values.chunks(protocols.len()).map(<[f64]>::to_vec).collect())
}

/// Grid argmax, first index on ties, ignoring NaN. `None` if every value is
/// NaN.
pub fn argmax(grid: &[f64], values: &[f64]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for (&t, &v) in grid.iter().zip(values) {
        if v.is_nan() {
            continue;
        }
        if best.map_or(true, |(_, bv)| v > bv) {
            best = Some((t, v));
        }
    }
    best.map(|(t, _)| t)
}

/// Operating transmissivity of `protocol` on the configured grid: the
/// entanglement-entropy or heralding-probability maximiser. TMSS has no
/// transmissivity and reports `None`.
pub fn t_star(ev: &Evaluator, protocol: Protocol, choice: TChoice, grid: &[f64]) -> CliResult<Option<f64>> {
    if !protocol.uses_t() {
        return Ok(None);
    }
    let values = grid
        .par_iter()
        .map(|&t| match choice {
            TChoice::Entropy => ev.entropy(protocol, t),
            TChoice::Success => ev.success(protocol, t),
        })
        .collect::<CliResult<Vec<f64>>>()?;
    argmax(grid, &values)
        .map(Some)
        .ok_or_else(|| CliError::usage(format!("{protocol}: every heralding outcome on the T grid is impossible")))
}

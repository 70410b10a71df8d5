//! Target channels: the thermal attenuator that models reflection off a
//! weak target in a bright background, the vacuum pure-loss channel, and the
//! resulting target-absent / target-present state pair.

use std::collections::HashMap;

use crate::engineer::b_coefficient;
use crate::error::{Error, Result};
use crate::fock::{
    thermal_leakage, thermal_state, thermal_weights, CMatrix, DensityOperator, ModeOperator, Tensor, C64,
};

/// Largest thermal tail accepted for the environment of an attenuator.
pub const ENV_LEAKAGE_TOL: f64 = 1e-8;
/// Environment levels with smaller thermal weight are dropped.
pub const MIN_KRAUS_WEIGHT: f64 = 1e-14;

/// Physical parameters of the target channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    pub kappa: f64,
    pub n_th: f64,
    /// Transmissivity of the post-reflection loss, if any.
    pub eta: Option<f64>,
    pub env_cutoff: usize,
}

impl ChannelParams {
    /// `env_cutoff = None` picks the smallest cutoff whose thermal tail is
    /// at most [`ENV_LEAKAGE_TOL`].
    pub fn new(kappa: f64, n_th: f64, eta: Option<f64>, env_cutoff: Option<usize>) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::invalid(format!("kappa must lie in [0, 1], got {kappa}")));
        }
        if !(n_th >= 0.0) || !n_th.is_finite() {
            return Err(Error::invalid(format!("n_th must be finite and >= 0, got {n_th}")));
        }
        if let Some(e) = eta {
            check_eta(e)?;
        }
        let mut params = Self {
            kappa,
            n_th,
            eta,
            env_cutoff: 1,
        };
        params.env_cutoff = match env_cutoff {
            Some(c) if c >= 1 => c,
            Some(c) => return Err(Error::invalid(format!("env_cutoff must be >= 1, got {c}"))),
            None => required_env_cutoff(params.injected_background(), ENV_LEAKAGE_TOL),
        };
        Ok(params)
    }

    /// Background injected into the environment so that the return mode
    /// carries `n_th` photons: `n_th / (1 - κ)`. Infinite at `κ = 1`.
    pub fn injected_background(&self) -> f64 {
        if self.kappa >= 1.0 {
            f64::INFINITY
        } else {
            self.n_th / (1.0 - self.kappa)
        }
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(kappa, self.n_th, self.eta, None)
    }

    pub fn with_eta(&self, eta: Option<f64>) -> Result<Self> {
        Self::new(self.kappa, self.n_th, eta, Some(self.env_cutoff))
    }
}

/// Smallest cutoff whose thermal tail above it is at most `tol`.
pub fn required_env_cutoff(n_bar: f64, tol: f64) -> usize {
    if !n_bar.is_finite() {
        return 1;
    }
    (1..).find(|&c| thermal_leakage(n_bar, c) <= tol).unwrap_or(1)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid(format!("eta must lie in [0, 1], got {eta}")));
    }
    Ok(())
}

/// One `(x, y, j, l, c)` entry of the transfer map `ρ'[x, y] += c ρ[j, l]`.
type TransferEntry = (usize, usize, usize, usize, C64);

/// A completely positive map on one mode in explicit Kraus form.
///
/// Application goes through a precomputed sparse transfer map
/// `Σ_i K_i[x, j] K_i[y, l]*`, which is much cheaper than dense products for
/// the ladder-structured operators used here.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    operators: Vec<ModeOperator>,
    weights: Vec<f64>,
    transfer: Vec<TransferEntry>,
}

impl KrausChannel {
    /// `weights[i]` is free metadata (e.g. the environment occupation that
    /// produced operator `i`).
    pub fn new(operators: Vec<CMatrix>, weights: Vec<f64>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::invalid("a channel needs at least one Kraus operator"));
        }
        if operators.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: operators.len(),
                found: weights.len(),
            });
        }
        let d = operators[0].nrows();
        let mut ops = Vec::with_capacity(operators.len());
        for m in operators {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.nrows(),
                });
            }
            ops.push(ModeOperator::new(m)?);
        }
        let transfer = build_transfer(&ops);
        Ok(Self {
            operators: ops,
            weights,
            transfer,
        })
    }

    pub fn identity(n_max: usize) -> Result<Self> {
        Self::new(vec![CMatrix::identity(n_max + 1, n_max + 1)], vec![1.0])
    }

    pub fn operators(&self) -> &[ModeOperator] {
        &self.operators
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    /// Max-abs deviation of `Σ K†K` from the identity on levels `0..levels`.
    pub fn completeness_defect(&self, levels: usize) -> f64 {
        let d = self.dim();
        let mut sum = CMatrix::zeros(d, d);
        for k in &self.operators {
            sum += k.matrix().adjoint() * k.matrix();
        }
        let n = levels.min(d);
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let expect = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((sum[(r, c)] - C64::new(expect, 0.0)).norm());
            }
        }
        worst
    }

    /// Applies the channel to `mode` of `rho`.
    pub fn apply(&self, rho: &DensityOperator, mode: usize) -> Result<DensityOperator> {
        let dims = rho.dims();
        if mode >= dims.n_modes() {
            return Err(Error::invalid(format!("mode {mode} out of range")));
        }
        let d = dims.mode_dim(mode);
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: d,
            });
        }
        let stride = dims.strides()[mode];
        let bases: Vec<usize> = (0..rho.dim()).filter(|&i| (i / stride) % d == 0).collect();
        let input = rho.matrix();
        let mut out = CMatrix::zeros(rho.dim(), rho.dim());
        for &c0 in &bases {
            for &r0 in &bases {
                for &(x, y, j, l, coeff) in &self.transfer {
                    out[(r0 + x * stride, c0 + y * stride)] += coeff * input[(r0 + j * stride, c0 + l * stride)];
                }
            }
        }
        Ok(DensityOperator::from_parts(dims.clone(), out))
    }
}

fn build_transfer(ops: &[ModeOperator]) -> Vec<TransferEntry> {
    let mut acc: HashMap<(usize, usize, usize, usize), C64> = HashMap::new();
    for op in ops {
        let nz = crate::fock::nonzeros(op.matrix());
        for &(x, j, v) in &nz {
            for &(y, l, u) in &nz {
                *acc.entry((x, y, j, l)).or_default() += v * u.conj();
            }
        }
    }
    let mut entries: Vec<TransferEntry> = acc
        .into_iter()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|((x, y, j, l), c)| (x, y, j, l, c))
        .collect();
    entries.sort_by_key(|&(x, y, j, l, _)| (y, x, l, j));
    entries
}

/// Thermal attenuator with reflectivity `kappa` and environment mean photon
/// number `n_bar_env`: `K_{k'k} = √w_k ⟨k'|U|k⟩_C` on a system truncated at
/// `n_max`, with the environment truncated at `env_cutoff`.
pub fn thermal_attenuator_kraus(kappa: f64, n_bar_env: f64, n_max: usize, env_cutoff: usize) -> Result<KrausChannel> {
    thermal_attenuator_kraus_with_tolerance(kappa, n_bar_env, n_max, env_cutoff, ENV_LEAKAGE_TOL)
}

/// As [`thermal_attenuator_kraus`] with an explicit bound on the
/// environment's thermal tail.
pub fn thermal_attenuator_kraus_with_tolerance(
    kappa: f64,
    n_bar_env: f64,
    n_max: usize,
    env_cutoff: usize,
    max_leakage: f64,
) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::invalid(format!("kappa must lie in [0, 1], got {kappa}")));
    }
    let leakage = thermal_leakage(n_bar_env, env_cutoff);
    if leakage > max_leakage {
        return Err(Error::CutoffTooSmall {
            cutoff: env_cutoff,
            needed: required_env_cutoff(n_bar_env, max_leakage),
            leakage,
        });
    }
    let weights = thermal_weights(n_bar_env, env_cutoff)?;
    let d = n_max + 1;
    let mut ops = Vec::new();
    let mut labels = Vec::new();
    for (k, &w) in weights.iter().enumerate() {
        if w < MIN_KRAUS_WEIGHT {
            continue;
        }
        let sw = w.sqrt();
        for k_out in 0..=(k + n_max) {
            let mut m = CMatrix::zeros(d, d);
            let mut any = false;
            for j in 0..d {
                if j + k < k_out || j + k - k_out > n_max {
                    continue;
                }
                let b = b_coefficient(k, k_out, j, kappa)?;
                if b != 0.0 {
                    m[(j + k - k_out, j)] = C64::new(sw * b, 0.0);
                    any = true;
                }
            }
            if any {
                ops.push(m);
                labels.push(w);
            }
        }
    }
    KrausChannel::new(ops, labels)
}

/// Pure loss with transmissivity `eta`: `E_k = Σ_n √C(n,k) η^{(n-k)/2}
/// (1-η)^{k/2} |n-k⟩⟨n|`, one operator per number of lost photons. The
/// weights record `k`.
pub fn pure_loss_kraus(eta: f64, n_max: usize) -> Result<KrausChannel> {
    check_eta(eta)?;
    let d = n_max + 1;
    let mut ops = Vec::new();
    let mut labels = Vec::new();
    for k in 0..d {
        let mut m = CMatrix::zeros(d, d);
        let mut any = false;
        for n in k..d {
            let amp = (statrs::function::factorial::binomial(n as u64, k as u64)
                * eta.powi((n - k) as i32)
                * (1.0 - eta).powi(k as i32))
            .sqrt();
            if amp != 0.0 {
                m[(n - k, n)] = C64::new(amp, 0.0);
                any = true;
            }
        }
        if any {
            ops.push(m);
            labels.push(k as f64);
        }
    }
    KrausChannel::new(ops, labels)
}

/// Applies pure loss with transmissivity `eta` to `mode` of `rho`.
pub fn pure_loss(rho: &DensityOperator, mode: usize, eta: f64) -> Result<DensityOperator> {
    check_eta(eta)?;
    if mode >= rho.dims().n_modes() {
        return Err(Error::invalid(format!("mode {mode} out of range")));
    }
    pure_loss_kraus(eta, rho.dims().cutoff(mode))?.apply(rho, mode)
}

/// Prebuilt channels for producing many hypothesis pairs at fixed
/// parameters and cutoff.
#[derive(Clone, Debug)]
pub struct HypothesisModel {
    params: ChannelParams,
    n_max: usize,
    background: DensityOperator,
    /// `None` at `κ = 1`, where the target is a perfect mirror.
    attenuator: Option<KrausChannel>,
    loss: Option<KrausChannel>,
}

impl HypothesisModel {
    /// Channels acting on a return mode truncated at `n_max`.
    pub fn new(params: ChannelParams, n_max: usize) -> Result<Self> {
        let background = thermal_state(params.n_th, n_max)?;
        let attenuator = if params.kappa >= 1.0 {
            None
        } else {
            Some(thermal_attenuator_kraus(
                params.kappa,
                params.injected_background(),
                n_max,
                params.env_cutoff,
            )?)
        };
        let loss = params.eta.map(|e| pure_loss_kraus(e, n_max)).transpose()?;
        Ok(Self {
            params,
            n_max,
            background,
            attenuator,
            loss,
        })
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    /// `(ρ₀, ρ₁)` for a two-mode (idler, signal) probe.
    ///
    /// `ρ₀ = Tr_B(probe) ⊗ thermal(n_th)`; `ρ₁` sends the signal through the
    /// attenuator and then, if configured, through pure loss. Loss acts only
    /// under the target-present hypothesis.
    pub fn pair(&self, probe: &DensityOperator) -> Result<(DensityOperator, DensityOperator)> {
        let dims = probe.dims();
        if dims.n_modes() != 2 || dims.cutoff(1) != self.n_max {
            return Err(Error::invalid(format!(
                "probe must be two-mode with signal cutoff {}, got {:?}",
                self.n_max,
                dims.cutoffs()
            )));
        }
        let rho0 = probe.partial_trace(&[0])?.tensor(&self.background);
        let mut rho1 = match &self.attenuator {
            Some(ch) => ch.apply(probe, 1)?,
            None => probe.clone(),
        };
        if let Some(loss) = &self.loss {
            rho1 = loss.apply(&rho1, 1)?;
        }
        Ok((rho0, rho1))
    }
}

/// One-shot form of [`HypothesisModel::pair`].
pub fn hypothesis_pair(probe: &DensityOperator, params: &ChannelParams) -> Result<(DensityOperator, DensityOperator)> {
    HypothesisModel::new(*params, probe.dims().cutoff(1))?.pair(probe)
}

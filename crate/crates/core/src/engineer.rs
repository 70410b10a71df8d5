//! Probe-state engineering: two-mode squeezed vacuum, heralded local
//! photon addition/subtraction/catalysis, nonlocal photon addition, and a
//! brute-force simulation of the four-mode nonlocal circuit.

use statrs::function::factorial::{binomial, ln_factorial};

use crate::error::{Error, Result};
use crate::fock::{
    beam_splitter_unitary, transmissivity_angle, CMatrix, Tensor, CVector, DensityOperator, FockDims,
    FockRegister, C64,
};

/// Leakage above which [`protocol_oracle`] refuses to run.
pub const ORACLE_MAX_LEAKAGE: f64 = 1e-4;

/// Two-mode squeezing strength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeParams {
    r: f64,
    lambda: f64,
}

impl SqueezeParams {
    pub fn new(r: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::invalid(format!("squeezing r must be finite and >= 0, got {r}")));
        }
        Ok(Self { r, lambda: r.tanh() })
    }

    /// From the mean signal photon number `sinh² r`.
    pub fn from_mean_photons(n_s: f64) -> Result<Self> {
        if !(n_s >= 0.0) || !n_s.is_finite() {
            return Err(Error::invalid(format!("mean photon number must be >= 0, got {n_s}")));
        }
        Self::new(n_s.sqrt().asinh())
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mean_photons(&self) -> f64 {
        self.r.sinh().powi(2)
    }

    /// `sech² r = 1 - λ²`.
    pub fn sech2(&self) -> f64 {
        1.0 / self.r.cosh().powi(2)
    }
}

/// Which TMSS mode(s) a local operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetModes {
    A,
    B,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NgoKind {
    Addition,
    Subtraction,
    Catalysis,
}

/// A heralded beam-splitter operation: inject `|aux_in⟩`, detect `aux_detect`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NgoSpec {
    pub aux_in: usize,
    pub aux_detect: usize,
    pub transmissivity: f64,
    pub target_modes: TargetModes,
}

impl NgoSpec {
    pub fn new(aux_in: usize, aux_detect: usize, transmissivity: f64, target_modes: TargetModes) -> Result<Self> {
        check_transmissivity(transmissivity)?;
        Ok(Self {
            aux_in,
            aux_detect,
            transmissivity,
            target_modes,
        })
    }

    pub fn addition(t: f64, target_modes: TargetModes) -> Result<Self> {
        Self::new(1, 0, t, target_modes)
    }

    pub fn subtraction(t: f64, target_modes: TargetModes) -> Result<Self> {
        Self::new(0, 1, t, target_modes)
    }

    pub fn catalysis(t: f64, target_modes: TargetModes) -> Result<Self> {
        Self::new(1, 1, t, target_modes)
    }

    pub fn kind(&self) -> NgoKind {
        use std::cmp::Ordering::*;
        match self.aux_in.cmp(&self.aux_detect) {
            Greater => NgoKind::Addition,
            Less => NgoKind::Subtraction,
            Equal => NgoKind::Catalysis,
        }
    }
}

/// A heralded probe state with its success probability.
///
/// `state` is `None` exactly when the heralding pattern is impossible
/// (`success_probability == 0`).
#[derive(Clone, Debug)]
pub struct ConditionalOutcome {
    pub state: Option<FockRegister>,
    pub success_probability: f64,
    /// Probability weight lost to the Fock cutoff while building the state.
    pub leakage: f64,
}

impl ConditionalOutcome {
    /// Normalizes an unnormalized conditioned state; its squared norm is the
    /// success probability.
    pub fn from_unnormalized(reg: FockRegister, leakage: f64) -> Self {
        match reg.normalized() {
            Some((state, p)) => Self {
                state: Some(state),
                success_probability: p,
                leakage,
            },
            None => Self {
                state: None,
                success_probability: 0.0,
                leakage,
            },
        }
    }

    /// The state, or [`Error::ImpossibleOutcome`] for a zero-probability herald.
    pub fn state(&self) -> Result<&FockRegister> {
        self.state.as_ref().ok_or(Error::ImpossibleOutcome)
    }

    /// `N = 1/√P`.
    pub fn normalization(&self) -> Option<f64> {
        (self.success_probability > 0.0).then(|| self.success_probability.sqrt().recip())
    }

    pub fn density(&self) -> Result<DensityOperator> {
        Ok(self.state()?.to_density())
    }
}

fn check_transmissivity(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("transmissivity must lie in [0, 1], got {t}")));
    }
    Ok(())
}

/// Two-mode squeezed vacuum `√(1-λ²) Σ λⁿ |n, n⟩` truncated at `n_max`.
pub fn tmss(params: SqueezeParams, n_max: usize) -> Result<FockRegister> {
    let dims = FockDims::uniform(2, n_max)?;
    let lam = params.lambda();
    let norm = (1.0 - lam * lam).sqrt();
    let mut amps = CVector::zeros(dims.total_dim());
    for n in 0..=n_max {
        amps[dims.index_of(&[n, n])] = C64::new(norm * lam.powi(n as i32), 0.0);
    }
    FockRegister::new(dims, amps)
}

/// Amplitude `⟨n'|_aux ⟨k+n-n'|_sys U |n⟩_aux |k⟩_sys` of the heralded
/// beam-splitter map, where `T = cos²θ` is the transmissivity of the system
/// mode. Zero when `k + n < n'`.
pub fn b_coefficient(n: usize, n_prime: usize, k: usize, t: f64) -> Result<f64> {
    check_transmissivity(t)?;
    Ok(b_coefficient_unchecked(n, n_prime, k, t))
}

fn b_coefficient_unchecked(n: usize, n_prime: usize, k: usize, t: f64) -> f64 {
    if k + n < n_prime {
        return 0.0;
    }
    let (st, sr) = (t.sqrt(), (1.0 - t).sqrt());
    let mut sum = 0.0;
    for i in 0..=n.min(n_prime) {
        let j = n_prime - i;
        if j > k {
            continue;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign
            * binomial(n as u64, i as u64)
            * binomial(k as u64, j as u64)
            * st.powi((k + 2 * i - n_prime) as i32)
            * sr.powi((n + n_prime - 2 * i) as i32);
    }
    let log_pref = 0.5
        * (ln_factorial((k + n - n_prime) as u64) + ln_factorial(n_prime as u64)
            - ln_factorial(k as u64)
            - ln_factorial(n as u64));
    sum * log_pref.exp()
}

/// `B̂_{n,n'} = Σ_k B_{n,n',k} |k+n-n'⟩⟨k|` on levels `0..=n_max`. The second
/// return value lists, per input level, the squared coefficient whose
/// image falls above the cutoff.
pub fn conditional_operator(n: usize, n_prime: usize, t: f64, n_max: usize) -> Result<(CMatrix, Vec<f64>)> {
    check_transmissivity(t)?;
    let d = n_max + 1;
    let mut op = CMatrix::zeros(d, d);
    let mut dropped = vec![0.0; d];
    for k in 0..d {
        if k + n < n_prime {
            continue;
        }
        let b = b_coefficient_unchecked(n, n_prime, k, t);
        let out = k + n - n_prime;
        if out <= n_max {
            op[(out, k)] = C64::new(b, 0.0);
        } else {
            dropped[k] = b * b;
        }
    }
    Ok((op, dropped))
}

/// Applies a heralded local operation to a two-mode register.
pub fn apply_local_ngo(input: &FockRegister, spec: &NgoSpec) -> Result<ConditionalOutcome> {
    let dims = input.dims();
    if dims.n_modes() != 2 {
        return Err(Error::invalid("local operations act on two-mode registers"));
    }
    let modes: &[usize] = match spec.target_modes {
        TargetModes::A => &[0],
        TargetModes::B => &[1],
        TargetModes::Both => &[0, 1],
    };
    let mut state = input.clone();
    let mut leakage = 0.0;
    for &mode in modes {
        let (op, dropped) =
            conditional_operator(spec.aux_in, spec.aux_detect, spec.transmissivity, dims.cutoff(mode))?;
        leakage += dropped_weight(&state, mode, &dropped);
        state = state.apply_mode_operator(mode, &op)?;
    }
    Ok(ConditionalOutcome::from_unnormalized(state, leakage))
}

fn dropped_weight(reg: &FockRegister, mode: usize, dropped: &[f64]) -> f64 {
    if dropped.iter().all(|&w| w == 0.0) {
        return 0.0;
    }
    reg.amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| a.norm_sqr() * dropped[reg.dims().levels_of(i)[mode]])
        .sum()
}

/// Closed-form heralding probability of nonlocal photon addition with one or
/// two auxiliary photons.
pub fn nlpa_success_probability(aux_photons: usize, params: SqueezeParams, t: f64) -> Result<f64> {
    check_transmissivity(t)?;
    let x = params.lambda() * t;
    match aux_photons {
        1 => Ok(params.sech2() * (1.0 - t) / (1.0 - x * x).powi(2)),
        2 => Ok(params.sech2() * (1.0 - t).powi(2) / (1.0 - x * x).powi(3)),
        _ => Err(Error::invalid(format!("aux_photons must be 1 or 2, got {aux_photons}"))),
    }
}

/// Nonlocal photon addition built from its closed form.
///
/// One photon: `Σ √p_n (|n+1, n⟩ + |n, n+1⟩)/√2`; two photons:
/// `Σ √q_n (|n, n+2⟩ - |n+2, n⟩)/√2`. The truncated state is renormalized
/// and the missing weight reported as leakage.
pub fn nlpa_state(aux_photons: usize, params: SqueezeParams, t: f64, n_max: usize) -> Result<ConditionalOutcome> {
    let p = nlpa_success_probability(aux_photons, params, t)?;
    let x = params.lambda() * t;
    if x >= 1.0 {
        return Err(Error::invalid(format!("λT must be < 1, got {x}")));
    }
    if n_max < aux_photons {
        return Err(Error::invalid(format!("n_max must be at least {aux_photons}")));
    }
    let dims = FockDims::uniform(2, n_max)?;
    let mut amps = CVector::zeros(dims.total_dim());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut captured = 0.0;
    for n in 0..=(n_max - aux_photons) {
        let nf = n as f64;
        let w = if aux_photons == 1 {
            (1.0 - x * x).powi(2) * x.powi(2 * n as i32) * (nf + 1.0)
        } else {
            (1.0 - x * x).powi(3) * x.powi(2 * n as i32) * (nf + 1.0) * (nf + 2.0) / 2.0
        };
        captured += w;
        let a = w.sqrt() * h;
        if aux_photons == 1 {
            amps[dims.index_of(&[n + 1, n])] += C64::new(a, 0.0);
            amps[dims.index_of(&[n, n + 1])] += C64::new(a, 0.0);
        } else {
            amps[dims.index_of(&[n, n + 2])] += C64::new(a, 0.0);
            amps[dims.index_of(&[n + 2, n])] -= C64::new(a, 0.0);
        }
    }
    let reg = FockRegister::new(dims, amps)?;
    let state = reg.normalized().map(|(s, _)| s);
    Ok(ConditionalOutcome {
        success_probability: if state.is_some() { p } else { 0.0 },
        state,
        leakage: (1.0 - captured).max(0.0),
    })
}

/// `-Tr ρ log₂ ρ` over the clamped spectrum, with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    let spec = rho.spectrum();
    let min = spec.min_value();
    if min < -crate::fock::PSD_TOL {
        return Err(Error::NotPositive(min));
    }
    Ok(spec
        .clamped_values()
        .into_iter()
        .filter(|&v| v > 0.0)
        .map(|v| -v * v.log2())
        .sum())
}

/// Entropy of one mode's marginal of a pure multi-mode state.
pub fn marginal_entropy(state: &FockRegister, mode: usize) -> Result<f64> {
    von_neumann_entropy(&state.reduced(&[mode])?)
}

/// Brute-force simulation of the nonlocal circuit.
///
/// Prepares `TMSS(A, B) ⊗ |m⟩ ⊗ |n⟩`, mixes the two auxiliaries on a beam
/// splitter with `cos²θ_A = bs_a_ratio`, couples auxiliary 1 to `A` and
/// auxiliary 2 to `B` with transmissivity `t`, and projects the auxiliaries
/// onto `⟨m'|⟨n'|`.
pub fn protocol_oracle(
    aux_in: (usize, usize),
    aux_detect: (usize, usize),
    t: f64,
    bs_a_ratio: f64,
    params: SqueezeParams,
    n_max: usize,
) -> Result<ConditionalOutcome> {
    let theta = transmissivity_angle(t)?;
    let theta_a = transmissivity_angle(bs_a_ratio)?;
    let photons = aux_in.0 + aux_in.1;
    if aux_detect.0.max(aux_detect.1) > n_max || photons > n_max {
        return Err(Error::invalid("auxiliary photon numbers exceed the cutoff"));
    }
    // Unitary blocks are exact up to n_max total photons per coupled pair, so
    // TMSS weight above n_max - photons may be mistreated.
    let lam2 = params.lambda().powi(2);
    let leak_at = |c: usize| if c < photons { 1.0 } else { lam2.powi((c - photons + 1) as i32) };
    let leakage = leak_at(n_max);
    if leakage > ORACLE_MAX_LEAKAGE {
        let needed = (n_max..).find(|&c| leak_at(c) <= ORACLE_MAX_LEAKAGE).unwrap_or(n_max);
        return Err(Error::CutoffTooSmall {
            cutoff: n_max,
            needed,
            leakage,
        });
    }

    let pair = FockDims::uniform(2, n_max)?;
    let aux = FockRegister::basis(pair.clone(), &[aux_in.0, aux_in.1])?;
    let mut state = tmss(params, n_max)?.tensor(&aux);
    // modes: 0 = A, 1 = B, 2 = aux1, 3 = aux2
    state = state.apply_two_mode(2, 3, &beam_splitter_unitary(theta_a, &pair)?)?;
    let u = beam_splitter_unitary(theta, &pair)?;
    state = state.apply_two_mode(2, 0, &u)?;
    state = state.apply_two_mode(3, 1, &u)?;
    let conditioned = state.project_mode(3, aux_detect.1)?.project_mode(2, aux_detect.0)?;
    Ok(ConditionalOutcome::from_unnormalized(conditioned, leakage))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn default_params() -> SqueezeParams {
        SqueezeParams::from_mean_photons(0.05).unwrap()
    }

    /// Closed-form TMSS marginal entropy in bits.
    fn tmss_entropy_oracle(ns: f64) -> f64 {
        (ns + 1.0) * (ns + 1.0).log2() - ns * ns.log2()
    }

    /// `⟨n'|_aux ⟨k+n-n'|_sys e^{θG} |n⟩_aux |k⟩_sys` from the dense unitary.
    fn matrix_element_oracle(n: usize, n_prime: usize, k: usize, t: f64) -> f64 {
        let c = 20;
        let dims = FockDims::uniform(2, c).unwrap();
        let u = beam_splitter_unitary(t.sqrt().acos(), &dims).unwrap();
        if k + n < n_prime {
            return 0.0;
        }
        let el = u[(dims.index_of(&[n_prime, k + n - n_prime]), dims.index_of(&[n, k]))];
        assert!(el.im.abs() < 1e-14);
        el.re
    }

    #[test]
    fn squeeze_params_relations() {
        let p = default_params();
        assert!((p.mean_photons() - 0.05).abs() < 1e-15);
        assert!((p.lambda() - p.r().tanh()).abs() < 1e-14);
        assert!((p.sech2() - 1.0 / 1.05).abs() < 1e-15);
        assert!(SqueezeParams::new(-0.1).is_err());
    }

    #[test]
    fn tmss_vacuum_limit_and_tail() {
        let vac = tmss(SqueezeParams::new(0.0).unwrap(), 4).unwrap();
        assert_eq!(vac.amplitude(&[0, 0]), C64::new(1.0, 0.0));
        assert!((vac.norm_sqr() - 1.0).abs() < 1e-15);

        let p = default_params();
        let psi = tmss(p, 24).unwrap();
        let deficit = p.lambda().powi(50);
        assert!(deficit < 1e-33);
        assert!((1.0 - psi.norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn tmss_entropy_matches_closed_form() {
        let psi = tmss(default_params(), 24).unwrap();
        let e = marginal_entropy(&psi, 1).unwrap();
        assert!((e - tmss_entropy_oracle(0.05)).abs() < 1e-4, "{e}");
        assert!((0.27..=0.30).contains(&e));
    }

    #[test]
    fn b_coefficient_simple_cases() {
        let t = 0.37;
        for k in 0..6 {
            let b00 = b_coefficient(0, 0, k, t).unwrap();
            assert!((b00 - t.powf(k as f64 / 2.0)).abs() < 1e-14);
            let b10 = b_coefficient(1, 0, k, t).unwrap();
            let expect = t.powf(k as f64 / 2.0) * (1.0 - t).sqrt() * ((k + 1) as f64).sqrt();
            assert!((b10 - expect).abs() < 1e-14);
            assert!((b10 - matrix_element_oracle(1, 0, k, t)).abs() < 1e-10);
            let b01 = b_coefficient(0, 1, k, t).unwrap();
            let expect = if k == 0 {
                0.0
            } else {
                -(k as f64).sqrt() * t.powf((k as f64 - 1.0) / 2.0) * (1.0 - t).sqrt()
            };
            assert!((b01 - expect).abs() < 1e-14);
            assert!((b01 - matrix_element_oracle(0, 1, k, t)).abs() < 1e-10);
        }
        assert!(b_coefficient(0, 0, 0, 1.2).is_err());
    }

    #[test]
    fn b_coefficient_matches_unitary_for_all_small_indices() {
        let c = 20;
        let dims = FockDims::uniform(2, c).unwrap();
        let mut worst: f64 = 0.0;
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let u = beam_splitter_unitary(f64::sqrt(t).acos(), &dims).unwrap();
            for n in 0..=8 {
                for np in 0..=8 {
                    for k in 0..=8 {
                        let b = b_coefficient(n, np, k, t).unwrap();
                        let oracle = if k + n < np {
                            0.0
                        } else {
                            u[(dims.index_of(&[np, k + n - np]), dims.index_of(&[n, k]))].re
                        };
                        worst = worst.max((b - oracle).abs());
                    }
                }
            }
        }
        assert!(worst <= 1e-10, "worst deviation {worst:e}");
    }

    #[test]
    fn transparent_local_operation_is_identity() {
        let psi = tmss(default_params(), 12).unwrap();
        for target in [TargetModes::A, TargetModes::B, TargetModes::Both] {
            let out = apply_local_ngo(&psi, &NgoSpec::new(0, 0, 1.0, target).unwrap()).unwrap();
            assert!((out.success_probability - 1.0).abs() < 1e-12);
            assert!(out.state().unwrap().fidelity(&psi).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn local_success_matches_coefficient_sum() {
        let p = default_params();
        let psi = tmss(p, 24).unwrap();
        for (n, np) in [(1, 0), (0, 1), (1, 1)] {
            for t in [0.1, 0.5, 0.9] {
                for (target, power) in [(TargetModes::B, 1), (TargetModes::Both, 2)] {
                    let out = apply_local_ngo(&psi, &NgoSpec::new(n, np, t, target).unwrap()).unwrap();
                    let oracle: f64 = (0..=24)
                        .map(|k| {
                            let c = p.sech2().sqrt() * p.lambda().powi(k) * b_coefficient(n, np, k as usize, t).unwrap().powi(power);
                            c * c
                        })
                        .sum();
                    assert!((out.success_probability - oracle).abs() < 1e-10, "{n}{np} {t}");
                    if let Some(s) = &out.state {
                        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn impossible_outcome_is_reported_not_raised() {
        // subtraction from vacuum at any T never heralds
        let vac = tmss(SqueezeParams::new(0.0).unwrap(), 4).unwrap();
        let out = apply_local_ngo(&vac, &NgoSpec::subtraction(0.5, TargetModes::B).unwrap()).unwrap();
        assert_eq!(out.success_probability, 0.0);
        assert!(matches!(out.state(), Err(Error::ImpossibleOutcome)));
    }

    #[test]
    fn nlpa_bell_limit() {
        let p = default_params();
        let out = nlpa_state(1, p, 0.0, 24).unwrap();
        let s = out.state().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitude(&[1, 0]).re - h).abs() < 1e-15);
        assert!((s.amplitude(&[0, 1]).re - h).abs() < 1e-15);
        assert!((marginal_entropy(s, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((out.success_probability - 1.0 / 1.05).abs() < 1e-12);
    }

    #[test]
    fn nlpa_two_photon_near_zero_transmissivity() {
        let out = nlpa_state(2, default_params(), 0.01, 24).unwrap();
        assert!((0.93..=0.96).contains(&out.success_probability));
        let s = out.state().unwrap();
        assert!(s.amplitude(&[0, 2]).re > 0.0 && s.amplitude(&[2, 0]).re < 0.0);
    }

    #[test]
    fn entropy_of_pure_and_bell_states() {
        let psi = tmss(default_params(), 24).unwrap();
        assert!(von_neumann_entropy(&psi.to_density()).unwrap().abs() < 1e-10);
        let dims = FockDims::uniform(2, 2).unwrap();
        let mut amps = CVector::zeros(9);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[dims.index_of(&[1, 0])] = C64::new(h, 0.0);
        amps[dims.index_of(&[0, 1])] = C64::new(h, 0.0);
        let phi = FockRegister::new(dims, amps).unwrap();
        assert!((marginal_entropy(&phi, 0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_reproduces_closed_form_nlpa() {
        let p = default_params();
        for (photons, aux) in [(1, (1, 0)), (2, (1, 1))] {
            for t in [0.01, 0.3, 0.8] {
                let closed = nlpa_state(photons, p, t, 24).unwrap();
                let brute = protocol_oracle(aux, (0, 0), t, 0.5, p, 24).unwrap();
                let f = brute.state().unwrap().fidelity(closed.state().unwrap()).unwrap();
                assert!(f >= 1.0 - 1e-8, "photons {photons} T {t}: fidelity {f}");
                assert!((brute.success_probability - closed.success_probability).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn oracle_transparent_network_is_identity() {
        let p = default_params();
        let psi = tmss(p, 10).unwrap();
        for aux in [(1, 0), (1, 1), (2, 0)] {
            let out = protocol_oracle(aux, aux, 1.0, 1.0, p, 10).unwrap();
            assert!((out.success_probability - 1.0).abs() < 1e-12);
            assert!(out.state().unwrap().fidelity(&psi).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn oracle_rejects_small_cutoff() {
        let strong = SqueezeParams::new(1.5).unwrap();
        match protocol_oracle((1, 0), (0, 0), 0.5, 0.5, strong, 6) {
            Err(Error::CutoffTooSmall { needed, .. }) => assert!(needed > 6),
            other => panic!("expected cutoff error, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn nlpa_weights_sum_to_one(t in 0.0f64..=1.0, ns in 0.0f64..0.07) {
            let p = SqueezeParams::from_mean_photons(ns).unwrap();
            prop_assume!(p.lambda() * t <= 0.25);
            for photons in [1, 2] {
                let out = nlpa_state(photons, p, t, 24).unwrap();
                prop_assert!(out.leakage < 1e-10);
                prop_assert!((0.0..=1.0).contains(&out.success_probability));
            }
        }

        #[test]
        fn outcome_probabilities_are_bounded(
            n in 0usize..3, np in 0usize..3, t in 0.0f64..=1.0, both in any::<bool>()
        ) {
            let psi = tmss(SqueezeParams::from_mean_photons(0.3).unwrap(), 16).unwrap();
            let target = if both { TargetModes::Both } else { TargetModes::B };
            let out = apply_local_ngo(&psi, &NgoSpec::new(n, np, t, target).unwrap()).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&out.success_probability));
            if let Some(s) = &out.state {
                prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-10);
            }
        }

        #[test]
        fn marginal_entropies_agree(n in 0usize..3, np in 0usize..3, t in 0.05f64..0.95) {
            let psi = tmss(SqueezeParams::from_mean_photons(0.2).unwrap(), 14).unwrap();
            let out = apply_local_ngo(&psi, &NgoSpec::new(n, np, t, TargetModes::B).unwrap()).unwrap();
            let s = out.state().unwrap();
            let (ea, eb) = (marginal_entropy(s, 0).unwrap(), marginal_entropy(s, 1).unwrap());
            prop_assert!((ea - eb).abs() <= 1e-9);
        }

        #[test]
        fn lambda_increases_with_r(r1 in 0.0f64..3.0, dr in 1e-6f64..1.0) {
            let a = SqueezeParams::new(r1).unwrap();
            let b = SqueezeParams::new(r1 + dr).unwrap();
            prop_assert!(b.lambda() > a.lambda());
        }
    }
}

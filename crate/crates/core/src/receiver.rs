//! Receiver-level analysis: idler/return observables, hypothesis moments and
//! the Gaussian threshold test over `K` mode pairs.

use std::fmt;
use std::str::FromStr;

use libm::erfc;

use crate::channel::{ChannelParams, HypothesisModel};
use crate::engineer::ConditionalOutcome;
use crate::error::{Error, Result};
use crate::fock::{annihilation, embed, nonzeros, sparse_product, CMatrix, DensityOperator, FockDims, C64};

/// Largest imaginary residue accepted in an expectation value.
pub const MOMENT_IMAG_TOL: f64 = 1e-8;
/// Variances down to `-VARIANCE_TOL` are clamped to zero.
pub const VARIANCE_TOL: f64 = 1e-9;

/// Receiver observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Double homodyne detection, `n_A - (a_B† a_A† + a_B a_A) + a_B a_B†`.
    Dhd,
    /// 50:50 interference then photon-count difference, `a_A† a_B + a_B† a_A`.
    PhotonDiff,
}

impl Scheme {
    pub fn observable(self, n_max: usize) -> Result<CMatrix> {
        match self {
            Scheme::Dhd => observable_dhd(n_max),
            Scheme::PhotonDiff => observable_photon_diff(n_max),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Dhd => "dhd",
            Scheme::PhotonDiff => "photon_diff",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dhd" => Ok(Scheme::Dhd),
            "photon_diff" => Ok(Scheme::PhotonDiff),
            other => Err(Error::invalid(format!("unknown scheme '{other}' (expected dhd or photon_diff)"))),
        }
    }
}

/// Hypothesis moments and the resulting threshold test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReceiverStats {
    pub m0: f64,
    pub m1: f64,
    pub v0: f64,
    pub v1: f64,
    pub snr_linear: f64,
    pub snr_db: f64,
    pub p_error: f64,
    pub threshold: f64,
    pub copies: u64,
    /// Both variances vanish with distinct means: error-free decision.
    pub perfect: bool,
}

fn ladders(n_max: usize) -> Result<(CMatrix, CMatrix)> {
    let dims = FockDims::uniform(2, n_max)?;
    let a = annihilation(n_max)?;
    Ok((embed(a.matrix(), 0, &dims)?, embed(a.matrix(), 1, &dims)?))
}

/// `n_A - (a_B† a_A† + a_B a_A) + a_B a_B†` on the (idler, return) space.
pub fn observable_dhd(n_max: usize) -> Result<CMatrix> {
    let (a_a, a_b) = ladders(n_max)?;
    let (ad_a, ad_b) = (a_a.adjoint(), a_b.adjoint());
    let n_a = sparse_product(&ad_a, &a_a);
    let pair = sparse_product(&ad_b, &ad_a) + sparse_product(&a_b, &a_a);
    Ok(n_a - pair + sparse_product(&a_b, &ad_b))
}

/// `a_A† a_B + a_B† a_A` on the (idler, return) space.
pub fn observable_photon_diff(n_max: usize) -> Result<CMatrix> {
    let (a_a, a_b) = ladders(n_max)?;
    Ok(sparse_product(&a_a.adjoint(), &a_b) + sparse_product(&a_b.adjoint(), &a_a))
}

/// `(⟨O⟩, ⟨O²⟩ - ⟨O⟩²)` in state `rho`.
pub fn moments(rho: &DensityOperator, obs: &CMatrix) -> Result<(f64, f64)> {
    if obs.nrows() != rho.dim() || obs.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: obs.nrows(),
        });
    }
    let square = sparse_product(obs, obs);
    let expect = |o: &CMatrix| -> C64 {
        nonzeros(o)
            .into_iter()
            .map(|(i, j, v)| rho.matrix()[(j, i)] * v)
            .sum()
    };
    let (first, second) = (expect(obs), expect(&square));
    for z in [first, second] {
        if z.im.abs() > MOMENT_IMAG_TOL {
            return Err(Error::Numerical(format!(
                "expectation value has imaginary part {:.3e}",
                z.im
            )));
        }
    }
    let mean = first.re;
    let var = clamp_variance(second.re - mean * mean)?;
    Ok((mean, var))
}

fn clamp_variance(v: f64) -> Result<f64> {
    if v < -VARIANCE_TOL {
        return Err(Error::Numerical(format!("negative variance {v:.3e}")));
    }
    Ok(v.max(0.0))
}

/// Threshold test on the sum of `K` independent measurements in the
/// Gaussian regime.
pub fn snr_and_error(m0: f64, m1: f64, v0: f64, v1: f64, copies: u64) -> Result<ReceiverStats> {
    if copies < 1 {
        return Err(Error::invalid("copy count K must be >= 1"));
    }
    let (v0, v1) = (clamp_variance(v0)?, clamp_variance(v1)?);
    let k = copies as f64;
    let (s0, s1) = (v0.sqrt(), v1.sqrt());
    let spread = s0 + s1;
    let gap = (m0 - m1).abs();

    if spread == 0.0 {
        if gap == 0.0 {
            return Err(Error::invalid("both variances vanish and the means coincide"));
        }
        return Ok(ReceiverStats {
            m0,
            m1,
            v0,
            v1,
            snr_linear: f64::INFINITY,
            snr_db: f64::INFINITY,
            p_error: 0.0,
            threshold: k * (m0 + m1) / 2.0,
            copies,
            perfect: true,
        });
    }

    let snr_linear = k * gap * gap / (2.0 * spread * spread);
    let snr_db = if snr_linear > 0.0 {
        10.0 * snr_linear.log10()
    } else {
        f64::NEG_INFINITY
    };
    let p_error = 0.5 * erfc(k.sqrt() * gap / (std::f64::consts::SQRT_2 * spread));
    let threshold = k * (s1 * m0 + s0 * m1) / spread;
    Ok(ReceiverStats {
        m0,
        m1,
        v0,
        v1,
        snr_linear,
        snr_db,
        p_error,
        threshold,
        copies,
        perfect: false,
    })
}

/// Hypothesis channels and observable prepared once for repeated use.
#[derive(Clone, Debug)]
pub struct Receiver {
    model: HypothesisModel,
    observable: CMatrix,
    scheme: Scheme,
}

impl Receiver {
    pub fn new(params: ChannelParams, scheme: Scheme, n_max: usize) -> Result<Self> {
        Ok(Self {
            model: HypothesisModel::new(params, n_max)?,
            observable: scheme.observable(n_max)?,
            scheme,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn stats(&self, probe: &DensityOperator, copies: u64) -> Result<ReceiverStats> {
        let (rho0, rho1) = self.model.pair(probe)?;
        let (m0, v0) = moments(&rho0, &self.observable)?;
        let (m1, v1) = moments(&rho1, &self.observable)?;
        snr_and_error(m0, m1, v0, v1, copies)
    }
}

/// Builds the hypothesis pair for `probe`, measures `scheme` and returns the
/// threshold-test statistics for `copies` mode pairs.
pub fn receiver_pipeline(
    probe: &ConditionalOutcome,
    params: &ChannelParams,
    scheme: Scheme,
    copies: u64,
) -> Result<ReceiverStats> {
    let rho = probe.density()?;
    Receiver::new(*params, scheme, rho.dims().cutoff(1))?.stats(&rho, copies)
}

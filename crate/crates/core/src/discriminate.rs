//! Distinguishability of the hypothesis pair: single-copy Helstrom error,
//! the quantum Chernoff coefficient `Q = min_s Tr(ρ₀^s ρ₁^{1-s})`, K-copy
//! error bounds and heralding-weighted error exponents.

use crate::error::{Error, Result};
use crate::fock::{hermitian_power, power_values, trace_norm, trace_of_product, DensityOperator};
use crate::spectral::Spectrum;

/// Points of the uniform `s` grid scanned before refinement.
pub const S_GRID_POINTS: usize = 101;
/// Width of the final golden-section bracket.
pub const S_TOLERANCE: f64 = 1e-6;
/// Largest imaginary part tolerated in `Tr(ρ₀^s ρ₁^{1-s})`.
pub const IMAG_TOL: f64 = 1e-9;
/// Profiles whose grid values span less than this are treated as flat.
const FLAT_TOL: f64 = 1e-13;

/// Result of the Chernoff minimization.
#[derive(Clone, Debug)]
pub struct ChernoffResult {
    pub q_value: f64,
    pub s_star: f64,
    /// `(s, f(s))` on the uniform grid.
    pub profile: Vec<(f64, f64)>,
}

impl ChernoffResult {
    /// Smallest second difference of `ln f` on the grid; non-negative for a
    /// log-convex profile.
    pub fn log_convexity_defect(&self) -> f64 {
        self.profile
            .windows(3)
            .map(|w| w[0].1.ln() - 2.0 * w[1].1.ln() + w[2].1.ln())
            .fold(f64::INFINITY, f64::min)
    }
}

/// One point of a K-copy error curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CopyPoint {
    pub copies: u64,
    pub p_error: f64,
    pub log10_p_error: f64,
}

/// Everything computed for one hypothesis pair.
#[derive(Clone, Debug)]
pub struct DiscriminationReport {
    pub q_value: f64,
    pub s_star: f64,
    pub helstrom_single_copy: f64,
    pub exponent: f64,
    pub gain: f64,
    pub copies_curve: Vec<CopyPoint>,
}

impl DiscriminationReport {
    /// Builds the full report. `reference_exponent` is the TMSS exponent used
    /// for the gain ratio; `None` marks the pair as the reference itself
    /// (gain 1).
    pub fn build(
        rho0: &DensityOperator,
        rho1: &DensityOperator,
        success_probability: f64,
        weighted: bool,
        reference_exponent: Option<f64>,
        copies: &[u64],
    ) -> Result<Self> {
        let chernoff = chernoff_profile(rho0, rho1)?;
        let exponent = error_exponent(chernoff.q_value, success_probability, weighted)?;
        let gain = match reference_exponent {
            Some(r) => gain_ratio(exponent, r)?,
            None => 1.0,
        };
        Ok(Self {
            q_value: chernoff.q_value,
            s_star: chernoff.s_star,
            helstrom_single_copy: helstrom_error(rho0, rho1)?,
            exponent,
            gain,
            copies_curve: error_curve(chernoff.q_value, copies)?,
        })
    }
}

fn check_pair(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<()> {
    if rho0.dims() != rho1.dims() {
        return Err(Error::DimensionMismatch {
            expected: rho0.dim(),
            found: rho1.dim(),
        });
    }
    Ok(())
}

/// Minimum single-copy error `½(1 - ½‖ρ₁ - ρ₀‖₁)` for equal priors.
pub fn helstrom_error(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<f64> {
    check_pair(rho0, rho1)?;
    let tn = trace_norm(&(rho1.matrix() - rho0.matrix()))?;
    Ok(0.5 * (1.0 - 0.5 * tn))
}

/// `(Q, s*)`.
pub fn chernoff_q(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<(f64, f64)> {
    let r = chernoff_profile(rho0, rho1)?;
    Ok((r.q_value, r.s_star))
}

/// Grid scan of `f(s) = Tr(ρ₀^s ρ₁^{1-s})`, golden-section refinement around
/// the grid minimum, and an explicit-matrix cross-check at `s*`.
pub fn chernoff_profile(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<ChernoffResult> {
    check_pair(rho0, rho1)?;
    let (spec0, spec1) = (rho0.spectrum(), rho1.spectrum());
    let (a, b) = (spec0.clamped_values(), spec1.clamped_values());
    let overlaps = spec0.overlaps(&spec1);
    let f = |s: f64| -> f64 {
        let pa = power_values(&a, s);
        let pb = power_values(&b, 1.0 - s);
        overlaps.iter().map(|&(i, j, w)| pa[i] * pb[j] * w).sum()
    };

    let profile: Vec<(f64, f64)> = (0..S_GRID_POINTS)
        .map(|i| {
            let s = i as f64 / (S_GRID_POINTS - 1) as f64;
            (s, f(s))
        })
        .collect();
    let (lo, hi) = profile
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)));

    let (s_star, q_value) = if hi - lo <= FLAT_TOL * hi.abs().max(1.0) {
        (0.5, f(0.5))
    } else {
        // first index attaining the minimum
        let i = profile
            .iter()
            .enumerate()
            .fold(0, |best, (k, &(_, v))| if v < profile[best].1 { k } else { best });
        let left = profile[i.saturating_sub(1)].0;
        let right = profile[(i + 1).min(S_GRID_POINTS - 1)].0;
        let (s, v) = golden_section(&f, left, right, S_TOLERANCE);
        if v <= profile[i].1 {
            (s, v)
        } else {
            profile[i]
        }
    };

    cross_check(rho0, rho1, s_star, q_value)?;
    Ok(ChernoffResult {
        q_value,
        s_star,
        profile,
    })
}

fn cross_check(rho0: &DensityOperator, rho1: &DensityOperator, s: f64, expected: f64) -> Result<()> {
    let p0 = hermitian_power(rho0.matrix(), s)?;
    let p1 = hermitian_power(rho1.matrix(), 1.0 - s)?;
    let tr = trace_of_product(&p0, &p1);
    if tr.im.abs() > IMAG_TOL {
        return Err(Error::Numerical(format!(
            "Tr(ρ₀^s ρ₁^(1-s)) has imaginary part {:.3e} at s = {s}",
            tr.im
        )));
    }
    if (tr.re - expected).abs() > 1e-9 {
        return Err(Error::Numerical(format!(
            "Chernoff trace mismatch at s = {s}: spectral {expected}, explicit {}",
            tr.re
        )));
    }
    Ok(())
}

/// Minimizes a unimodal `f` on `[a, b]` until the bracket is narrower than
/// `tol`; returns the best point seen.
pub fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `P_err(K) = ½ Q^K`, evaluated through `log₁₀` so large `K` cannot
/// underflow the stored logarithm.
pub fn error_curve(q_value: f64, copies: &[u64]) -> Result<Vec<CopyPoint>> {
    if !(q_value > 0.0 && q_value <= 1.0 + 1e-9) {
        return Err(Error::invalid(format!("Chernoff coefficient must lie in (0, 1], got {q_value}")));
    }
    let lq = q_value.min(1.0).log10();
    Ok(copies
        .iter()
        .map(|&k| {
            let log10_p_error = 0.5f64.log10() + k as f64 * lq;
            CopyPoint {
                copies: k,
                p_error: 10f64.powf(log10_p_error),
                log10_p_error,
            }
        })
        .collect())
}

/// `ε = -P ln Q` (weighted) or `-ln Q` (unweighted reference).
pub fn error_exponent(q_value: f64, success_probability: f64, weighted: bool) -> Result<f64> {
    if !(0.0..=1.0 + 1e-12).contains(&success_probability) {
        return Err(Error::invalid(format!(
            "success probability must lie in [0, 1], got {success_probability}"
        )));
    }
    if q_value <= 0.0 {
        return Err(Error::invalid("Chernoff coefficient 0 gives an infinite (saturated) exponent"));
    }
    if q_value > 1.0 + 1e-9 {
        return Err(Error::invalid(format!("Chernoff coefficient must be <= 1, got {q_value}")));
    }
    let raw = -q_value.min(1.0).ln();
    Ok(if weighted { success_probability * raw } else { raw })
}

/// `G = ε_α / ε_TMSS`.
pub fn gain_ratio(exponent_alpha: f64, exponent_tmss: f64) -> Result<f64> {
    if !(exponent_tmss > 0.0) {
        return Err(Error::invalid(format!(
            "reference exponent must be positive, got {exponent_tmss}"
        )));
    }
    Ok(exponent_alpha / exponent_tmss)
}

/// Classical Chernoff coefficient of two commuting states from their joint
/// eigenvalue lists, by dense grid search. Used as a cross-check.
pub fn classical_chernoff(p: &[f64], q: &[f64], grid: usize) -> f64 {
    (0..=grid)
        .map(|i| {
            let s = i as f64 / grid as f64;
            let ps = power_values(p, s);
            let qs = power_values(q, 1.0 - s);
            ps.iter().zip(&qs).map(|(a, b)| a * b).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a density operator (convenience for reports).
pub fn eigenvalues(rho: &DensityOperator) -> Vec<f64> {
    Spectrum::of_hermitian(rho.matrix()).values()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{CMatrix, CVector, FockDims, FockRegister, C64};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> DensityOperator {
        let d = CVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)));
        DensityOperator::new(FockDims::single(v.len() - 1).unwrap(), CMatrix::from_diagonal(&d)).unwrap()
    }

    fn random_rho(dim: usize, rank: usize, rng: &mut impl Rng) -> DensityOperator {
        let mut m = CMatrix::zeros(dim, dim);
        for _ in 0..rank {
            let v = CVector::from_fn(dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            m += &v * v.adjoint();
        }
        let tr = m.trace();
        let m = m / tr;
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        DensityOperator::new(FockDims::single(dim - 1).unwrap(), m).unwrap()
    }

    #[test]
    fn helstrom_examples() {
        let a = diag(&[0.8, 0.2]);
        let b = diag(&[0.2, 0.8]);
        assert!((helstrom_error(&a, &a).unwrap() - 0.5).abs() < 1e-15);
        assert!((helstrom_error(&a, &b).unwrap() - 0.2).abs() < 1e-14);
        let d = FockDims::single(1).unwrap();
        let x = FockRegister::basis(d.clone(), &[0]).unwrap().to_density();
        let y = FockRegister::basis(d, &[1]).unwrap().to_density();
        assert!(helstrom_error(&x, &y).unwrap().abs() < 1e-15);
    }

    #[test]
    fn chernoff_identical_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_rho(5, 3, &mut rng);
        let r = chernoff_profile(&rho, &rho).unwrap();
        assert!((r.q_value - 1.0).abs() < 1e-10);
        assert_eq!(r.s_star, 0.5);
    }

    #[test]
    fn chernoff_classical_coin() {
        let a = diag(&[0.8, 0.2]);
        let b = diag(&[0.2, 0.8]);
        let (q, s) = chernoff_q(&a, &b).unwrap();
        let oracle = classical_chernoff(&[0.8, 0.2], &[0.2, 0.8], 100_000);
        assert!((q - 0.8).abs() < 1e-12);
        assert!((q - oracle).abs() < 1e-9);
        assert!((s - 0.5).abs() < 1e-5);
        let r = chernoff_profile(&a, &b).unwrap();
        assert!((r.profile[0].1 - 1.0).abs() < 1e-8);
        assert!((r.profile[100].1 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn error_curve_examples() {
        for p in error_curve(1.0, &[1, 10, 1000]).unwrap() {
            assert!((p.p_error - 0.5).abs() < 1e-15);
        }
        let c = error_curve(0.99, &[100]).unwrap();
        assert!((c[0].p_error - 0.5 * 0.99f64.powi(100)).abs() < 1e-14);
        assert!((c[0].p_error - 0.18302).abs() < 1e-5);
        let far = error_curve(0.5, &[10_000_000]).unwrap();
        assert!(far[0].log10_p_error.is_finite());
        assert!(error_curve(0.0, &[1]).is_err());
    }

    #[test]
    fn exponent_and_gain_examples() {
        assert_eq!(error_exponent(1.0, 0.3, true).unwrap(), 0.0);
        assert!((error_exponent((-1f64).exp(), 1.0, true).unwrap() - 1.0).abs() < 1e-15);
        assert!((error_exponent((-2f64).exp(), 0.5, true).unwrap() - 1.0).abs() < 1e-15);
        assert!((error_exponent((-2f64).exp(), 0.5, false).unwrap() - 2.0).abs() < 1e-15);
        assert!(error_exponent(0.0, 0.5, true).is_err());
        assert_eq!(gain_ratio(0.7, 0.7).unwrap(), 1.0);
        assert_eq!(gain_ratio(0.0, 0.7).unwrap(), 0.0);
        assert!(gain_ratio(0.1, 0.0).is_err());
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section(&|x: f64| (x - 0.3141).powi(2) + 2.0, 0.0, 1.0, 1e-7);
        assert!((x - 0.3141).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn chernoff_properties(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_rho(6, 3, &mut rng);
            let b = random_rho(6, 4, &mut rng);
            let ab = chernoff_profile(&a, &b).unwrap();
            let ba = chernoff_profile(&b, &a).unwrap();
            prop_assert!((ab.q_value - ba.q_value).abs() <= 1e-8);
            prop_assert!((ab.s_star - (1.0 - ba.s_star)).abs() <= 1e-4);
            prop_assert!(ab.log_convexity_defect() >= -1e-8);
            let grid_min = ab.profile.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            prop_assert!(ab.q_value <= grid_min + 1e-10);
            prop_assert!(helstrom_error(&a, &b).unwrap() <= 0.5 * ab.q_value + 1e-10);
        }

        #[test]
        fn commuting_pairs_match_classical(
            p in proptest::collection::vec(0.01f64..1.0, 4),
            q in proptest::collection::vec(0.01f64..1.0, 4),
        ) {
            let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
            let p: Vec<f64> = p.iter().map(|x| x / sp).collect();
            let q: Vec<f64> = q.iter().map(|x| x / sq).collect();
            let (qv, s) = chernoff_q(&diag(&p), &diag(&q)).unwrap();
            let direct: f64 = p.iter().zip(&q).map(|(a, b)| a.powf(s) * b.powf(1.0 - s)).sum();
            prop_assert!((qv - direct).abs() <= 1e-9);
            let oracle = classical_chernoff(&p, &q, 20_000);
            prop_assert!(qv <= oracle + 1e-12);
            prop_assert!(oracle - qv <= 1e-6);
        }

        #[test]
        fn error_curve_is_monotone(q in 0.01f64..=1.0) {
            let c = error_curve(q, &[1, 2, 5, 10, 100, 1000]).unwrap();
            for w in c.windows(2) {
                prop_assert!(w[1].p_error <= w[0].p_error);
            }
        }
    }
}

//! Dense linear algebra over truncated single- and multi-mode Fock spaces.
//!
//! Multi-mode indices are mixed-radix and big-endian: the leftmost mode is
//! the most significant digit, so for two modes with cutoff `n_max` the basis
//! state `|i, j⟩` lives at `i * (n_max + 1) + j`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::Spectrum;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest `|ρ - ρ†|` entry accepted for a density operator.
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
/// Largest `|M - M†|` entry accepted by the matrix functions.
pub const INPUT_HERMITIAN_TOL: f64 = 1e-8;
/// Most negative eigenvalue accepted for a density operator.
pub const PSD_TOL: f64 = 1e-10;
/// Truncation leakage above this level is logged as a warning.
pub const LEAKAGE_WARN: f64 = 1e-6;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Per-mode photon-number cutoffs of a truncated Fock space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FockDims {
    cutoffs: Vec<usize>,
}

impl FockDims {
    pub fn new(cutoffs: Vec<usize>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::invalid("at least one mode is required"));
        }
        if let Some(mode) = cutoffs.iter().position(|&c| c < 1) {
            return Err(Error::invalid(format!(
                "mode {mode} has cutoff 0; every cutoff must be at least 1"
            )));
        }
        Ok(Self { cutoffs })
    }

    pub fn single(n_max: usize) -> Result<Self> {
        Self::new(vec![n_max])
    }

    pub fn uniform(modes: usize, n_max: usize) -> Result<Self> {
        Self::new(vec![n_max; modes])
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn cutoff(&self, mode: usize) -> usize {
        self.cutoffs[mode]
    }

    pub fn mode_dim(&self, mode: usize) -> usize {
        self.cutoffs[mode] + 1
    }

    pub fn total_dim(&self) -> usize {
        self.cutoffs.iter().map(|c| c + 1).product()
    }

    /// Stride of each mode in the flattened index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.n_modes()];
        for m in (0..self.n_modes().saturating_sub(1)).rev() {
            strides[m] = strides[m + 1] * self.mode_dim(m + 1);
        }
        strides
    }

    /// Flattened index of a multi-mode occupation pattern.
    ///
    /// Panics if `levels` has the wrong length or exceeds a cutoff.
    pub fn index_of(&self, levels: &[usize]) -> usize {
        assert_eq!(levels.len(), self.n_modes(), "one level per mode");
        levels.iter().zip(&self.cutoffs).fold(0, |acc, (&l, &c)| {
            assert!(l <= c, "level {l} exceeds cutoff {c}");
            acc * (c + 1) + l
        })
    }

    pub fn levels_of(&self, mut index: usize) -> Vec<usize> {
        let mut levels = vec![0; self.n_modes()];
        for m in (0..self.n_modes()).rev() {
            levels[m] = index % self.mode_dim(m);
            index /= self.mode_dim(m);
        }
        levels
    }

    /// Modes of `self` followed by the modes of `other`.
    pub fn concat(&self, other: &FockDims) -> FockDims {
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.extend_from_slice(&other.cutoffs);
        FockDims { cutoffs }
    }

    pub fn subset(&self, modes: &[usize]) -> FockDims {
        FockDims {
            cutoffs: modes.iter().map(|&m| self.cutoffs[m]).collect(),
        }
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.total_dim(),
                found,
            });
        }
        Ok(())
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(Error::invalid(format!(
                "mode {mode} out of range for {} modes",
                self.n_modes()
            )));
        }
        Ok(())
    }
}

/// Kronecker product, with the left factor's modes first.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// A state vector over a multi-mode truncated Fock basis.
#[derive(Clone, Debug)]
pub struct FockRegister {
    dims: FockDims,
    amplitudes: CVector,
}

impl FockRegister {
    pub fn new(dims: FockDims, amplitudes: CVector) -> Result<Self> {
        dims.check_dim(amplitudes.len())?;
        Ok(Self { dims, amplitudes })
    }

    pub fn zeros(dims: FockDims) -> Self {
        let amplitudes = CVector::zeros(dims.total_dim());
        Self { dims, amplitudes }
    }

    /// The number state `|levels⟩`.
    pub fn basis(dims: FockDims, levels: &[usize]) -> Result<Self> {
        if levels.len() != dims.n_modes() || levels.iter().zip(dims.cutoffs()).any(|(l, c)| l > c) {
            return Err(Error::invalid(format!(
                "levels {levels:?} do not fit cutoffs {:?}",
                dims.cutoffs()
            )));
        }
        let mut reg = Self::zeros(dims);
        let idx = reg.dims.index_of(levels);
        reg.amplitudes[idx] = C64::new(1.0, 0.0);
        Ok(reg)
    }

    pub fn dims(&self) -> &FockDims {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn amplitude(&self, levels: &[usize]) -> C64 {
        self.amplitudes[self.dims.index_of(levels)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Unit-norm copy together with the original squared norm, or `None`
    /// for the zero vector.
    pub fn normalized(&self) -> Option<(Self, f64)> {
        let n2 = self.norm_sqr();
        if n2 <= 0.0 {
            return None;
        }
        let scaled = self.amplitudes.unscale(n2.sqrt());
        Some((
            Self {
                dims: self.dims.clone(),
                amplitudes: scaled,
            },
            n2,
        ))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockRegister) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.total_dim(),
                found: other.dims.total_dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Overlap `|⟨a|b⟩|² / (‖a‖² ‖b‖²)`, insensitive to global phase.
    pub fn fidelity(&self, other: &FockRegister) -> Result<f64> {
        let overlap = self.inner(other)?.norm_sqr();
        Ok(overlap / (self.norm_sqr() * other.norm_sqr()))
    }

    pub fn to_density(&self) -> DensityOperator {
        let matrix = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator {
            dims: self.dims.clone(),
            matrix,
        }
    }

    /// Reduced density operator on `keep`, computed without forming the
    /// full projector.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        let split = ModeSplit::new(&self.dims, keep)?;
        let mut psi = CMatrix::zeros(split.kept_dim, split.traced_dim);
        for (full, &(k, t)) in split.map.iter().enumerate() {
            psi[(k, t)] = self.amplitudes[full];
        }
        Ok(DensityOperator {
            dims: self.dims.subset(&split.keep),
            matrix: &psi * psi.adjoint(),
        })
    }

    /// Applies a single-mode operator to `mode`.
    pub fn apply_mode_operator(&self, mode: usize, op: &CMatrix) -> Result<Self> {
        self.dims.check_mode(mode)?;
        let d = self.dims.mode_dim(mode);
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: op.nrows(),
            });
        }
        let stride = self.dims.strides()[mode];
        let entries = nonzeros(op);
        let mut out = CVector::zeros(self.amplitudes.len());
        for base in 0..self.amplitudes.len() {
            if (base / stride) % d != 0 {
                continue;
            }
            for &(r, c, v) in &entries {
                out[base + r * stride] += v * self.amplitudes[base + c * stride];
            }
        }
        Ok(Self {
            dims: self.dims.clone(),
            amplitudes: out,
        })
    }

    /// Applies a two-mode operator acting on the ordered pair
    /// `(first, second)`; `u` is indexed as `l_first * d_second + l_second`.
    pub fn apply_two_mode(&self, first: usize, second: usize, u: &CMatrix) -> Result<Self> {
        self.dims.check_mode(first)?;
        self.dims.check_mode(second)?;
        if first == second {
            return Err(Error::invalid("two-mode operator needs distinct modes"));
        }
        let (d1, d2) = (self.dims.mode_dim(first), self.dims.mode_dim(second));
        if u.nrows() != d1 * d2 || u.ncols() != d1 * d2 {
            return Err(Error::DimensionMismatch {
                expected: d1 * d2,
                found: u.nrows(),
            });
        }
        let strides = self.dims.strides();
        let (s1, s2) = (strides[first], strides[second]);
        let entries = nonzeros(u);
        let offset = |pair: usize| (pair / d2) * s1 + (pair % d2) * s2;
        let mut out = CVector::zeros(self.amplitudes.len());
        for base in 0..self.amplitudes.len() {
            if (base / s1) % d1 != 0 || (base / s2) % d2 != 0 {
                continue;
            }
            for &(r, c, v) in &entries {
                out[base + offset(r)] += v * self.amplitudes[base + offset(c)];
            }
        }
        Ok(Self {
            dims: self.dims.clone(),
            amplitudes: out,
        })
    }

    /// Contracts `mode` with the bra `⟨level|`, removing that mode.
    pub fn project_mode(&self, mode: usize, level: usize) -> Result<Self> {
        self.dims.check_mode(mode)?;
        if self.dims.n_modes() < 2 {
            return Err(Error::invalid("cannot project the only mode"));
        }
        if level > self.dims.cutoff(mode) {
            return Err(Error::invalid(format!(
                "level {level} exceeds cutoff {}",
                self.dims.cutoff(mode)
            )));
        }
        let keep: Vec<usize> = (0..self.dims.n_modes()).filter(|&m| m != mode).collect();
        let dims = self.dims.subset(&keep);
        let mut out = CVector::zeros(dims.total_dim());
        for (full, amp) in self.amplitudes.iter().enumerate() {
            let levels = self.dims.levels_of(full);
            if levels[mode] == level {
                let rest: Vec<usize> = keep.iter().map(|&m| levels[m]).collect();
                out[dims.index_of(&rest)] = *amp;
            }
        }
        Ok(Self {
            dims,
            amplitudes: out,
        })
    }
}

impl Tensor for FockRegister {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            dims: self.dims.concat(&other.dims),
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }
}

/// A Hermitian density operator over a truncated Fock basis.
///
/// The trace is not forced to one: truncation leakage is reported by
/// [`DensityOperator::leakage`] rather than renormalized away.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    dims: FockDims,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(dims: FockDims, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid(format!(
                "density matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        dims.check_dim(matrix.nrows())?;
        let dev = hermitian_deviation(&matrix);
        if dev > DENSITY_HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { dims, matrix })
    }

    /// Construction path for matrices that are Hermitian by construction.
    pub(crate) fn from_parts(dims: FockDims, matrix: CMatrix) -> Self {
        debug_assert_eq!(dims.total_dim(), matrix.nrows());
        Self { dims, matrix }
    }

    pub fn dims(&self) -> &FockDims {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Probability weight missing from the truncated space, `1 - Tr ρ`.
    pub fn leakage(&self) -> f64 {
        1.0 - self.trace()
    }

    /// Emits a log warning if the leakage exceeds [`LEAKAGE_WARN`].
    pub fn warn_on_leakage(&self, what: &str) {
        let leak = self.leakage();
        if leak > LEAKAGE_WARN {
            log::warn!("{what}: truncation leakage {leak:.3e} exceeds {LEAKAGE_WARN:e}");
        }
    }

    /// Reduced operator on the modes in `keep` (any order; output follows
    /// ascending mode order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let split = ModeSplit::new(&self.dims, keep)?;
        let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); split.traced_dim];
        for (full, &(k, t)) in split.map.iter().enumerate() {
            groups[t].push((full, k));
        }
        let mut out = CMatrix::zeros(split.kept_dim, split.kept_dim);
        for group in &groups {
            for &(fi, ki) in group {
                for &(fj, kj) in group {
                    out[(ki, kj)] += self.matrix[(fi, fj)];
                }
            }
        }
        Ok(DensityOperator {
            dims: self.dims.subset(&split.keep),
            matrix: out,
        })
    }

    /// `Tr(ρ O)`.
    pub fn expectation(&self, obs: &CMatrix) -> Result<C64> {
        if obs.nrows() != self.dim() || obs.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: obs.nrows(),
            });
        }
        Ok(trace_of_product(&self.matrix, obs))
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::of_hermitian(&self.matrix)
    }

    /// Checks positivity within [`PSD_TOL`].
    pub fn check_positive(&self) -> Result<()> {
        let min = self.spectrum().min_value();
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }
}

impl Tensor for DensityOperator {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            dims: self.dims.concat(&other.dims),
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }
}

/// A square operator on a single truncated mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeOperator {
    matrix: CMatrix,
}

impl ModeOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() < 2 {
            return Err(Error::invalid("mode operator must be square with dimension >= 2"));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_max(&self) -> usize {
        self.dim() - 1
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> ModeOperator {
        ModeOperator {
            matrix: self.matrix.adjoint(),
        }
    }
}

/// Ladder operator with `⟨n-1|â|n⟩ = √n` on levels `0..=n_max`.
pub fn annihilation(n_max: usize) -> Result<ModeOperator> {
    if n_max < 1 {
        return Err(Error::invalid("annihilation operator needs n_max >= 1"));
    }
    let mut m = CMatrix::zeros(n_max + 1, n_max + 1);
    for n in 1..=n_max {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(ModeOperator { matrix: m })
}

pub fn creation(n_max: usize) -> Result<ModeOperator> {
    Ok(annihilation(n_max)?.adjoint())
}

pub fn number(n_max: usize) -> Result<ModeOperator> {
    if n_max < 1 {
        return Err(Error::invalid("number operator needs n_max >= 1"));
    }
    let diag = CVector::from_fn(n_max + 1, |n, _| C64::new(n as f64, 0.0));
    Ok(ModeOperator {
        matrix: CMatrix::from_diagonal(&diag),
    })
}

/// Lifts a single-mode operator to the full space `dims` as `I ⊗ op ⊗ I`.
pub fn embed(op: &CMatrix, mode: usize, dims: &FockDims) -> Result<CMatrix> {
    dims.check_mode(mode)?;
    if op.nrows() != dims.mode_dim(mode) {
        return Err(Error::DimensionMismatch {
            expected: dims.mode_dim(mode),
            found: op.nrows(),
        });
    }
    let mut out = CMatrix::identity(1, 1);
    for m in 0..dims.n_modes() {
        out = if m == mode {
            out.kronecker(op)
        } else {
            out.kronecker(&CMatrix::identity(dims.mode_dim(m), dims.mode_dim(m)))
        };
    }
    Ok(out)
}

/// The two-mode generator `A ⊗ B† − A† ⊗ B` (without the angle).
pub fn beam_splitter_generator(dims: &FockDims) -> Result<CMatrix> {
    if dims.n_modes() != 2 {
        return Err(Error::invalid("beam splitter acts on exactly two modes"));
    }
    let (c0, c1) = (dims.cutoff(0), dims.cutoff(1));
    let n = dims.total_dim();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..=c0 {
        for j in 0..=c1 {
            let col = dims.index_of(&[i, j]);
            // A ⊗ B†: |i, j⟩ -> √i √(j+1) |i-1, j+1⟩
            if i >= 1 && j < c1 {
                let v = ((i * (j + 1)) as f64).sqrt();
                g[(dims.index_of(&[i - 1, j + 1]), col)] += C64::new(v, 0.0);
            }
            // −A† ⊗ B: |i, j⟩ -> −√(i+1) √j |i+1, j-1⟩
            if j >= 1 && i < c0 {
                let v = (((i + 1) * j) as f64).sqrt();
                g[(dims.index_of(&[i + 1, j - 1]), col)] -= C64::new(v, 0.0);
            }
        }
    }
    Ok(g)
}

/// `exp[θ (A ⊗ B† − A† ⊗ B)]` on a two-mode truncated space.
///
/// The generator conserves total photon number, so the exponential is taken
/// block by block (scaling-and-squaring Padé on each block). Blocks with
/// total photon number at most `min(cutoffs)` are exact; higher blocks are
/// missing basis states and carry the truncation error.
pub fn beam_splitter_unitary(theta: f64, dims: &FockDims) -> Result<CMatrix> {
    if !theta.is_finite() {
        return Err(Error::invalid(format!("beam splitter angle must be finite, got {theta}")));
    }
    let g = beam_splitter_generator(dims)?;
    let (c0, c1) = (dims.cutoff(0), dims.cutoff(1));
    let n = dims.total_dim();
    let mut u = CMatrix::zeros(n, n);
    for total in 0..=(c0 + c1) {
        let idx: Vec<usize> = (0..=c0)
            .filter(|&i| total >= i && total - i <= c1)
            .map(|i| dims.index_of(&[i, total - i]))
            .collect();
        let k = idx.len();
        let block = CMatrix::from_fn(k, k, |r, c| g[(idx[r], idx[c])] * theta);
        let eb = block.exp();
        for r in 0..k {
            for c in 0..k {
                u[(idx[r], idx[c])] = eb[(r, c)];
            }
        }
    }
    Ok(u)
}

/// Angle with `cos²θ = transmissivity`.
pub fn transmissivity_angle(transmissivity: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&transmissivity) {
        return Err(Error::invalid(format!(
            "transmissivity must lie in [0, 1], got {transmissivity}"
        )));
    }
    Ok(transmissivity.sqrt().acos())
}

/// Thermal state `Σ n̄ⁿ/(1+n̄)ⁿ⁺¹ |n⟩⟨n|` truncated at `n_max`; the missing
/// tail `(n̄/(1+n̄))^(n_max+1)` shows up as leakage.
pub fn thermal_state(n_bar: f64, n_max: usize) -> Result<DensityOperator> {
    let weights = thermal_weights(n_bar, n_max)?;
    let diag = CVector::from_iterator(n_max + 1, weights.into_iter().map(|w| C64::new(w, 0.0)));
    let rho = DensityOperator {
        dims: FockDims::single(n_max.max(1))?,
        matrix: CMatrix::from_diagonal(&diag),
    };
    if n_max < 1 {
        return Err(Error::invalid("thermal state needs n_max >= 1"));
    }
    rho.warn_on_leakage("thermal state");
    Ok(rho)
}

/// Occupation probabilities of a thermal state on levels `0..=n_max`.
pub fn thermal_weights(n_bar: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(n_bar >= 0.0) || !n_bar.is_finite() {
        return Err(Error::invalid(format!("mean photon number must be >= 0, got {n_bar}")));
    }
    let ratio = n_bar / (1.0 + n_bar);
    let mut w = Vec::with_capacity(n_max + 1);
    let mut cur = 1.0 / (1.0 + n_bar);
    for _ in 0..=n_max {
        w.push(cur);
        cur *= ratio;
    }
    Ok(w)
}

/// Tail weight of a thermal state above `n_max`.
pub fn thermal_leakage(n_bar: f64, n_max: usize) -> f64 {
    (n_bar / (1.0 + n_bar)).powi(n_max as i32 + 1)
}

/// Largest entry of `|M - M†|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for c in 0..n {
        for r in c..n {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}

fn check_input_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid("matrix must be square"));
    }
    let dev = hermitian_deviation(m);
    if dev > INPUT_HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// `M^s` for Hermitian positive semidefinite `M` and `s ∈ [0, 1]`.
///
/// Eigenvalues below `1e-12 · λ_max` are clamped to zero and stay zero for
/// every `s`, so `s = 0` yields the projector onto the support.
pub fn hermitian_power(m: &CMatrix, s: f64) -> Result<CMatrix> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("power must lie in [0, 1], got {s}")));
    }
    check_input_hermitian(m)?;
    let spec = Spectrum::of_hermitian(m);
    let mapped = power_values(&spec.clamped_values(), s);
    Ok(spec.reconstruct_with(&mapped))
}

/// Elementwise `λ^s` with the support convention `0^s = 0`.
pub(crate) fn power_values(values: &[f64], s: f64) -> Vec<f64> {
    values
        .iter()
        .map(|&v| if v > 0.0 { v.powf(s) } else { 0.0 })
        .collect()
}

/// Trace norm `Σ |λ_i|` of a Hermitian matrix.
pub fn trace_norm(delta: &CMatrix) -> Result<f64> {
    check_input_hermitian(delta)?;
    Ok(Spectrum::of_hermitian(delta)
        .values()
        .iter()
        .map(|v| v.abs())
        .sum())
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for j in 0..n {
        for i in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Nonzero entries `(row, col, value)` of a matrix.
pub(crate) fn nonzeros(m: &CMatrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != ZERO {
                out.push((r, c, v));
            }
        }
    }
    out
}

/// Sparse product `A · B` for operators with few nonzeros (ladder algebra).
pub fn sparse_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.nrows(), b.ncols());
    let b_entries = nonzeros(b);
    let mut a_by_col: Vec<Vec<(usize, C64)>> = vec![Vec::new(); a.ncols()];
    for (r, c, v) in nonzeros(a) {
        a_by_col[c].push((r, v));
    }
    for (k, j, bv) in b_entries {
        for &(i, av) in &a_by_col[k] {
            out[(i, j)] += av * bv;
        }
    }
    out
}

/// Index bookkeeping for splitting a space into kept and traced modes.
struct ModeSplit {
    keep: Vec<usize>,
    kept_dim: usize,
    traced_dim: usize,
    /// For every full index: (kept index, traced index).
    map: Vec<(usize, usize)>,
}

impl ModeSplit {
    fn new(dims: &FockDims, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::invalid("keep set must not be empty"));
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.len() != keep.len().min(dims.n_modes()) || keep.iter().any(|&m| m >= dims.n_modes()) {
            return Err(Error::invalid(format!(
                "keep set {keep:?} is not a subset of {} modes",
                dims.n_modes()
            )));
        }
        let traced: Vec<usize> = (0..dims.n_modes()).filter(|m| !keep.contains(m)).collect();
        let kd = dims.subset(&keep);
        let td = if traced.is_empty() { None } else { Some(dims.subset(&traced)) };
        let map = (0..dims.total_dim())
            .map(|full| {
                let levels = dims.levels_of(full);
                let k: Vec<usize> = keep.iter().map(|&m| levels[m]).collect();
                let t_index = td.as_ref().map_or(0, |td| {
                    let t: Vec<usize> = traced.iter().map(|&m| levels[m]).collect();
                    td.index_of(&t)
                });
                (kd.index_of(&k), t_index)
            })
            .collect();
        Ok(Self {
            kept_dim: kd.total_dim(),
            traced_dim: td.map_or(1, |t| t.total_dim()),
            keep,
            map,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn random_density(dim: usize, rank: usize, rng: &mut impl Rng) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        for _ in 0..rank {
            let v = CVector::from_fn(dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            m += &v * v.adjoint();
        }
        let tr = m.trace();
        m / tr
    }

    /// Applies `exp(θG)` to a vector by repeated 20-term Taylor steps, with
    /// the generator applied straight from the ladder definition.
    fn taylor_apply(theta: f64, c0: usize, c1: usize, v: &CVector) -> CVector {
        let idx = |i: usize, j: usize| i * (c1 + 1) + j;
        let apply_g = |x: &CVector| {
            let mut y = CVector::zeros(x.len());
            for i in 0..=c0 {
                for j in 0..=c1 {
                    let a = x[idx(i, j)];
                    if i >= 1 && j < c1 {
                        y[idx(i - 1, j + 1)] += a * ((i * (j + 1)) as f64).sqrt();
                    }
                    if j >= 1 && i < c0 {
                        y[idx(i + 1, j - 1)] -= a * (((i + 1) * j) as f64).sqrt();
                    }
                }
            }
            y
        };
        let steps = 32;
        let h = theta / steps as f64;
        let mut state = v.clone();
        for _ in 0..steps {
            let mut term = state.clone();
            let mut acc = state.clone();
            for k in 1..=20 {
                term = apply_g(&term) * re(h / k as f64);
                acc += &term;
            }
            state = acc;
        }
        state
    }

    #[test]
    fn annihilation_matrix_elements() {
        let a = annihilation(2).unwrap();
        assert_eq!(a.dim(), 3);
        assert_eq!(a.matrix()[(0, 1)], re(1.0));
        assert!((a.matrix()[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
        let vac = CVector::from_vec(vec![re(1.0), re(0.0), re(0.0)]);
        assert_eq!(a.matrix() * vac, CVector::zeros(3));
        assert!(annihilation(0).is_err());
    }

    #[test]
    fn beam_splitter_identity_at_zero_angle() {
        let dims = FockDims::uniform(2, 4).unwrap();
        let u = beam_splitter_unitary(0.0, &dims).unwrap();
        assert!((u - CMatrix::identity(25, 25)).camax() < 1e-15);
    }

    #[test]
    fn beam_splitter_single_photon_and_hong_ou_mandel() {
        let dims = FockDims::uniform(2, 4).unwrap();
        let u = beam_splitter_unitary(FRAC_PI_4, &dims).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;

        let one = FockRegister::basis(dims.clone(), &[1, 0]).unwrap();
        let out = &u * one.amplitudes();
        let oracle = taylor_apply(FRAC_PI_4, 4, 4, one.amplitudes());
        assert!((&out - &oracle).camax() < 1e-12);
        // A ⊗ B† moves the photon from A to B with a plus sign
        assert!((out[dims.index_of(&[1, 0])].re - h).abs() < 1e-12);
        assert!((out[dims.index_of(&[0, 1])].re - h).abs() < 1e-12);

        let pair = FockRegister::basis(dims.clone(), &[1, 1]).unwrap();
        let out = &u * pair.amplitudes();
        let oracle = taylor_apply(FRAC_PI_4, 4, 4, pair.amplitudes());
        assert!((&out - &oracle).camax() < 1e-12);
        assert!(out[dims.index_of(&[1, 1])].norm() < 1e-12);
        let (p20, p02) = (out[dims.index_of(&[2, 0])], out[dims.index_of(&[0, 2])]);
        assert!((p20.norm() - h).abs() < 1e-12);
        assert!((p20 + p02).norm() < 1e-12, "amplitudes must have opposite sign");
    }

    #[test]
    fn beam_splitter_matches_taylor_oracle_at_cutoff_30() {
        let dims = FockDims::uniform(2, 30).unwrap();
        let theta = 0.37;
        let u = beam_splitter_unitary(theta, &dims).unwrap();
        let mut worst: f64 = 0.0;
        for total in [0usize, 3, 9, 17, 30] {
            for i in 0..=total {
                let col = dims.index_of(&[i, total - i]);
                let e = CVector::from_fn(dims.total_dim(), |r, _| if r == col { re(1.0) } else { re(0.0) });
                let oracle = taylor_apply(theta, 30, 30, &e);
                worst = worst.max((u.column(col) - oracle).camax());
            }
        }
        assert!(worst < 1e-10, "max deviation {worst:e}");
    }

    #[test]
    fn beam_splitter_is_unitary_below_top_levels() {
        let n_max = 12;
        let dims = FockDims::uniform(2, n_max).unwrap();
        let u = beam_splitter_unitary(1.1, &dims).unwrap();
        let uu = &u * u.adjoint();
        let low: Vec<usize> = (0..dims.total_dim())
            .filter(|&i| dims.levels_of(i).iter().all(|&l| l <= n_max - 8))
            .collect();
        for &r in &low {
            for &c in &low {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((uu[(r, c)] - re(expect)).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn thermal_state_examples() {
        let vac = thermal_state(0.0, 5).unwrap();
        assert_eq!(vac.matrix()[(0, 0)], re(1.0));
        assert!((vac.trace() - 1.0).abs() < 1e-15);

        let th = thermal_state(1.0, 24).unwrap();
        assert!((th.trace() - (1.0 - 2f64.powi(-25))).abs() < 1e-15);
        assert!((th.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((th.leakage() - thermal_leakage(1.0, 24)).abs() < 1e-15);
        assert!(thermal_state(-0.1, 5).is_err());
    }

    #[test]
    fn tensor_examples() {
        let d1 = FockDims::single(2).unwrap();
        let zero = FockRegister::basis(d1.clone(), &[0]).unwrap();
        let one = FockRegister::basis(d1.clone(), &[1]).unwrap();
        let prod = tensor(&zero, &one);
        assert_eq!(prod.dims().cutoffs(), &[2, 2]);
        assert_eq!(prod.amplitude(&[0, 1]), re(1.0));
        assert!((prod.norm_sqr() - 1.0).abs() < 1e-15);

        let th = thermal_state(1.0, 2).unwrap();
        let vac = zero.to_density();
        let big = tensor(&vac, &th);
        assert!((big.trace() - vac.trace() * th.trace()).abs() < 1e-15);
        let block = big.matrix().view((0, 0), (3, 3));
        assert!((block - th.matrix()).camax() < 1e-15);
        assert!(big.matrix().view((3, 3), (6, 6)).camax() == 0.0);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let dims = FockDims::uniform(2, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = CVector::zeros(9);
        amps[dims.index_of(&[1, 0])] = re(h);
        amps[dims.index_of(&[0, 1])] = re(h);
        let phi = FockRegister::new(dims, amps).unwrap();
        let rho_b = phi.to_density().partial_trace(&[1]).unwrap();
        let expect = CMatrix::from_diagonal(&CVector::from_vec(vec![re(0.5), re(0.5), re(0.0)]));
        assert!((rho_b.matrix() - &expect).camax() < 1e-15);
        assert!((phi.reduced(&[1]).unwrap().matrix() - &expect).camax() < 1e-15);
    }

    #[test]
    fn partial_trace_matches_index_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dims = FockDims::uniform(2, 2).unwrap();
        let m = random_density(9, 4, &mut rng);
        let rho = DensityOperator::new(dims, m.clone()).unwrap();
        // brute force: ρ_A[a, a'] = Σ_b ρ[(a,b), (a',b)], ρ_B[b, b'] = Σ_a ρ[(a,b), (a,b')]
        let mut oracle_a = CMatrix::zeros(3, 3);
        let mut oracle_b = CMatrix::zeros(3, 3);
        for x in 0..3 {
            for y in 0..3 {
                for k in 0..3 {
                    oracle_a[(x, y)] += m[(3 * x + k, 3 * y + k)];
                    oracle_b[(x, y)] += m[(3 * k + x, 3 * k + y)];
                }
            }
        }
        let ra = rho.partial_trace(&[0]).unwrap();
        let rb = rho.partial_trace(&[1]).unwrap();
        assert!((ra.matrix() - oracle_a).camax() <= 1e-12);
        assert!((rb.matrix() - oracle_b).camax() <= 1e-12);
        assert!(rho.partial_trace(&[]).is_err());
        assert!(rho.partial_trace(&[2]).is_err());
    }

    #[test]
    fn hermitian_power_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_density(6, 3, &mut rng);
        assert!((hermitian_power(&m, 1.0).unwrap() - &m).camax() < 1e-12);

        let half = CMatrix::from_diagonal(&CVector::from_vec(vec![re(0.5), re(0.5)]));
        let root = hermitian_power(&half, 0.5).unwrap();
        assert!((root[(0, 0)].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((root[(1, 1)].re - 0.5f64.sqrt()).abs() < 1e-15);

        let v = CVector::from_vec(vec![re(0.6), C64::new(0.0, 0.8), re(0.0)]);
        let proj = &v * v.adjoint();
        assert!((hermitian_power(&proj, 0.0).unwrap() - &proj).camax() < 1e-12);

        let mut skew = half.clone();
        skew[(0, 1)] = re(1e-6);
        assert!(matches!(hermitian_power(&skew, 0.5), Err(Error::NotHermitian(_))));
        assert!(hermitian_power(&half, 1.5).is_err());
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&CMatrix::zeros(3, 3)).unwrap(), 0.0);
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![re(0.3), re(-0.3)]));
        assert!((trace_norm(&d).unwrap() - 0.6).abs() < 1e-15);
        let a = FockRegister::basis(FockDims::single(2).unwrap(), &[0]).unwrap();
        let b = FockRegister::basis(FockDims::single(2).unwrap(), &[2]).unwrap();
        let delta = a.to_density().matrix() - b.to_density().matrix();
        assert!((trace_norm(&delta).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn two_mode_application_matches_dense_product() {
        let dims = FockDims::new(vec![2, 3, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let amps = CVector::from_fn(dims.total_dim(), |_, _| C64::new(rng.gen(), rng.gen()));
        let reg = FockRegister::new(dims.clone(), amps).unwrap();
        let pair = FockDims::new(vec![1, 2]).unwrap(); // modes (2, 0)
        let u = beam_splitter_unitary(0.4, &pair).unwrap();
        let fast = reg.apply_two_mode(2, 0, &u).unwrap();
        // dense route: permute to (mode2, mode0, mode1) ordering via explicit loops
        let mut slow = CVector::zeros(dims.total_dim());
        for full in 0..dims.total_dim() {
            let l = dims.levels_of(full);
            for r2 in 0..2 {
                for r0 in 0..3 {
                    let row = r2 * 3 + r0;
                    let col = l[2] * 3 + l[0];
                    let target = dims.index_of(&[r0, l[1], r2]);
                    slow[target] += u[(row, col)] * reg.amplitudes()[full];
                }
            }
        }
        assert!((fast.amplitudes() - slow).camax() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn partial_trace_preserves_trace(seed in any::<u64>(), keep_a in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dims = FockDims::new(vec![2, 3]).unwrap();
            let m = random_density(12, 3, &mut rng) * re(0.7);
            let rho = DensityOperator::new(dims, m).unwrap();
            let out = rho.partial_trace(&[if keep_a { 0 } else { 1 }]).unwrap();
            prop_assert!((out.trace() - rho.trace()).abs() <= 1e-12);
        }

        #[test]
        fn power_pair_recovers_trace(seed in any::<u64>(), s in 0.0f64..=1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_density(7, 2, &mut rng);
            let a = hermitian_power(&m, s).unwrap();
            let b = hermitian_power(&m, 1.0 - s).unwrap();
            prop_assert!((trace_of_product(&a, &b).re - m.trace().re).abs() <= 1e-10);
        }

        #[test]
        fn tensor_then_trace_recovers_factor(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = DensityOperator::new(FockDims::single(2).unwrap(), random_density(3, 2, &mut rng)).unwrap();
            let b = DensityOperator::new(FockDims::single(3).unwrap(), random_density(4, 2, &mut rng) * re(0.9)).unwrap();
            let back = a.tensor(&b).partial_trace(&[0]).unwrap();
            let expect = a.matrix() * re(b.trace());
            prop_assert!((back.matrix() - expect).camax() <= 1e-12);
        }

        #[test]
        fn trace_norm_vanishes_only_for_zero(seed in any::<u64>(), scale in -14i32..0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_density(5, 2, &mut rng);
            let b = random_density(5, 2, &mut rng);
            let delta = (a - b) * re(10f64.powi(scale));
            let tn = trace_norm(&delta).unwrap();
            prop_assert_eq!(tn == 0.0, delta.camax() == 0.0);
            prop_assert!(trace_norm(&CMatrix::zeros(5, 5)).unwrap() == 0.0);
        }
    }
}

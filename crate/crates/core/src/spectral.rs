//! Block-aware Hermitian eigendecomposition.
//!
//! Density operators built from photon-number-conserving channels have many
//! exactly-zero couplings between Fock basis states. [`Spectrum`] first splits
//! the index set into connected components of the nonzero pattern and then
//! diagonalizes each component independently, which is exact and turns a
//! 625-dimensional problem into a handful of small ones.

use nalgebra::SymmetricEigen;

use crate::fock::{CMatrix, C64};

/// Eigenvalues below this fraction of the largest eigenvalue are treated as
/// exact zeros by the matrix functions.
pub const RELATIVE_CLAMP: f64 = 1e-12;

/// One connected component of a Hermitian matrix and its eigenpairs.
#[derive(Clone, Debug)]
pub struct SpectralBlock {
    /// Global basis indices spanned by this block, ascending.
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Columns are eigenvectors expressed on `indices`.
    pub vectors: CMatrix,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    dim: usize,
    blocks: Vec<SpectralBlock>,
}

impl Spectrum {
    /// Diagonalizes `m`, which the caller guarantees to be Hermitian. Only the
    /// nonzero pattern of the lower triangle and the diagonal is inspected.
    pub fn of_hermitian(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let blocks = connected_blocks(m)
            .into_iter()
            .map(|indices| {
                let n = indices.len();
                if n == 1 {
                    let i = indices[0];
                    return SpectralBlock {
                        indices,
                        values: vec![m[(i, i)].re],
                        vectors: CMatrix::from_element(1, 1, C64::new(1.0, 0.0)),
                    };
                }
                let sub = CMatrix::from_fn(n, n, |r, c| m[(indices[r], indices[c])]);
                let eig = SymmetricEigen::new(sub);
                SpectralBlock {
                    indices,
                    values: eig.eigenvalues.iter().copied().collect(),
                    vectors: eig.eigenvectors,
                }
            })
            .collect();
        Self { dim, blocks }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[SpectralBlock] {
        &self.blocks
    }

    /// All eigenvalues in block order; position `k` is the global eigen index
    /// used by [`Spectrum::overlaps`].
    pub fn values(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect()
    }

    pub fn max_value(&self) -> f64 {
        self.values().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalues with everything below `RELATIVE_CLAMP * max` set to zero.
    pub fn clamped_values(&self) -> Vec<f64> {
        let values = self.values();
        let cut = RELATIVE_CLAMP * values.iter().copied().fold(0.0, f64::max);
        values
            .into_iter()
            .map(|v| if v < cut { 0.0 } else { v })
            .collect()
    }

    /// Rebuilds `Σ f(λ_k) |v_k⟩⟨v_k|` from the supplied per-eigenvalue
    /// images (one entry per global eigen index).
    pub fn reconstruct_with(&self, mapped: &[f64]) -> CMatrix {
        assert_eq!(mapped.len(), self.dim, "one mapped value per eigenvalue");
        let mut out = CMatrix::zeros(self.dim, self.dim);
        let mut offset = 0;
        for block in &self.blocks {
            let n = block.indices.len();
            let weights = &mapped[offset..offset + n];
            offset += n;
            if weights.iter().all(|&w| w == 0.0) {
                continue;
            }
            let mut scaled = block.vectors.clone();
            for (k, &w) in weights.iter().enumerate() {
                scaled.column_mut(k).scale_mut(w);
            }
            let local = &scaled * block.vectors.adjoint();
            for (r, &gr) in block.indices.iter().enumerate() {
                for (c, &gc) in block.indices.iter().enumerate() {
                    out[(gr, gc)] = local[(r, c)];
                }
            }
        }
        out
    }

    /// Squared overlaps `|⟨u_i|v_j⟩|²` between the eigenvectors of `self`
    /// and `other`, listed sparsely by global eigen index. Pairs of blocks
    /// with disjoint support contribute nothing.
    pub fn overlaps(&self, other: &Spectrum) -> Vec<(usize, usize, f64)> {
        assert_eq!(self.dim, other.dim, "spectra must share a dimension");
        let mut owner = vec![(0usize, 0usize); self.dim];
        for (b, block) in self.blocks.iter().enumerate() {
            for (pos, &g) in block.indices.iter().enumerate() {
                owner[g] = (b, pos);
            }
        }
        let offsets = |blocks: &[SpectralBlock]| {
            let mut acc = 0;
            blocks
                .iter()
                .map(|b| {
                    let o = acc;
                    acc += b.indices.len();
                    o
                })
                .collect::<Vec<_>>()
        };
        let self_offsets = offsets(&self.blocks);
        let other_offsets = offsets(&other.blocks);

        let mut out = Vec::new();
        for (ob, oblock) in other.blocks.iter().enumerate() {
            // group this block's rows by the owning block of `self`
            let mut shared: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
            for (opos, &g) in oblock.indices.iter().enumerate() {
                let (sb, spos) = owner[g];
                match shared.iter_mut().find(|(b, _)| *b == sb) {
                    Some((_, rows)) => rows.push((spos, opos)),
                    None => shared.push((sb, vec![(spos, opos)])),
                }
            }
            for (sb, rows) in shared {
                let sblock = &self.blocks[sb];
                let ns = sblock.indices.len();
                let no = oblock.indices.len();
                for i in 0..ns {
                    for j in 0..no {
                        let amp: C64 = rows
                            .iter()
                            .map(|&(sp, op)| sblock.vectors[(sp, i)].conj() * oblock.vectors[(op, j)])
                            .sum();
                        let w = amp.norm_sqr();
                        if w > 0.0 {
                            out.push((self_offsets[sb] + i, other_offsets[ob] + j, w));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Connected components of the graph whose edges are the nonzero
/// off-diagonal entries of `m`.
fn connected_blocks(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for c in 0..n {
        for r in (c + 1)..n {
            let z = m[(r, c)];
            if z.re != 0.0 || z.im != 0.0 {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut roots: Vec<Option<usize>> = vec![None; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match roots[root] {
            Some(b) => blocks[b].push(i),
            None => {
                roots[root] = Some(blocks.len());
                blocks.push(vec![i]);
            }
        }
    }
    blocks
}

//! Pure tripartite states, bipartite density matrices and the maps between
//! them: Γ-blocks, partial trace and transpose, local ranks, and reduction
//! of a bipartite state onto the support of its marginals.
//!
//! Basis order is row-major over subsystems (last index fastest), so for a
//! 2×N×M state the amplitude of `|i⟩|j⟩|k⟩` sits at `i·N·M + j·M + k`.

mod file;
mod ket;

pub use file::{parse_complex, parse_state_file, StateInput};
pub use ket::{parse_ket, parse_ket_with, KetOptions};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{eigh, kron, numerical_rank, CMatrix, HERMITIAN_TOL, PSD_TOL, ZERO};

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidDimension(format!("dims {dims:?}")));
    }
    Ok(dims.iter().product())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amplitudes.len() != total {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims {dims:?}",
                amplitudes.len()
            )));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Builds and normalizes; errors on a zero vector.
    pub fn normalized_from(dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::new(dims, amplitudes)?.normalized()
    }

    /// Computational basis state with the given level per subsystem.
    pub fn basis(dims: Vec<usize>, levels: &[usize]) -> Result<Self> {
        let total = check_dims(&dims)?;
        if levels.len() != dims.len() || levels.iter().zip(&dims).any(|(l, d)| l >= d) {
            return Err(Error::InvalidParams(format!("levels {levels:?} for dims {dims:?}")));
        }
        let idx: usize = levels.iter().zip(strides(&dims)).map(|(l, s)| l * s).sum();
        let mut amplitudes = vec![ZERO; total];
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { dims, amplitudes })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::EmptyState);
        }
        for a in &mut self.amplitudes {
            *a /= n;
        }
        Ok(self)
    }

    /// Reorders subsystems: new subsystem `k` is old subsystem `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&o| o >= n || std::mem::replace(&mut seen[o], true)) {
            return Err(Error::InvalidParams(format!("bad permutation {order:?}")));
        }
        let new_dims: Vec<usize> = order.iter().map(|&o| self.dims[o]).collect();
        let old_strides = strides(&self.dims);
        let mut out = vec![ZERO; self.amplitudes.len()];
        let mut digits = vec![0usize; n];
        for slot in out.iter_mut() {
            let old: usize = (0..n).map(|k| digits[k] * old_strides[order[k]]).sum();
            *slot = self.amplitudes[old];
            for k in (0..n).rev() {
                digits[k] += 1;
                if digits[k] < new_dims[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        Ok(Self {
            dims: new_dims,
            amplitudes: out,
        })
    }

    /// Applies one unitary per subsystem.
    pub fn apply_local(&self, unitaries: &[CMatrix]) -> Result<Self> {
        if unitaries.len() != self.dims.len()
            || unitaries.iter().zip(&self.dims).any(|(u, &d)| u.rows() != d || u.cols() != d)
        {
            return Err(Error::DimensionMismatch("local unitaries vs dims".into()));
        }
        let full = unitaries[1..].iter().fold(unitaries[0].clone(), |acc, u| kron(&acc, u));
        Ok(Self {
            dims: self.dims.clone(),
            amplitudes: full.mul_vec(&self.amplitudes),
        })
    }
}

/// Validated 2×N×M shape with `N ≤ M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DimSpec {
    pub d0: usize,
    pub d1: usize,
    pub d2: usize,
}

impl DimSpec {
    pub fn residual(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }
}

/// A tripartite state brought into `2 × N × M`, `N ≤ M` form.
#[derive(Debug, Clone)]
pub struct CanonicalState {
    pub state: StateVector,
    pub dims: DimSpec,
    /// Subsystems 1 and 2 were swapped to get `N ≤ M`.
    pub permuted: bool,
}

pub fn canonical_tripartite(s: &StateVector) -> Result<CanonicalState> {
    let d = s.dims();
    if d.len() != 3 {
        return Err(Error::InvalidDimension(format!(
            "expected a tripartite 2xNxM state, got dims {d:?}"
        )));
    }
    if d[0] != 2 {
        return Err(Error::InvalidDimension(format!(
            "subsystem 0 must be the qubit, got dimension {}",
            d[0]
        )));
    }
    if d[1] < 2 || d[2] < 2 {
        return Err(Error::InvalidDimension(format!(
            "qunit dimensions must be >= 2, got {d:?}"
        )));
    }
    let (state, permuted) = if d[1] > d[2] {
        (s.permute(&[0, 2, 1])?, true)
    } else {
        (s.clone(), false)
    };
    let dd = state.dims().to_vec();
    Ok(CanonicalState {
        state,
        dims: DimSpec {
            d0: 2,
            d1: dd[1],
            d2: dd[2],
        },
        permuted,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates, symmetrizes and trace-normalizes `matrix`.
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let total = check_dims(&dims)?;
        if matrix.rows() != total || matrix.cols() != total {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dims {dims:?}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermitian_defect();
        if defect > HERMITIAN_TOL * matrix.max_abs().max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        let h = matrix.hermitian_part();
        let tr = h.trace().re;
        if !tr.is_finite() || tr <= 0.0 {
            return Err(Error::InvalidParams(format!("density matrix trace {tr}")));
        }
        let matrix = h.scale(1.0 / tr);
        let min = eigh(&matrix)?.values[0];
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { dims, matrix })
    }

    /// Symmetrizes and trace-normalizes without the PSD check, for matrices
    /// that are PSD by construction (congruences of a density matrix).
    pub(crate) fn from_congruence(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let h = matrix.hermitian_part();
        let tr = h.trace().re;
        if !tr.is_finite() || tr <= 0.0 {
            return Err(Error::InvalidParams(format!("density matrix trace {tr}")));
        }
        Ok(Self {
            dims,
            matrix: h.scale(1.0 / tr),
        })
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        Ok(Self {
            dims,
            matrix: CMatrix::identity(total).scale(1.0 / total as f64),
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `(N, M)` for a bipartite state.
    pub fn bipartite_dims(&self) -> Result<(usize, usize)> {
        match self.dims.as_slice() {
            &[n, m] => Ok((n, m)),
            d => Err(Error::DimensionMismatch(format!(
                "expected a bipartite state, got dims {d:?}"
            ))),
        }
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    /// `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†` for a bipartite state.
    pub fn apply_local(&self, ua: &CMatrix, ub: &CMatrix) -> Result<Self> {
        let (n, m) = self.bipartite_dims()?;
        if ua.rows() != n || ub.rows() != m || !ua.is_square() || !ub.is_square() {
            return Err(Error::DimensionMismatch("local unitaries vs dims".into()));
        }
        Self::new(self.dims.clone(), self.matrix.conjugate_by(&kron(ua, ub)))
    }
}

/// The `N × M` coefficient blocks of a 2×N×M state: `g1` for qubit level 0,
/// `g2` for level 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaBlocks {
    pub g1: CMatrix,
    pub g2: CMatrix,
}

pub fn gamma_blocks(s: &StateVector) -> Result<GammaBlocks> {
    let &[q, n, m] = s.dims() else {
        return Err(Error::DimensionMismatch(format!(
            "gamma blocks need a 2xNxM state, got dims {:?}",
            s.dims()
        )));
    };
    if q != 2 {
        return Err(Error::DimensionMismatch(format!("qubit dimension {q}")));
    }
    let a = s.amplitudes();
    let block = |off: usize| CMatrix::from_fn(n, m, |j, k| a[off + j * m + k]);
    Ok(GammaBlocks {
        g1: block(0),
        g2: block(n * m),
    })
}

/// `|Ψ⟩⟨Ψ|` of the normalized state.
pub fn density(s: &StateVector) -> Result<DensityMatrix> {
    let s = s.clone().normalized()?;
    let a = s.amplitudes();
    Ok(DensityMatrix {
        dims: s.dims().to_vec(),
        matrix: CMatrix::outer(a, a).hermitian_part(),
    })
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let dims = rho.dims();
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::InvalidSubsystem(bad));
    }
    let st = strides(dims);
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let offsets = |subs: &[usize]| -> Vec<usize> {
        let mut offs = vec![0usize];
        for &k in subs {
            let (dk, sk) = (dims[k], st[k]);
            offs = offs
                .iter()
                .flat_map(|&o| (0..dk).map(move |l| o + l * sk))
                .collect();
        }
        offs
    };
    let kept_offsets = offsets(&keep);
    let traced_offsets = offsets(&traced);
    let m = rho.matrix();
    let out = CMatrix::from_fn(kept_offsets.len(), kept_offsets.len(), |r, c| {
        traced_offsets
            .iter()
            .map(|&t| m[(kept_offsets[r] + t, kept_offsets[c] + t)])
            .sum()
    });
    let kept_dims: Vec<usize> = if keep.is_empty() {
        vec![1]
    } else {
        keep.iter().map(|&k| dims[k]).collect()
    };
    Ok(DensityMatrix {
        dims: kept_dims,
        matrix: out.hermitian_part(),
    })
}

/// Transposes the indices of one subsystem: `(|ij⟩⟨kl|)^{T_A} = |kj⟩⟨il|`.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: usize) -> Result<CMatrix> {
    partial_transpose_matrix(rho.matrix(), rho.dims(), subsystem)
}

pub fn partial_transpose_matrix(m: &CMatrix, dims: &[usize], subsystem: usize) -> Result<CMatrix> {
    if subsystem >= dims.len() {
        return Err(Error::InvalidSubsystem(subsystem));
    }
    let stride = strides(dims)[subsystem];
    let d = dims[subsystem];
    let digit = |x: usize| (x / stride) % d;
    let total = m.rows();
    let mut out = CMatrix::zeros(total, total);
    for i in 0..total {
        let di = digit(i);
        for j in 0..total {
            let dj = digit(j);
            let i2 = i - di * stride + dj * stride;
            let j2 = j - dj * stride + di * stride;
            out[(i2, j2)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// `(ρ_A, ρ_B)` of a bipartite state.
pub fn marginals(rho: &DensityMatrix) -> Result<(DensityMatrix, DensityMatrix)> {
    rho.bipartite_dims()?;
    Ok((partial_trace(rho, &[0])?, partial_trace(rho, &[1])?))
}

pub fn local_ranks(rho: &DensityMatrix, rank_tol: f64) -> Result<(usize, usize)> {
    let (a, b) = marginals(rho)?;
    Ok((
        numerical_rank(&eigh(a.matrix())?.values, rank_tol),
        numerical_rank(&eigh(b.matrix())?.values, rank_tol),
    ))
}

/// Local isometries used to move a bipartite state onto its marginal
/// supports. Columns of `left`/`right` span the supports of `ρ_A`/`ρ_B`.
#[derive(Debug, Clone)]
pub struct SupportReduction {
    pub original_dims: (usize, usize),
    pub reduced_dims: (usize, usize),
    pub left: CMatrix,
    pub right: CMatrix,
}

impl SupportReduction {
    pub fn is_identity(&self) -> bool {
        self.original_dims == self.reduced_dims
    }
}

/// Isometry onto the eigenvectors above the rank cut, in descending
/// eigenvalue order; identity when the marginal has full rank.
fn support_isometry(marginal: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    let e = eigh(marginal)?;
    let d = marginal.rows();
    let rank = numerical_rank(&e.values, rank_tol);
    if rank == d {
        return Ok(CMatrix::identity(d));
    }
    let cols: Vec<usize> = (0..d).rev().take(rank.max(1)).collect();
    Ok(e.vectors.select_columns(&cols))
}

/// Projects `ρ` onto `supp(ρ_A) ⊗ supp(ρ_B)`, giving an `n × m` state with
/// full-rank marginals. Local-unitary plus support projection, so the
/// entanglement is unchanged.
pub fn reduce_support(rho: &DensityMatrix, rank_tol: f64) -> Result<(DensityMatrix, SupportReduction)> {
    let (n, m) = rho.bipartite_dims()?;
    let (a, b) = marginals(rho)?;
    let left = support_isometry(a.matrix(), rank_tol)?;
    let right = support_isometry(b.matrix(), rank_tol)?;
    let reduced_dims = (left.cols(), right.cols());
    let record = SupportReduction {
        original_dims: (n, m),
        reduced_dims,
        left,
        right,
    };
    if record.is_identity() {
        return Ok((rho.clone(), record));
    }
    let p = kron(&record.left, &record.right);
    let reduced = p.adjoint().matmul(rho.matrix()).matmul(&p);
    let out = DensityMatrix::new(vec![reduced_dims.0, reduced_dims.1], reduced)?;
    Ok((out, record))
}

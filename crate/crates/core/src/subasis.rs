//! Generalized Gell-Mann basis of SU(N), normalized to `Tr(λ_a λ_b) = 2δ_ab`.
//!
//! Ordering is fixed: first the symmetric generators `E_jk + E_kj` for
//! `j < k` in lexicographic order, then the antisymmetric `−i(E_jk − E_kj)`
//! in the same order, then the `N−1` diagonal generators
//! `√(2/(l(l+1)))·(Σ_{m<l} E_mm − l·E_ll)` for `l = 1..N−1`.
//!
//! For N = 2 this gives σ₁, σ₂, σ₃. For N = 4, basis element 13 (1-based)
//! is the first diagonal generator `diag(1, −1, 0, 0)`; the conventional
//! Gell-Mann λ₁₃ (`E_23 + E_32`) sits at 1-based index 6. Use
//! [`gell_mann_index`] to translate conventional labels.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, I, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Symmetric { j: usize, k: usize },
    Antisymmetric { j: usize, k: usize },
    Diagonal { l: usize },
}

#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    pub dim: usize,
    pub matrices: Vec<CMatrix>,
    pub kinds: Vec<GeneratorKind>,
}

impl GeneratorBasis {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// `Tr(h)/N·I + ½ Σ c_μ λ_μ`
    pub fn reconstruct(&self, trace: f64, coeffs: &[f64]) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::identity(n).scale(trace / n as f64);
        for (c, lam) in coeffs.iter().zip(&self.matrices) {
            out = &out + &lam.scale(0.5 * c);
        }
        out
    }
}

fn pair_position(n: usize, j: usize, k: usize) -> usize {
    j * (2 * n - j - 1) / 2 + (k - j - 1)
}

pub fn generators(n: usize) -> Result<GeneratorBasis> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "SU(N) basis needs N >= 2, got {n}"
        )));
    }
    let mut matrices = Vec::with_capacity(n * n - 1);
    let mut kinds = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = ONE;
            m[(k, j)] = ONE;
            matrices.push(m);
            kinds.push(GeneratorKind::Symmetric { j, k });
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = -I;
            m[(k, j)] = I;
            matrices.push(m);
            kinds.push(GeneratorKind::Antisymmetric { j, k });
        }
    }
    for l in 1..n {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(n, n);
        for d in 0..l {
            m[(d, d)] = Complex64::new(norm, 0.0);
        }
        m[(l, l)] = Complex64::new(-norm * l as f64, 0.0);
        matrices.push(m);
        kinds.push(GeneratorKind::Diagonal { l });
    }
    Ok(GeneratorBasis {
        dim: n,
        matrices,
        kinds,
    })
}

/// Shared, lazily built basis for dimension `n`.
pub fn cached_generators(n: usize) -> Result<Arc<GeneratorBasis>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GeneratorBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(b) = cache.read().expect("basis cache poisoned").get(&n) {
        return Ok(Arc::clone(b));
    }
    let basis = Arc::new(generators(n)?);
    let mut w = cache.write().expect("basis cache poisoned");
    Ok(Arc::clone(w.entry(n).or_insert(basis)))
}

/// Maps a conventional 1-based Gell-Mann label (λ₁ = E₀₁+E₁₀, λ₂, λ₃ = diag
/// on levels 0/1, λ₄.. adding level 2, and so on) to the 0-based index of the
/// same matrix in [`generators`] ordering.
pub fn gell_mann_index(n: usize, label: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("N = {n}")));
    }
    if label == 0 || label > n * n - 1 {
        return Err(Error::InvalidParams(format!(
            "Gell-Mann label {label} outside 1..={} for N = {n}",
            n * n - 1
        )));
    }
    let pairs = n * (n - 1) / 2;
    // Level k owns labels k²..=(k+1)²−1.
    let k = (1..n).find(|&k| label < (k + 1) * (k + 1)).expect("label in range");
    let offset = label - k * k;
    if offset == 2 * k {
        return Ok(2 * pairs + k - 1);
    }
    let j = offset / 2;
    let pos = pair_position(n, j, k);
    Ok(if offset.is_multiple_of(2) { pos } else { pairs + pos })
}

/// Coefficients `c_μ = Tr(h·λ_μ)`.
pub fn expand_in_basis(h: &CMatrix, basis: &GeneratorBasis) -> Result<Vec<f64>> {
    if h.rows() != basis.dim || h.cols() != basis.dim {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix against SU({}) basis",
            h.rows(),
            h.cols(),
            basis.dim
        )));
    }
    let defect = h.hermitian_defect();
    if defect > 1e-10 * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(basis
        .matrices
        .iter()
        .map(|lam| h.trace_product(lam).re)
        .collect())
}

//! Bloch decomposition of bipartite states,
//!
//! ```text
//! ρ = I⊗I/(NM) + (a·λ)⊗I/(2M) + I⊗(b·σ)/(2N) + ¼ Σ T_μν λ_μ⊗σ_ν,
//! ```
//!
//! local filtering to the normal form (maximally mixed marginals), and the
//! SVD of the correlation matrix `T`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{eigh, kron, numerical_rank, svd, CMatrix, RMatrix, RANK_TOL};
pub use crate::states::marginals;
use crate::states::DensityMatrix;
use crate::subasis::cached_generators;

#[derive(Debug, Clone)]
pub struct BlochForm {
    pub dims: (usize, usize),
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub t: RMatrix,
}

impl BlochForm {
    pub fn a_norm(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn b_norm(&self) -> f64 {
        self.b.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Rebuilds the density matrix from `(a, b, T)`.
    pub fn reconstruct(&self) -> Result<CMatrix> {
        let (n, m) = self.dims;
        let la = cached_generators(n)?;
        let lb = cached_generators(m)?;
        let id_a = CMatrix::identity(n);
        let id_b = CMatrix::identity(m);
        let mut a_part = CMatrix::zeros(n, n);
        for (x, g) in self.a.iter().zip(&la.matrices) {
            a_part = &a_part + &g.scale(*x);
        }
        let mut b_part = CMatrix::zeros(m, m);
        for (x, g) in self.b.iter().zip(&lb.matrices) {
            b_part = &b_part + &g.scale(*x);
        }
        let mut out = kron(&id_a, &id_b).scale(1.0 / (n * m) as f64);
        out = &out + &kron(&a_part, &id_b).scale(0.5 / m as f64);
        out = &out + &kron(&id_a, &b_part).scale(0.5 / n as f64);
        for (mu, gm) in la.matrices.iter().enumerate() {
            // Σ_ν T_μν σ_ν, then one Kronecker product per μ.
            let mut row = CMatrix::zeros(m, m);
            for (nu, gn) in lb.matrices.iter().enumerate() {
                let t = self.t[(mu, nu)];
                if t != 0.0 {
                    row = &row + &gn.scale(t);
                }
            }
            out = &out + &kron(gm, &row).scale(0.25);
        }
        Ok(out)
    }
}

/// `a_μ = Tr[ρ(λ_μ⊗I)]`, `b_ν = Tr[ρ(I⊗σ_ν)]`, `T_μν = Tr[ρ(λ_μ⊗σ_ν)]`.
pub fn bloch_decompose(rho: &DensityMatrix) -> Result<BlochForm> {
    let (n, m) = rho.bipartite_dims()?;
    let la = cached_generators(n)?;
    let lb = cached_generators(m)?;
    let r = rho.matrix();

    let mut a = Vec::with_capacity(la.len());
    let mut t = RMatrix::zeros(la.len(), lb.len());
    for (mu, gm) in la.matrices.iter().enumerate() {
        // X = Tr_A[ρ(λ_μ⊗I)], X_kl = Σ_ij ρ_(ik),(jl) λ_ji
        let mut x = CMatrix::zeros(m, m);
        for i in 0..n {
            for j in 0..n {
                let g = gm[(j, i)];
                if g == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        x[(k, l)] += r[(i * m + k, j * m + l)] * g;
                    }
                }
            }
        }
        a.push(x.trace().re);
        for (nu, gn) in lb.matrices.iter().enumerate() {
            t[(mu, nu)] = x.trace_product(gn).re;
        }
    }
    let (_, rho_b) = marginals(rho)?;
    let b = lb
        .matrices
        .iter()
        .map(|g| rho_b.matrix().trace_product(g).re)
        .collect();
    Ok(BlochForm {
        dims: (n, m),
        a,
        b,
        t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFormSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub rank_tol: f64,
}

impl Default for NormalFormSettings {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 500,
            rank_tol: RANK_TOL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NormalForm {
    pub state: DensityMatrix,
    pub iterations: usize,
    /// max(‖ρ_A − I/N‖_max, ‖ρ_B − I/M‖_max) of the returned state.
    pub residual: f64,
}

fn marginal_residual(rho: &DensityMatrix) -> Result<f64> {
    let (n, m) = rho.bipartite_dims()?;
    let (ra, rb) = marginals(rho)?;
    let da = ra.matrix().max_abs_diff(&CMatrix::identity(n).scale(1.0 / n as f64));
    let db = rb.matrix().max_abs_diff(&CMatrix::identity(m).scale(1.0 / m as f64));
    Ok(da.max(db))
}

const STALL_WINDOW: usize = 20;

/// `(d·ρ)^{-1/2}` for a marginal, or `None` once it is numerically
/// rank-deficient (a diverging filter sequence).
fn whitening_filter(marginal: &CMatrix, rank_tol: f64) -> Result<Option<CMatrix>> {
    let e = eigh(marginal)?;
    let d = marginal.rows();
    if numerical_rank(&e.values, rank_tol) < d || e.values[0] <= 0.0 {
        return Ok(None);
    }
    Ok(Some(e.map_spectrum(|x| 1.0 / (d as f64 * x).sqrt())))
}

/// Local filtering to maximally mixed marginals. Each iteration whitens
/// subsystem A with `(N·ρ_A)^{-1/2}`, then B with `(M·ρ_B)^{-1/2}`.
///
/// States without a normal form (it exists only as a limit, or not at all)
/// end in `NoConvergence`: at `max_iter`, as soon as a marginal of the
/// filtered state loses numerical rank, or when the residual has not moved
/// for `STALL_WINDOW` iterations.
pub fn normal_form(rho: &DensityMatrix, settings: NormalFormSettings) -> Result<NormalForm> {
    let (n, m) = rho.bipartite_dims()?;
    let (ra, rb) = marginals(rho)?;
    for (side, marginal, dim) in [('A', &ra, n), ('B', &rb, m)] {
        let rank = numerical_rank(&eigh(marginal.matrix())?.values, settings.rank_tol);
        if rank < dim {
            return Err(Error::RankDeficient { side, rank, dim });
        }
    }

    let id_a = CMatrix::identity(n);
    let id_b = CMatrix::identity(m);
    let mut state = rho.clone();
    let mut residual = marginal_residual(&state)?;
    let diverged = |iterations, residual| Err(Error::NoConvergence { iterations, residual });
    let mut stalled = 0;
    for iterations in 0..=settings.max_iter {
        if residual <= settings.tol {
            return Ok(NormalForm {
                state,
                iterations,
                residual,
            });
        }
        if iterations == settings.max_iter {
            break;
        }
        let (ra, _) = marginals(&state)?;
        let Some(fa) = whitening_filter(ra.matrix(), settings.rank_tol)? else {
            return diverged(iterations, residual);
        };
        state = DensityMatrix::from_congruence(state.dims().to_vec(), state.matrix().conjugate_by(&kron(&fa, &id_b)))?;
        let (_, rb) = marginals(&state)?;
        let Some(fb) = whitening_filter(rb.matrix(), settings.rank_tol)? else {
            return diverged(iterations, residual);
        };
        state = DensityMatrix::from_congruence(state.dims().to_vec(), state.matrix().conjugate_by(&kron(&id_a, &fb)))?;
        let next = marginal_residual(&state)?;
        stalled = if (residual - next).abs() <= 1e-14 * residual { stalled + 1 } else { 0 };
        residual = next;
        if stalled >= STALL_WINDOW {
            return diverged(iterations + 1, residual);
        }
    }
    diverged(settings.max_iter, residual)
}

#[derive(Debug, Clone)]
pub struct CorrelationSvd {
    pub dims: (usize, usize),
    /// Left singular vectors as columns, (N²−1)×k.
    pub u: RMatrix,
    /// Descending, nonnegative.
    pub tau: Vec<f64>,
    /// Right singular vectors as columns, (M²−1)×k.
    pub v: RMatrix,
    /// Number of singular values above `RANK_TOL · τ_max`.
    pub rank: usize,
    /// `min(N²−1, M²−1)`, the largest rank `T` can have.
    pub max_rank: usize,
}

impl CorrelationSvd {
    pub fn ky_fan(&self) -> f64 {
        self.tau.iter().sum()
    }

    /// `Σ_{μ<l} τ_μ u_μ v_μᵀ`
    pub fn reconstruct(&self) -> RMatrix {
        RMatrix::from_fn(self.u.rows(), self.v.rows(), |i, j| {
            (0..self.rank)
                .map(|k| self.tau[k] * self.u[(i, k)] * self.v[(j, k)])
                .sum()
        })
    }
}

pub fn correlation_svd(bf: &BlochForm) -> Result<CorrelationSvd> {
    let s = svd(&bf.t.to_complex())?;
    let rank = numerical_rank(&s.sigma, RANK_TOL);
    let real = |m: &CMatrix| RMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].re);
    Ok(CorrelationSvd {
        dims: bf.dims,
        u: real(&s.u),
        tau: s.sigma,
        v: real(&s.v),
        rank,
        max_rank: bf.t.rows().min(bf.t.cols()),
    })
}

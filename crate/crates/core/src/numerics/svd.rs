//! One-sided (Hestenes) Jacobi SVD.

use num_complex::Complex64;

use super::eigen::{jacobi_rotation, rotate_columns};
use super::matrix::{CMatrix, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `m = U·diag(sigma)·V†`; `U` is rows×k, `V` is cols×k with
/// k = min(rows, cols). Singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let (m, n, k) = (self.u.rows(), self.v.rows(), self.sigma.len());
        CMatrix::from_fn(m, n, |i, j| {
            (0..k)
                .map(|l| self.u[(i, l)] * self.v[(j, l)].conj() * self.sigma[l])
                .sum()
        })
    }
}

pub fn svd(m: &CMatrix) -> Result<Svd> {
    if m.rows() < m.cols() {
        let t = svd_tall(&m.adjoint())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    svd_tall(m)
}

fn column_dot(w: &CMatrix, p: usize, q: usize) -> (f64, f64, Complex64) {
    let mut alpha = 0.0;
    let mut beta = 0.0;
    let mut gamma = ZERO;
    for k in 0..w.rows() {
        let (x, y) = (w[(k, p)], w[(k, q)]);
        alpha += x.norm_sqr();
        beta += y.norm_sqr();
        gamma += x.conj() * y;
    }
    (alpha, beta, gamma)
}

fn svd_tall(m: &CMatrix) -> Result<Svd> {
    let (rows, n) = (m.rows(), m.cols());
    let mut w = m.clone();
    let mut v = CMatrix::identity(n);
    let tol = (rows.max(1) as f64) * f64::EPSILON;

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = column_dot(&w, p, q);
                if alpha == 0.0 || beta == 0.0 || gamma.norm() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let g = jacobi_rotation(alpha, beta, gamma);
                rotate_columns(&mut w, p, q, &g);
                rotate_columns(&mut v, p, q, &g);
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps == MAX_SWEEPS {
            return Err(Error::ConvergenceFailure {
                routine: "svd",
                iterations: sweeps,
            });
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| (0..rows).map(|k| w[(k, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let sigma_max = sigma.first().copied().unwrap_or(0.0);

    let mut u = CMatrix::zeros(rows, n);
    let mut deficient = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        if s == 0.0 || s < sigma_max * 1e-14 {
            deficient.push(slot);
            continue;
        }
        for k in 0..rows {
            u[(k, slot)] = w[(k, j)] / s;
        }
    }
    let filled: Vec<usize> = (0..n).filter(|s| !deficient.contains(s)).collect();
    complete_orthonormal(&mut u, &filled, &deficient);

    Ok(Svd {
        u,
        sigma,
        v: v.select_columns(&order),
    })
}

/// Fills the `missing` columns of `u` with unit vectors orthogonal to every
/// other column. Each new vector is the standard basis vector with the
/// largest residual after projecting out the current basis.
fn complete_orthonormal(u: &mut CMatrix, filled: &[usize], missing: &[usize]) {
    let rows = u.rows();
    let mut basis: Vec<Vec<Complex64>> = filled.iter().map(|&j| u.column(j)).collect();
    for &slot in missing {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for k in 0..rows {
            let mut x = vec![ZERO; rows];
            x[k] = Complex64::new(1.0, 0.0);
            project_out(&mut x, &basis);
            project_out(&mut x, &basis);
            let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, x));
            }
        }
        let (norm, mut x) = best.expect("rows > 0");
        for xi in &mut x {
            *xi /= norm;
        }
        u.set_column(slot, &x);
        basis.push(x);
    }
}

fn project_out(x: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for b in basis {
        let proj: Complex64 = b.iter().zip(x.iter()).map(|(bi, xi)| bi.conj() * xi).sum();
        for (xi, bi) in x.iter_mut().zip(b) {
            *xi -= proj * bi;
        }
    }
}

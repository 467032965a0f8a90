//! Cyclic complex Jacobi diagonalization of Hermitian matrices.

use num_complex::Complex64;

use super::matrix::{CMatrix, ZERO};
use super::HERMITIAN_TOL;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Spectral decomposition `h = V·diag(values)·V†`, values ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        CMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * v[(j, k)].conj() * self.values[k])
                .sum()
        })
    }

    /// Applies `f` to the spectrum: `V·diag(f(λ))·V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        CMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .filter(|&k| fv[k] != 0.0)
                .map(|k| v[(i, k)] * v[(j, k)].conj() * fv[k])
                .sum()
        })
    }
}

/// 2×2 unitary `G` with `G†·[[app, apq], [conj(apq), aqq]]·G` diagonal.
///
/// Shared by the eigen solver and the one-sided SVD.
pub(super) fn jacobi_rotation(app: f64, aqq: f64, apq: Complex64) -> [[Complex64; 2]; 2] {
    let mag = apq.norm();
    let phase = if mag > 0.0 { (apq / mag).conj() } else { Complex64::new(1.0, 0.0) };
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    [
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        [phase * (-s), phase * c],
    ]
}

/// Right-multiplies columns `p`, `q` of `m` by `g`.
pub(super) fn rotate_columns(m: &mut CMatrix, p: usize, q: usize, g: &[[Complex64; 2]; 2]) {
    for k in 0..m.rows() {
        let (x, y) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = x * g[0][0] + y * g[1][0];
        m[(k, q)] = x * g[0][1] + y * g[1][1];
    }
}

fn rotate_rows_adjoint(m: &mut CMatrix, p: usize, q: usize, g: &[[Complex64; 2]; 2]) {
    for k in 0..m.cols() {
        let (x, y) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = g[0][0].conj() * x + g[1][0].conj() * y;
        m[(q, k)] = g[0][1].conj() * x + g[1][1].conj() * y;
    }
}

/// Hermitian eigendecomposition. The input is symmetrized as `(h + h†)/2`
/// after the Hermiticity check.
pub fn eigh(h: &CMatrix) -> Result<Eigh> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigh needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let defect = h.hermitian_defect();
    if defect > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();

    let mut converged = n <= 1 || scale == 0.0;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::ConvergenceFailure {
                routine: "eigh",
                iterations: sweeps,
            });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= 1e-18 * scale {
                    continue;
                }
                rotated = true;
                let g = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq);
                rotate_columns(&mut a, p, q, &g);
                rotate_rows_adjoint(&mut a, p, q, &g);
                rotate_columns(&mut v, p, q, &g);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
            }
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        converged = !rotated || off.sqrt() <= 1e-15 * scale;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    Ok(Eigh {
        values: order.iter().map(|&k| a[(k, k)].re).collect(),
        vectors: v.select_columns(&order),
    })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(h: &CMatrix) -> Result<Vec<f64>> {
    eigh(h).map(|e| e.values)
}

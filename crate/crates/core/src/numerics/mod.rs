//! Dense complex linear algebra: Kronecker products, Hermitian
//! eigendecomposition, SVD, trace and Ky Fan norms, PSD matrix functions.
//!
//! Conventions are fixed crate-wide: eigenvalues ascending, singular values
//! descending, and spectra always taken from the Hermitian part `(h+h†)/2`.

mod eigen;
mod matrix;
mod svd;

pub use eigen::{eigh, eigvalsh, Eigh};
pub use matrix::{kron, CMatrix, RMatrix, I, ONE, ZERO};
pub use svd::{svd, Svd};

pub mod random;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Asymmetry allowed for matrices treated as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues at or below `RANK_TOL · λ_max` count as zero.
pub const RANK_TOL: f64 = 1e-10;
/// Most negative eigenvalue still accepted as PSD.
pub const PSD_TOL: f64 = 1e-10;

/// Sum of singular values. Hermitian input goes through `eigh` (Σ|λ|).
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    if m.is_square() && m.is_hermitian(HERMITIAN_TOL * m.max_abs().max(1.0)) {
        return Ok(eigvalsh(m)?.iter().map(|x| x.abs()).sum());
    }
    singular_value_sum(m)
}

/// Ky Fan norm of a matrix: the full singular-value sum, same path as
/// [`trace_norm`].
pub fn ky_fan_norm(m: &CMatrix) -> Result<f64> {
    trace_norm(m)
}

/// Σσ via SVD regardless of structure.
pub fn singular_value_sum(m: &CMatrix) -> Result<f64> {
    Ok(svd(m)?.sigma.iter().sum())
}

/// Number of eigenvalues above `rank_tol · max(λ)`.
pub fn numerical_rank(eigenvalues: &[f64], rank_tol: f64) -> usize {
    let top = eigenvalues.iter().copied().fold(0.0, f64::max);
    if top <= 0.0 {
        return 0;
    }
    eigenvalues.iter().filter(|&&x| x > rank_tol * top).count()
}

fn checked_psd_eigh(h: &CMatrix) -> Result<Eigh> {
    let e = eigh(h)?;
    let min = e.values.first().copied().unwrap_or(0.0);
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    Ok(e)
}

/// Pseudo-inverse square root on the support of a PSD matrix.
pub fn inv_sqrt_psd(h: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    let e = checked_psd_eigh(h)?;
    let cut = rank_tol * e.values.last().copied().unwrap_or(0.0).max(0.0);
    Ok(e.map_spectrum(|x| if x > cut && x > 0.0 { 1.0 / x.sqrt() } else { 0.0 }))
}

/// Principal square root of a PSD matrix; tiny negative eigenvalues clip to 0.
pub fn sqrt_psd(h: &CMatrix) -> Result<CMatrix> {
    let e = checked_psd_eigh(h)?;
    Ok(e.map_spectrum(|x| x.max(0.0).sqrt()))
}

/// Thin QR by modified Gram-Schmidt with one reorthogonalization pass.
/// `R` has a nonnegative real diagonal, so the QR of a complex Gaussian
/// matrix yields a Haar-distributed `Q`.
pub fn qr(a: &CMatrix) -> (CMatrix, CMatrix) {
    let (m, n) = (a.rows(), a.cols());
    let mut q = a.clone();
    let mut r = CMatrix::zeros(n, n);
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let proj: Complex64 = (0..m).map(|i| q[(i, k)].conj() * q[(i, j)]).sum();
                r[(k, j)] += proj;
                for i in 0..m {
                    let qik = q[(i, k)];
                    q[(i, j)] -= proj * qik;
                }
            }
        }
        let norm = (0..m).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        r[(j, j)] = Complex64::new(norm, 0.0);
        if norm > 0.0 {
            for i in 0..m {
                q[(i, j)] /= norm;
            }
        }
    }
    (q, r)
}


#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::testing::*;
    use super::*;

    fn pauli_z() -> CMatrix {
        CMatrix::diag_real(&[1.0, -1.0])
    }

    #[test]
    fn eigh_pauli_z() {
        let e = eigh(&pauli_z()).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn eigh_identity() {
        let e = eigh(&CMatrix::identity(5)).unwrap();
        assert!(e.values.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(eigh(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eigh_complex_two_by_two() {
        // σ_y has eigenvalues ±1.
        let sy = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.0, -1.0),
            (1, 0) => Complex64::new(0.0, 1.0),
            _ => ZERO,
        });
        let e = eigh(&sy).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        assert!(e.reconstruct().max_abs_diff(&sy) < 1e-15);
    }

    #[test]
    fn eigh_degenerate_cluster() {
        let mut rng = rng(11);
        let u = unitary(&mut rng, 6);
        let h = CMatrix::diag_real(&[2.0, 2.0, 2.0, -1.0, -1.0, 0.0]).conjugate_by(&u);
        let e = eigh(&h).unwrap();
        let want = [-1.0, -1.0, 0.0, 2.0, 2.0, 2.0];
        for (a, b) in e.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(unitarity_defect(&e.vectors) < 1e-12);
    }

    #[test]
    fn svd_diagonal() {
        let s = svd(&CMatrix::diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(s.sigma, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn svd_zero_matrix() {
        let z = CMatrix::zeros(3, 4);
        let s = svd(&z).unwrap();
        assert!(s.sigma.iter().all(|&x| x == 0.0));
        assert!(unitarity_defect(&s.u) < 1e-15);
        assert!(s.reconstruct().max_abs() == 0.0);
    }

    #[test]
    fn svd_random_real_8x8() {
        let mut rng = rng(8);
        let m = real_gaussian(&mut rng, 8, 8);
        let s = svd(&m).unwrap();
        assert!(s.reconstruct().max_abs_diff(&m) <= 1e-10);
        assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_rank_deficient_keeps_orthonormal_factors() {
        let mut rng = rng(3);
        let a = gaussian(&mut rng, 7, 2);
        let b = gaussian(&mut rng, 2, 5);
        let m = a.matmul(&b);
        let s = svd(&m).unwrap();
        assert!(s.sigma[2] < 1e-12);
        assert!(unitarity_defect(&s.u) < 1e-10);
        assert!(unitarity_defect(&s.v) < 1e-10);
        assert!(s.reconstruct().max_abs_diff(&m) < 1e-10);
    }

    #[test]
    fn trace_norm_hermitian_diagonal() {
        let n = trace_norm(&CMatrix::diag_real(&[1.0, -2.0, 3.0])).unwrap();
        assert!((n - 6.0).abs() < 1e-14);
    }

    #[test]
    fn trace_norm_density_matrix_is_one() {
        let mut rng = rng(5);
        let g = gaussian(&mut rng, 4, 4);
        let rho = g.matmul(&g.adjoint());
        let rho = rho.scale(1.0 / rho.trace().re);
        assert!((trace_norm(&rho).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ky_fan_norms() {
        assert!((ky_fan_norm(&CMatrix::diag_real(&[1.0, 2.0, 3.0])).unwrap() - 6.0).abs() < 1e-14);
        assert_eq!(ky_fan_norm(&CMatrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn inv_sqrt_examples() {
        assert!(inv_sqrt_psd(&CMatrix::identity(3), RANK_TOL)
            .unwrap()
            .max_abs_diff(&CMatrix::identity(3))
            < 1e-15);
        let r = inv_sqrt_psd(&CMatrix::diag_real(&[4.0, 1.0]), RANK_TOL).unwrap();
        assert!(r.max_abs_diff(&CMatrix::diag_real(&[0.5, 1.0])) < 1e-15);
        let r = inv_sqrt_psd(&CMatrix::diag_real(&[1.0, 0.0]), RANK_TOL).unwrap();
        assert!(r.max_abs_diff(&CMatrix::diag_real(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn inv_sqrt_rejects_negative() {
        let r = inv_sqrt_psd(&CMatrix::diag_real(&[1.0, -1e-6]), RANK_TOL);
        assert!(matches!(r, Err(Error::NotPsd(_))));
    }

    #[test]
    fn qr_gives_unitary() {
        let mut rng = rng(1);
        let u = unitary(&mut rng, 9);
        assert!(unitarity_defect(&u) < 1e-13);
    }

    #[test]
    fn numerical_rank_relative() {
        assert_eq!(numerical_rank(&[0.0, 1e-12, 0.5, 1.0], RANK_TOL), 2);
        assert_eq!(numerical_rank(&[0.0, 0.0], RANK_TOL), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn eigh_reconstructs(seed in any::<u64>(), n in 1usize..=32) {
            let mut rng = rng(seed);
            let h = hermitian(&mut rng, n);
            let e = eigh(&h).unwrap();
            prop_assert!(e.reconstruct().max_abs_diff(&h) <= 1e-10);
            prop_assert!(unitarity_defect(&e.vectors) <= 1e-10);
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn svd_reconstructs(seed in any::<u64>(), rows in 1usize..=64, cols in 1usize..=64) {
            let mut rng = rng(seed);
            let m = gaussian(&mut rng, rows, cols);
            let s = svd(&m).unwrap();
            prop_assert!(s.reconstruct().max_abs_diff(&m) <= 1e-10);
            prop_assert!(unitarity_defect(&s.u) <= 1e-10);
            prop_assert!(unitarity_defect(&s.v) <= 1e-10);
            prop_assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn trace_norm_matches_ky_fan_and_svd(seed in any::<u64>(), n in 1usize..=12) {
            let mut rng = rng(seed);
            let h = hermitian(&mut rng, n);
            let g = gaussian(&mut rng, n, n + 1);
            prop_assert_eq!(trace_norm(&h).unwrap(), ky_fan_norm(&h).unwrap());
            prop_assert_eq!(trace_norm(&g).unwrap(), ky_fan_norm(&g).unwrap());
            let via_svd = singular_value_sum(&h).unwrap();
            prop_assert!((trace_norm(&h).unwrap() - via_svd).abs() <= 1e-10 * via_svd.max(1.0));
        }

        #[test]
        fn trace_norm_unitarily_invariant(seed in any::<u64>(), n in 1usize..=10) {
            let mut rng = rng(seed);
            let m = gaussian(&mut rng, n, n);
            let u = unitary(&mut rng, n);
            let w = unitary(&mut rng, n);
            let rotated = u.matmul(&m).matmul(&w);
            prop_assert!((trace_norm(&rotated).unwrap() - trace_norm(&m).unwrap()).abs() <= 1e-10);
        }
    }
}

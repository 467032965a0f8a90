//! Entanglement criteria and measures for a bipartite `N × M` state.
//!
//! Detection statistics are compared with a strict inequality and a
//! `DEADBAND` margin: a statistic within `1e-10` of its threshold is
//! `NotDetected`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::CorrelationSvd;
use crate::error::{Error, Result};
use crate::numerics::random::{haar_isometry, stream, gaussian_matrix};
use crate::numerics::{eigh, eigvalsh, kron, numerical_rank, qr, singular_value_sum, sqrt_psd, CMatrix, RANK_TOL};
use crate::states::{partial_transpose, DensityMatrix, StateVector};
use crate::subasis::{cached_generators, gell_mann_index};

pub const DEADBAND: f64 = 1e-10;
/// Agreement required between the two negativity routes.
pub const NEGATIVITY_CROSSCHECK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    EntanglementDetected,
    NotDetected,
    SeparabilityCertified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub notes: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Exact,
    UpperBound,
}

/// Record of a convex-roof search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoofSearch {
    pub seed: u64,
    pub ensemble_size: usize,
    pub restarts: usize,
    pub iterations: usize,
    pub best_restart: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub name: String,
    pub value: f64,
    pub kind: MeasureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<RoofSearch>,
}

impl MeasureValue {
    fn exact(name: &str, value: f64) -> Self {
        Self {
            name: name.into(),
            value: value.max(0.0),
            kind: MeasureKind::Exact,
            search: None,
        }
    }
}

fn detect(statistic: f64, threshold: f64) -> Verdict {
    if statistic > threshold + DEADBAND {
        Verdict::EntanglementDetected
    } else {
        Verdict::NotDetected
    }
}

/// Whether the correlation matrix came from a normal-form state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    NormalForm,
    /// Statistic computed on an unfiltered state; recorded in the notes.
    Override,
}

impl Gate {
    fn note(self) -> &'static str {
        match self {
            Gate::NormalForm => "normal form",
            Gate::Override => "normal-form gate overridden, unfiltered correlation matrix",
        }
    }
}

/// `(Σ τ)² > 4(N−1)(M−1)/(NM)`. Never certifies separability.
pub fn kf_criterion(csvd: &CorrelationSvd, gate: Gate) -> CriterionResult {
    let (n, m) = (csvd.dims.0 as f64, csvd.dims.1 as f64);
    let kf = csvd.ky_fan();
    let threshold = 4.0 * (n - 1.0) * (m - 1.0) / (n * m);
    CriterionResult {
        name: "ky_fan".into(),
        statistic: kf * kf,
        threshold,
        verdict: detect(kf * kf, threshold),
        notes: format!("{}; ||T||_KF = {kf}", gate.note()),
    }
}

/// `𝒦 = √(N(N−1)M(M−1))/2 · Σ τ > 1`.
pub fn length_bound_criterion(csvd: &CorrelationSvd, gate: Gate) -> CriterionResult {
    let (n, m) = (csvd.dims.0 as f64, csvd.dims.1 as f64);
    let k = (n * (n - 1.0) * m * (m - 1.0)).sqrt() / 2.0 * csvd.ky_fan();
    CriterionResult {
        name: "length_bound".into(),
        statistic: k,
        threshold: 1.0,
        verdict: detect(k, 1.0),
        notes: gate.note().into(),
    }
}

/// Negativity `(‖ρ^{T_A}‖₁ − 1)/2`, computed from the SVD trace norm and
/// from the negative eigenvalues of `ρ^{T_A}`. PPT certifies separability
/// when `NM ≤ 6` or one side is one-dimensional.
pub fn ppt_negativity(rho: &DensityMatrix) -> Result<(CriterionResult, MeasureValue)> {
    let (n, m) = rho.bipartite_dims()?;
    let pt = partial_transpose(rho, 0)?;
    let eigs = eigvalsh(&pt)?;
    let from_eigs: f64 = -eigs.iter().filter(|&&x| x < 0.0).sum::<f64>();
    let from_norm = (singular_value_sum(&pt)? - 1.0) / 2.0;
    let gap = (from_eigs - from_norm).abs();
    let negativity = from_eigs.max(0.0);

    let verdict = if negativity > DEADBAND {
        Verdict::EntanglementDetected
    } else if n * m <= 6 || n.min(m) == 1 {
        Verdict::SeparabilityCertified
    } else {
        Verdict::NotDetected
    };
    let mut notes = format!(
        "min PT eigenvalue {}; trace-norm route {from_norm}, |difference| {gap:.3e}",
        eigs[0]
    );
    if gap > NEGATIVITY_CROSSCHECK_TOL {
        notes.push_str("; cross-check exceeded tolerance");
    }
    match verdict {
        Verdict::SeparabilityCertified => notes.push_str("; PPT is sufficient at these dimensions"),
        Verdict::NotDetected => notes.push_str("; PPT, bound entanglement not excluded"),
        Verdict::EntanglementDetected => {}
    }
    let criterion = CriterionResult {
        name: "ppt".into(),
        statistic: negativity,
        threshold: 0.0,
        verdict,
        notes,
    };
    Ok((criterion, MeasureValue::exact("negativity", negativity)))
}

/// `√(2(1 − Tr ρ_A²))` for a pure bipartite state.
pub fn concurrence_pure(s: &StateVector) -> Result<MeasureValue> {
    let &[n, m] = s.dims() else {
        return Err(Error::DimensionMismatch(format!(
            "concurrence needs a bipartite state, got dims {:?}",
            s.dims()
        )));
    };
    let s = s.clone().normalized()?;
    let g = CMatrix::from_vec(n, m, s.amplitudes().to_vec())?;
    let ra = g.matmul(&g.adjoint());
    let purity = ra.trace_product(&ra).re;
    Ok(MeasureValue::exact("concurrence", (2.0 * (1.0 - purity)).max(0.0).sqrt()))
}

/// Two-qubit concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`, with `λᵢ` the
/// decreasing square roots of the spectrum of `√ρ ρ̃ √ρ`,
/// `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn wootters(rho: &DensityMatrix) -> Result<MeasureValue> {
    if rho.bipartite_dims()? != (2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "Wootters formula needs 2x2, got {:?}",
            rho.dims()
        )));
    }
    let sy = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => Complex64::new(0.0, -1.0),
        (1, 0) => Complex64::new(0.0, 1.0),
        _ => Complex64::new(0.0, 0.0),
    });
    let yy = kron(&sy, &sy);
    let flipped = rho.matrix().conj().conjugate_by(&yy);
    let root = sqrt_psd(rho.matrix())?;
    let r = root.matmul(&flipped).matmul(&root);
    let mut l: Vec<f64> = eigvalsh(&r.hermitian_part())?
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    l.reverse();
    Ok(MeasureValue::exact("concurrence", l[0] - l[1] - l[2] - l[3]))
}

/// Settings for the convex-roof search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoofBudget {
    pub seed: u64,
    pub restarts: usize,
    pub iterations: usize,
    /// Ensemble size is `rank(ρ) + extra_states`.
    pub extra_states: usize,
}

impl Default for RoofBudget {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 32,
            iterations: 500,
            extra_states: 2,
        }
    }
}

/// Concurrence: Wootters for 2×2, the pure-state formula for rank 1, and a
/// convex-roof upper bound otherwise.
pub fn concurrence_mixed(rho: &DensityMatrix, budget: &RoofBudget) -> Result<MeasureValue> {
    let (n, m) = rho.bipartite_dims()?;
    if n.min(m) == 1 {
        return Ok(MeasureValue::exact("concurrence", 0.0));
    }
    if (n, m) == (2, 2) {
        return wootters(rho);
    }
    let e = eigh(rho.matrix())?;
    if numerical_rank(&e.values, RANK_TOL) == 1 {
        let top = e.vectors.column(n * m - 1);
        return concurrence_pure(&StateVector::normalized_from(vec![n, m], top)?);
    }
    concurrence_roof_bound(rho, budget)
}

/// Convex-roof search over ensembles `ψ̃_i = Σ_j U_ij √λ_j |e_j⟩` with `U`
/// an isometry. Restart 0 starts from the eigen-ensemble, the others from
/// Haar-random isometries; each runs a random local search with a
/// QR retraction. Always an upper bound on the concurrence.
pub fn concurrence_roof_bound(rho: &DensityMatrix, budget: &RoofBudget) -> Result<MeasureValue> {
    let (n, m) = rho.bipartite_dims()?;
    let e = eigh(rho.matrix())?;
    let d = n * m;
    let rank = numerical_rank(&e.values, RANK_TOL).max(1);
    let k = rank + budget.extra_states;
    // columns √λ_j e_j, largest first
    let psi = CMatrix::from_fn(d, rank, |i, j| {
        let col = d - 1 - j;
        e.vectors[(i, col)] * e.values[col].max(0.0).sqrt()
    });
    let restarts = budget.restarts.max(1);
    let results: Vec<(f64, usize)> = (0..restarts)
        .into_par_iter()
        .map(|r| (roof_restart(&psi, (n, m), k, r, budget), r))
        .collect();
    let (value, best_restart) = results
        .into_iter()
        .fold((f64::INFINITY, 0), |best, cur| if cur.0 < best.0 { cur } else { best });
    Ok(MeasureValue {
        name: "concurrence".into(),
        value: value.max(0.0),
        kind: MeasureKind::UpperBound,
        search: Some(RoofSearch {
            seed: budget.seed,
            ensemble_size: k,
            restarts,
            iterations: budget.iterations,
            best_restart,
        }),
    })
}

fn roof_restart(psi: &CMatrix, dims: (usize, usize), k: usize, restart: usize, budget: &RoofBudget) -> f64 {
    let rank = psi.cols();
    let mut rng = stream(budget.seed, restart as u64);
    let mut u = if restart == 0 {
        CMatrix::from_fn(k, rank, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    } else {
        haar_isometry(&mut rng, k, rank)
    };
    let mut best = average_concurrence(psi, &u, dims);
    let mut step = 0.3;
    for _ in 0..budget.iterations {
        let trial = qr(&(&u + &gaussian_matrix(&mut rng, k, rank).scale(step))).0;
        let value = average_concurrence(psi, &trial, dims);
        if value < best {
            best = value;
            u = trial;
            step = (step * 1.2).min(1.0);
        } else {
            step = (step * 0.8).max(1e-6);
        }
    }
    best
}

/// `Σ_i p_i C(ψ_i) = Σ_i √(2(p_i² − Tr ρ̃_{A,i}²))` with unnormalized
/// `ρ̃_{A,i} = G_i G_i†`.
fn average_concurrence(psi: &CMatrix, u: &CMatrix, (n, m): (usize, usize)) -> f64 {
    let (d, rank) = (psi.rows(), psi.cols());
    let mut total = 0.0;
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    for i in 0..u.rows() {
        for (x, row) in v.iter_mut().zip(0..d) {
            *x = (0..rank).map(|j| u[(i, j)] * psi[(row, j)]).sum();
        }
        let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let mut purity = 0.0;
        for a in 0..n {
            for b in 0..n {
                let g: Complex64 = (0..m).map(|c| v[a * m + c] * v[b * m + c].conj()).sum();
                purity += g.norm_sqr();
            }
        }
        total += (2.0 * (p * p - purity)).max(0.0).sqrt();
    }
    total
}

/// Sufficient separability region for the 2×4 family of
/// `build_example1_state`: `t₁²/α₁² + t₃²/α₃² ≤ ¼`, `t₂²/α₂² ≤ ¼`,
/// `Σα² ≤ 1`. A zero `αᵢ` only admits `tᵢ = 0`.
pub fn example1_region(t: [f64; 3], alpha: [f64; 3]) -> bool {
    let q = |t: f64, a: f64| {
        if a == 0.0 {
            if t == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            t * t / (a * a)
        }
    };
    q(t[0], alpha[0]) + q(t[2], alpha[2]) <= 0.25
        && q(t[1], alpha[1]) <= 0.25
        && alpha.iter().map(|a| a * a).sum::<f64>() <= 1.0
}

/// The α minimizing `Σα²` among those admitting `t`; `t` lies in the region
/// for some α iff `4(|t₁|+|t₃|)² + 4t₂² ≤ 1`.
pub fn example1_minimal_alpha(t: [f64; 3]) -> [f64; 3] {
    let s = t[0].abs() + t[2].abs();
    [
        (4.0 * t[0].abs() * s).sqrt(),
        2.0 * t[1].abs(),
        (4.0 * t[2].abs() * s).sqrt(),
    ]
}

/// `I⊗I/8 + ¼(t₁ σ₁⊗λ₁ + t₂ σ₂⊗λ₁₃ + t₃ σ₃⊗λ₃)` on 2×4, with λ labels in
/// the conventional Gell-Mann numbering (λ₁ = sym(0,1), λ₃ = diag(1,−1,0,0),
/// λ₁₃ = sym(2,3)).
pub fn build_example1_state(t1: f64, t2: f64, t3: f64) -> Result<DensityMatrix> {
    let pauli = cached_generators(2)?;
    let su4 = cached_generators(4)?;
    let lam = |label| -> Result<&CMatrix> { Ok(&su4.matrices[gell_mann_index(4, label)?]) };
    let mut rho = CMatrix::identity(8).scale(1.0 / 8.0);
    for (t, s, l) in [(t1, 0, 1), (t2, 1, 13), (t3, 2, 3)] {
        rho = &rho + &kron(&pauli.matrices[s], lam(l)?).scale(t / 4.0);
    }
    DensityMatrix::new(vec![2, 4], rho)
}

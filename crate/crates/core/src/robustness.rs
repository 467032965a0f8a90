//! Qubit-loss classification of `2 × N × M` states: trace out the qubit,
//! reduce to the local supports, filter to the normal form, and pool the
//! detection evidence. Also the state families used in sweeps and the
//! negativity/concurrence scatter.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{bloch_decompose, correlation_svd, normal_form, NormalFormSettings};
use crate::criteria::{
    build_example1_state, concurrence_mixed, concurrence_pure, example1_region, kf_criterion,
    length_bound_criterion, ppt_negativity, wootters, CriterionResult, Gate, MeasureValue, RoofBudget, Verdict,
    DEADBAND,
};
use crate::error::{Error, Result};
use crate::numerics::random::{haar_unitary, stream, sub_seed, uniform_simplex};
use crate::numerics::{eigh, numerical_rank, CMatrix, RANK_TOL, ZERO};
use crate::states::{canonical_tripartite, density, partial_trace, reduce_support, DensityMatrix, StateVector};

/// Identifies the random two-qubit ensemble of `fig1_scatter`.
pub const SAMPLING_SCHEME: &str = "haar-qr-gaussian+dirichlet-1/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Robust,
    Fragile,
    Undetermined,
}

impl Classification {
    pub fn from_criteria(criteria: &[CriterionResult]) -> Self {
        if criteria.iter().any(|c| c.verdict == Verdict::EntanglementDetected) {
            Classification::Robust
        } else if criteria.iter().any(|c| c.verdict == Verdict::SeparabilityCertified) {
            Classification::Fragile
        } else {
            Classification::Undetermined
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Robust => "robust",
            Classification::Fragile => "fragile",
            Classification::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub rank_tol: f64,
    pub normal_form: NormalFormSettings,
    /// `None` skips the convex-roof search; exact concurrence values
    /// (2×2, pure, product) are still reported.
    pub roof: Option<RoofBudget>,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            rank_tol: RANK_TOL,
            normal_form: NormalFormSettings::default(),
            roof: Some(RoofBudget::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NormalFormStatus {
    Converged { iterations: usize, residual: f64 },
    RankDeficient { side: char, rank: usize, dim: usize },
    NoConvergence { iterations: usize, residual: f64 },
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDescriptor {
    pub kind: String,
    pub dims: Vec<usize>,
    /// The two qunits were swapped to get `N ≤ M`.
    pub permuted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub rank_tol: f64,
    pub nf_tol: f64,
    pub nf_max_iter: usize,
    pub deadband: f64,
    pub roof: Option<RoofBudget>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub input: InputDescriptor,
    pub residual_dims: (usize, usize),
    pub reduced_dims: (usize, usize),
    pub normal_form: NormalFormStatus,
    /// Pooled into the classification.
    pub criteria: Vec<CriterionResult>,
    /// Reported but not pooled.
    pub informational: Vec<CriterionResult>,
    pub measures: Vec<MeasureValue>,
    pub classification: Classification,
    pub provenance: Provenance,
}

impl RobustnessReport {
    pub fn criterion(&self, name: &str) -> Option<&CriterionResult> {
        self.criteria.iter().chain(&self.informational).find(|c| c.name == name)
    }

    pub fn measure(&self, name: &str) -> Option<f64> {
        self.measures.iter().find(|m| m.name == name).map(|m| m.value)
    }
}

/// Wall-clock milliseconds per pipeline stage.
pub type Timings = Vec<(String, f64)>;

struct Clock {
    last: Instant,
    out: Timings,
}

impl Clock {
    fn new() -> Self {
        Self {
            last: Instant::now(),
            out: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.out.push((stage.into(), (now - self.last).as_secs_f64() * 1e3));
        self.last = now;
    }
}

pub fn classify_qubit_loss(s: &StateVector, settings: &AnalysisSettings) -> Result<RobustnessReport> {
    classify_qubit_loss_timed(s, settings).map(|(r, _)| r)
}

pub fn classify_qubit_loss_timed(s: &StateVector, settings: &AnalysisSettings) -> Result<(RobustnessReport, Timings)> {
    let mut clock = Clock::new();
    let canon = canonical_tripartite(s)?;
    let residual = partial_trace(&density(&canon.state)?, &[1, 2])?;
    clock.lap("partial_trace");
    let input = InputDescriptor {
        kind: "state_vector".into(),
        dims: s.dims().to_vec(),
        permuted: canon.permuted,
    };
    let report = classify_inner(&residual, input, settings, &mut clock)?;
    Ok((report, clock.out))
}

/// Classifies an already-reduced bipartite state (the residual after the
/// qubit is lost).
pub fn classify_residual(rho: &DensityMatrix, settings: &AnalysisSettings) -> Result<RobustnessReport> {
    classify_residual_timed(rho, settings).map(|(r, _)| r)
}

pub fn classify_residual_timed(rho: &DensityMatrix, settings: &AnalysisSettings) -> Result<(RobustnessReport, Timings)> {
    let mut clock = Clock::new();
    let input = InputDescriptor {
        kind: "density_matrix".into(),
        dims: rho.dims().to_vec(),
        permuted: false,
    };
    let report = classify_inner(rho, input, settings, &mut clock)?;
    Ok((report, clock.out))
}

fn classify_inner(
    rho: &DensityMatrix,
    input: InputDescriptor,
    settings: &AnalysisSettings,
    clock: &mut Clock,
) -> Result<RobustnessReport> {
    let residual_dims = rho.bipartite_dims()?;
    let (reduced, reduction) = reduce_support(rho, settings.rank_tol)?;
    clock.lap("reduce_support");

    let mut criteria = Vec::new();
    let mut informational = Vec::new();
    let mut measures = Vec::new();

    let (ppt, negativity) = ppt_negativity(&reduced)?;
    criteria.push(ppt);
    measures.push(negativity);
    clock.lap("ppt");

    let (n, m) = reduction.reduced_dims;
    let nf_settings = NormalFormSettings {
        rank_tol: settings.rank_tol,
        ..settings.normal_form
    };
    let normal_form_status = if n.min(m) < 2 {
        NormalFormStatus::Skipped {
            reason: "one-dimensional local support".into(),
        }
    } else {
        match normal_form(&reduced, nf_settings) {
            Ok(nf) => {
                let csvd = correlation_svd(&bloch_decompose(&nf.state)?)?;
                criteria.push(kf_criterion(&csvd, Gate::NormalForm));
                informational.push(length_bound_criterion(&csvd, Gate::NormalForm));
                NormalFormStatus::Converged {
                    iterations: nf.iterations,
                    residual: nf.residual,
                }
            }
            Err(e) => {
                let status = match e {
                    Error::RankDeficient { side, rank, dim } => NormalFormStatus::RankDeficient { side, rank, dim },
                    Error::NoConvergence { iterations, residual } => {
                        NormalFormStatus::NoConvergence { iterations, residual }
                    }
                    other => return Err(other),
                };
                let csvd = correlation_svd(&bloch_decompose(&reduced)?)?;
                let mut kf = kf_criterion(&csvd, Gate::Override);
                kf.name = "ky_fan_unfiltered".into();
                informational.push(kf);
                status
            }
        }
    };
    clock.lap("normal_form");

    match &settings.roof {
        Some(budget) => measures.push(concurrence_mixed(&reduced, budget)?),
        None => {
            if let Some(c) = exact_concurrence(&reduced)? {
                measures.push(c);
            }
        }
    }
    clock.lap("concurrence");

    let classification = Classification::from_criteria(&criteria);
    Ok(RobustnessReport {
        input,
        residual_dims,
        reduced_dims: reduction.reduced_dims,
        normal_form: normal_form_status,
        criteria,
        informational,
        measures,
        classification,
        provenance: Provenance {
            seed: settings.roof.map(|b| b.seed),
            rank_tol: settings.rank_tol,
            nf_tol: settings.normal_form.tol,
            nf_max_iter: settings.normal_form.max_iter,
            deadband: DEADBAND,
            roof: settings.roof,
            version: env!("CARGO_PKG_VERSION").into(),
        },
    })
}

/// Concurrence when a closed form applies: 2×2, product supports, rank 1.
fn exact_concurrence(rho: &DensityMatrix) -> Result<Option<MeasureValue>> {
    let (n, m) = rho.bipartite_dims()?;
    if n.min(m) == 1 || (n, m) == (2, 2) {
        return concurrence_mixed(rho, &RoofBudget::default()).map(Some);
    }
    let e = eigh(rho.matrix())?;
    if numerical_rank(&e.values, RANK_TOL) == 1 {
        let top = e.vectors.column(n * m - 1);
        return concurrence_pure(&StateVector::normalized_from(vec![n, m], top)?).map(Some);
    }
    Ok(None)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `(|000⟩ + |111⟩)/√2`
pub fn ghz() -> StateVector {
    let mut a = vec![ZERO; 8];
    a[0] = real(1.0);
    a[7] = real(1.0);
    StateVector::normalized_from(vec![2, 2, 2], a).expect("nonzero")
}

/// `(|001⟩ + |010⟩ + |100⟩)/√3`
pub fn w() -> StateVector {
    let mut a = vec![ZERO; 8];
    for k in [1, 2, 4] {
        a[k] = real(1.0);
    }
    StateVector::normalized_from(vec![2, 2, 2], a).expect("nonzero")
}

/// `(β₁|0,N,M⟩ + β₂|1,0,M⟩ + β₃|1,N,0⟩)/√α` on `2 × n × m`, with `N = n−1`
/// and `M = m−1` the top levels.
pub fn example3_family(n: usize, m: usize, beta: [Complex64; 3]) -> Result<StateVector> {
    if n < 2 || m < 2 || n > m {
        return Err(Error::InvalidParams(format!("example 3 needs 2 <= n <= m, got n={n}, m={m}")));
    }
    if beta.iter().all(|b| b.norm_sqr() == 0.0) {
        return Err(Error::DegenerateFamily("all beta coefficients are zero".into()));
    }
    let (top_n, top_m) = (n - 1, m - 1);
    let idx = |q: usize, j: usize, k: usize| (q * n + j) * m + k;
    let mut a = vec![ZERO; 2 * n * m];
    a[idx(0, top_n, top_m)] += beta[0];
    a[idx(1, 0, top_m)] += beta[1];
    a[idx(1, top_n, 0)] += beta[2];
    StateVector::normalized_from(vec![2, n, m], a)
}

/// Weight `p = (|β₂|² + |β₃|²)/Σ|β|²` of the entangled component of the
/// example-3 residual.
pub fn example3_mixing(beta: [Complex64; 3]) -> f64 {
    let total: f64 = beta.iter().map(|b| b.norm_sqr()).sum();
    (beta[1].norm_sqr() + beta[2].norm_sqr()) / total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// `p|ψ^±⟩⟨ψ^±| + (1−p) I/n²` with `|ψ^±⟩ = α|e e⊥⟩ ± β|e⊥ e⟩`.
pub fn observation1_family(
    n: usize,
    alpha: f64,
    beta: f64,
    p: f64,
    e: usize,
    e_perp: usize,
    sign: Sign,
) -> Result<DensityMatrix> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("n must be >= 2, got {n}")));
    }
    if ((alpha * alpha + beta * beta) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!("alpha^2 + beta^2 = {} != 1", alpha * alpha + beta * beta)));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!("p = {p} outside [0, 1]")));
    }
    if e == e_perp || e >= n || e_perp >= n {
        return Err(Error::InvalidParams(format!("need distinct levels below {n}, got e={e}, e_perp={e_perp}")));
    }
    let s = if sign == Sign::Plus { 1.0 } else { -1.0 };
    let mut psi = vec![ZERO; n * n];
    psi[e * n + e_perp] = real(alpha);
    psi[e_perp * n + e] = real(s * beta);
    let proj = CMatrix::outer(&psi, &psi);
    let rho = &proj.scale(p) + &CMatrix::identity(n * n).scale((1.0 - p) / (n * n) as f64);
    DensityMatrix::new(vec![n, n], rho)
}

/// The 3×3 bound entangled state built from the five-tile unextendible
/// product basis, `¼(I₉ − Σ|ψᵢ⟩⟨ψᵢ|)`.
pub fn tiles_state() -> DensityMatrix {
    let h = 0.5f64.sqrt();
    let ket = |v: [f64; 3]| v.map(real);
    let prod = |a: [Complex64; 3], b: [Complex64; 3]| -> Vec<Complex64> {
        (0..9).map(|k| a[k / 3] * b[k % 3]).collect()
    };
    let third = 1.0 / 3.0f64.sqrt();
    let tiles = [
        prod(ket([1.0, 0.0, 0.0]), ket([h, -h, 0.0])),
        prod(ket([h, -h, 0.0]), ket([0.0, 0.0, 1.0])),
        prod(ket([0.0, 0.0, 1.0]), ket([0.0, h, -h])),
        prod(ket([0.0, h, -h]), ket([1.0, 0.0, 0.0])),
        prod(ket([third; 3]), ket([third; 3])),
    ];
    let mut m = CMatrix::identity(9);
    for t in &tiles {
        m = &m - &CMatrix::outer(t, t);
    }
    DensityMatrix::new(vec![3, 3], m.scale(0.25)).expect("tiles state is a valid density matrix")
}

/// Points `(t, α)` drawn inside the separable region: α uniform in the unit
/// ball, `(t₁/α₁, t₃/α₃)` uniform in the disc of radius ½, `t₂/α₂` uniform
/// in `[−½, ½]`.
pub fn example1_region_samples(count: usize, seed: u64) -> Vec<([f64; 3], [f64; 3])> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    (0..count as u64)
        .map(|i| {
            let mut r = stream(seed, i);
            loop {
                let g: [f64; 3] = std::array::from_fn(|_| r.sample(StandardNormal));
                let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                let radius = r.random::<f64>().cbrt();
                let alpha = g.map(|x| x / norm * radius);
                let rho = 0.5 * r.random::<f64>().sqrt();
                let phi = std::f64::consts::TAU * r.random::<f64>();
                let t = [
                    alpha[0] * rho * phi.cos(),
                    alpha[1] * (r.random::<f64>() - 0.5),
                    alpha[2] * rho * phi.sin(),
                ];
                if example1_region(t, alpha) {
                    return (t, alpha);
                }
            }
        })
        .collect()
}

/// A state-producing family with named real parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// 2×4 state of `build_example1_state`: `t1 t2 t3`, optional `a1 a2 a3`.
    Example1,
    /// `n m b1 b2 b3`, real β.
    Example3,
    /// `n alpha beta p e e_perp sign`; `beta` defaults to `√(1−α²)`.
    Observation1,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Example1 => "example1",
            Family::Example3 => "example3",
            Family::Observation1 => "observation1",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "example1" => Some(Family::Example1),
            "example3" => Some(Family::Example3),
            "observation1" => Some(Family::Observation1),
            _ => None,
        }
    }

    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            Family::Example1 => &["t1", "t2", "t3", "a1", "a2", "a3"],
            Family::Example3 => &["n", "m", "b1", "b2", "b3"],
            Family::Observation1 => &["n", "alpha", "beta", "p", "e", "e_perp", "sign"],
        }
    }

    fn default_value(self, name: &str) -> Option<f64> {
        match (self, name) {
            (Family::Example1, "t1" | "t2" | "t3") => Some(0.0),
            (Family::Example3, "n" | "m") => Some(3.0),
            (Family::Example3, _) => Some(1.0),
            (Family::Observation1, "n") => Some(2.0),
            (Family::Observation1, "alpha") => Some(0.5f64.sqrt()),
            (Family::Observation1, "p" | "e") => Some(0.0),
            (Family::Observation1, "e_perp" | "sign") => Some(1.0),
            _ => None,
        }
    }
}

/// Cartesian product of named axes; the first axis varies slowest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Grid {
    pub axes: Vec<(String, Vec<f64>)>,
}

impl Grid {
    /// `count` evenly spaced values from `start` to `stop` inclusive.
    pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..count)
                .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            return 0;
        }
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, mut index: usize) -> Vec<(String, f64)> {
        let mut out = vec![(String::new(), 0.0); self.axes.len()];
        for (slot, (name, values)) in out.iter_mut().zip(&self.axes).rev() {
            *slot = (name.clone(), values[index % values.len()]);
            index /= values.len();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    /// Every family parameter, grid values first, then fixed values.
    pub params: Vec<(String, f64)>,
    pub outcome: std::result::Result<RobustnessReport, String>,
    /// For example1 points that set α: whether `(t, α)` is in the region.
    pub in_region: Option<bool>,
}

/// Evaluates `family` at every grid point. Point `i` uses the roof-search
/// seed `sub_seed(seed, i)`; errors are kept per point.
pub fn sweep(
    family: Family,
    grid: &Grid,
    fixed: &[(String, f64)],
    settings: &AnalysisSettings,
) -> Result<Vec<SweepPoint>> {
    let known = family.parameters();
    for name in grid.axes.iter().map(|(n, _)| n).chain(fixed.iter().map(|(n, _)| n)) {
        if !known.contains(&name.as_str()) {
            return Err(Error::InvalidParams(format!(
                "unknown parameter '{name}' for {} (expected one of {known:?})",
                family.name()
            )));
        }
    }
    Ok((0..grid.len())
        .into_par_iter()
        .map(|index| {
            let mut params = grid.point(index);
            for (k, v) in fixed {
                if !params.iter().any(|(n, _)| n == k) {
                    params.push((k.clone(), *v));
                }
            }
            let mut local = *settings;
            if let Some(b) = local.roof.as_mut() {
                b.seed = sub_seed(b.seed, index as u64);
            }
            let (outcome, in_region) = match evaluate(family, &params, &local) {
                Ok((r, region)) => (Ok(r), region),
                Err(e) => (Err(e.to_string()), None),
            };
            SweepPoint {
                index,
                params,
                outcome,
                in_region,
            }
        })
        .collect())
}

fn evaluate(
    family: Family,
    params: &[(String, f64)],
    settings: &AnalysisSettings,
) -> Result<(RobustnessReport, Option<bool>)> {
    let get = |name: &str| params.iter().find(|(n, _)| n == name).map(|(_, v)| *v);
    let value = |name: &str| {
        get(name)
            .or_else(|| family.default_value(name))
            .ok_or_else(|| Error::InvalidParams(format!("missing parameter '{name}'")))
    };
    let int = |name: &str| -> Result<usize> {
        let v = value(name)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::InvalidParams(format!("{name} = {v} must be a nonnegative integer")));
        }
        Ok(v as usize)
    };
    match family {
        Family::Example1 => {
            let t = [value("t1")?, value("t2")?, value("t3")?];
            let alpha = match (get("a1"), get("a2"), get("a3")) {
                (None, None, None) => None,
                (a1, a2, a3) => Some([a1.unwrap_or(0.0), a2.unwrap_or(0.0), a3.unwrap_or(0.0)]),
            };
            let rho = build_example1_state(t[0], t[1], t[2])?;
            let mut report = classify_residual(&rho, settings)?;
            report.input.kind = "example1".into();
            Ok((report, alpha.map(|a| example1_region(t, a))))
        }
        Family::Example3 => {
            let beta = [value("b1")?, value("b2")?, value("b3")?].map(real);
            let s = example3_family(int("n")?, int("m")?, beta)?;
            let mut report = classify_qubit_loss(&s, settings)?;
            report.input.kind = "example3".into();
            Ok((report, None))
        }
        Family::Observation1 => {
            let alpha = value("alpha")?;
            let beta = match get("beta") {
                Some(b) => b,
                None => (1.0 - alpha * alpha).max(0.0).sqrt(),
            };
            let sign = if value("sign")? < 0.0 { Sign::Minus } else { Sign::Plus };
            let rho = observation1_family(int("n")?, alpha, beta, value("p")?, int("e")?, int("e_perp")?, sign)?;
            let mut report = classify_residual(&rho, settings)?;
            report.input.kind = "observation1".into();
            Ok((report, None))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub concurrence: f64,
    pub negativity: f64,
}

/// Exact Wootters concurrence and negativity of a two-qubit state.
pub fn scatter_point(rho: &DensityMatrix) -> Result<ScatterPoint> {
    Ok(ScatterPoint {
        concurrence: wootters(rho)?.value,
        negativity: ppt_negativity(rho)?.1.value,
    })
}

/// `U diag(p) U†` with `U` Haar (QR of a complex Gaussian) and `p` uniform
/// on the simplex; sample `i` draws from stream `(seed, i)`.
pub fn random_two_qubit_state(seed: u64, index: u64) -> DensityMatrix {
    let mut r = stream(seed, index);
    let u = haar_unitary(&mut r, 4);
    let p = uniform_simplex(&mut r, 4);
    DensityMatrix::new(vec![2, 2], CMatrix::diag_real(&p).conjugate_by(&u)).expect("valid by construction")
}

pub fn fig1_scatter(samples: usize, seed: u64) -> Result<Vec<ScatterPoint>> {
    if samples == 0 {
        return Err(Error::InvalidParams("samples must be >= 1".into()));
    }
    (0..samples as u64)
        .into_par_iter()
        .map(|i| scatter_point(&random_two_qubit_state(seed, i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::haar_unitary;
    use crate::numerics::testing::rng;
    use crate::numerics::eigvalsh;
    use crate::states::partial_transpose;

    fn quick() -> AnalysisSettings {
        AnalysisSettings {
            roof: None,
            ..Default::default()
        }
    }

    fn example4() -> StateVector {
        let mut a = vec![ZERO; 18];
        for (q, j, k) in [(0, 1, 0), (0, 0, 1), (1, 1, 2), (1, 2, 1)] {
            a[(q * 3 + j) * 3 + k] = real(1.0);
        }
        StateVector::normalized_from(vec![2, 3, 3], a).unwrap()
    }

    #[test]
    fn ghz_is_fragile_w_is_robust() {
        let g = classify_qubit_loss(&ghz(), &AnalysisSettings::default()).unwrap();
        assert_eq!(g.classification, Classification::Fragile);
        assert_eq!(g.criterion("ppt").unwrap().verdict, Verdict::SeparabilityCertified);
        assert!(g.measure("concurrence").unwrap().abs() < 1e-12);

        let w = classify_qubit_loss(&w(), &AnalysisSettings::default()).unwrap();
        assert_eq!(w.classification, Classification::Robust);
        assert!((w.measure("negativity").unwrap() - (5f64.sqrt() - 1.0) / 6.0).abs() < 1e-12);
        assert!((w.measure("concurrence").unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn w_marginal() {
        let rho = partial_trace(&density(&w()).unwrap(), &[1]).unwrap();
        let want = CMatrix::diag_real(&[2.0 / 3.0, 1.0 / 3.0]);
        assert!(rho.matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn example4_is_robust() {
        let r = classify_qubit_loss(&example4(), &AnalysisSettings::default()).unwrap();
        assert_eq!(r.classification, Classification::Robust);
        assert_eq!(r.residual_dims, (3, 3));
        assert!((r.measure("negativity").unwrap() - 1.0 / 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tiles_state_is_bound_entangled() {
        let t = tiles_state();
        assert!((t.matrix().trace().re - 1.0).abs() < 1e-15);
        let e = eigvalsh(t.matrix()).unwrap();
        assert_eq!(numerical_rank(&e, RANK_TOL), 4);
        let r = classify_residual(&t, &quick()).unwrap();
        assert!(r.measure("negativity").unwrap() <= 1e-10);
        assert_eq!(r.criterion("ppt").unwrap().verdict, Verdict::NotDetected);
        let kf = r.criterion("ky_fan").unwrap();
        assert_eq!(kf.verdict, Verdict::EntanglementDetected);
        // numpy recomputation of the normal-form Ky Fan norm
        assert!((kf.statistic.sqrt() - 1.652484).abs() < 1e-5, "{}", kf.statistic.sqrt());
        assert_eq!(r.classification, Classification::Robust);
    }

    #[test]
    fn tiles_raw_ky_fan() {
        let csvd = correlation_svd(&bloch_decompose(&tiles_state()).unwrap()).unwrap();
        assert!((csvd.ky_fan() - 1.404562).abs() < 1e-5, "{}", csvd.ky_fan());
    }

    #[test]
    fn example3_cases() {
        let c = |re: f64| real(re);
        let pure = example3_family(3, 3, [c(0.0), c(1.0), c(1.0)]).unwrap();
        let r = classify_qubit_loss(&pure, &quick()).unwrap();
        assert!((r.measure("negativity").unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(r.classification, Classification::Robust);

        let product = example3_family(3, 3, [c(1.0), c(0.0), c(0.0)]).unwrap();
        let r = classify_qubit_loss(&product, &quick()).unwrap();
        assert_eq!(r.reduced_dims, (1, 1));
        assert_eq!(r.classification, Classification::Fragile);

        let beta = [c(1.0), c(1.0), c(1.0)];
        assert!((example3_mixing(beta) - 2.0 / 3.0).abs() < 1e-15);
        let r = classify_qubit_loss(&example3_family(3, 3, beta).unwrap(), &quick()).unwrap();
        assert!((r.measure("negativity").unwrap() - 0.20601132958329832).abs() < 1e-12);
        assert_eq!(r.classification, Classification::Robust);

        let r = classify_qubit_loss(&example3_family(3, 3, [c(1.0), c(2.0), c(1.0)]).unwrap(), &quick()).unwrap();
        assert!((r.measure("negativity").unwrap() - 0.260259).abs() < 1e-6);

        assert!(matches!(example3_family(3, 3, [c(0.0); 3]), Err(Error::DegenerateFamily(_))));
        assert!(matches!(example3_family(4, 3, beta), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn example3_residual_structure() {
        // p|ψ⟩⟨ψ| + (1−p)|NM⟩⟨NM|, |ψ⟩ = (|0M⟩ + |N0⟩)/√2
        let (n, m) = (3, 4);
        let beta = [real(0.6), real(0.8), real(0.8)];
        let p = example3_mixing(beta);
        let rho = partial_trace(&density(&example3_family(n, m, beta).unwrap()).unwrap(), &[1, 2]).unwrap();
        let mut psi = vec![ZERO; n * m];
        psi[m - 1] = real(0.5f64.sqrt());
        psi[(n - 1) * m] = real(0.5f64.sqrt());
        let mut nm = vec![ZERO; n * m];
        nm[n * m - 1] = real(1.0);
        let want = &CMatrix::outer(&psi, &psi).scale(p) + &CMatrix::outer(&nm, &nm).scale(1.0 - p);
        assert!(rho.matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn observation1_cases() {
        let h = 0.5f64.sqrt();
        let ent = observation1_family(2, h, h, 0.5, 0, 1, Sign::Plus).unwrap();
        assert_eq!(classify_residual(&ent, &quick()).unwrap().classification, Classification::Robust);
        let sep = observation1_family(2, h, h, 0.2, 0, 1, Sign::Minus).unwrap();
        let r = classify_residual(&sep, &quick()).unwrap();
        assert_eq!(r.classification, Classification::Fragile);
        let z = observation1_family(3, h, h, 0.0, 0, 2, Sign::Plus).unwrap();
        assert!(z.matrix().max_abs_diff(&CMatrix::identity(9).scale(1.0 / 9.0)) < 1e-16);
        assert!(observation1_family(2, 0.5, 0.5, 0.5, 0, 1, Sign::Plus).is_err());
        assert!(observation1_family(2, h, h, 1.5, 0, 1, Sign::Plus).is_err());
        assert!(observation1_family(2, h, h, 0.5, 1, 1, Sign::Plus).is_err());
    }

    #[test]
    fn observation1_sweep_boundary() {
        let grid = Grid {
            axes: vec![("p".into(), Grid::linspace(0.0, 1.0, 11))],
        };
        let points = sweep(Family::Observation1, &grid, &[], &quick()).unwrap();
        let labels: Vec<_> = points
            .iter()
            .map(|p| p.outcome.as_ref().unwrap().classification)
            .collect();
        for (k, l) in labels.iter().enumerate() {
            let want = if k <= 3 { Classification::Fragile } else { Classification::Robust };
            assert_eq!(*l, want, "p = {}", k as f64 / 10.0);
        }
    }

    #[test]
    fn sweep_plumbing() {
        let empty = sweep(Family::Example3, &Grid::default(), &[], &quick()).unwrap();
        assert!(empty.is_empty());
        let bad = Grid {
            axes: vec![("q".into(), vec![1.0])],
        };
        assert!(sweep(Family::Example3, &bad, &[], &quick()).is_err());
        // per-point errors are recorded inline
        let grid = Grid {
            axes: vec![("b2".into(), vec![0.0, 1.0]), ("b3".into(), vec![0.0, 1.0])],
        };
        let fixed = vec![("b1".to_string(), 0.0)];
        let pts = sweep(Family::Example3, &grid, &fixed, &quick()).unwrap();
        assert_eq!(pts.len(), 4);
        assert!(pts[0].outcome.is_err());
        assert!(pts[1..].iter().all(|p| p.outcome.is_ok()));
        assert_eq!(pts[1].params[..2], [("b2".to_string(), 0.0), ("b3".to_string(), 1.0)]);
    }

    #[test]
    fn sweep_is_deterministic() {
        let grid = Grid {
            axes: vec![("b1".into(), vec![0.5, 1.0, 2.0])],
        };
        let settings = AnalysisSettings {
            roof: Some(RoofBudget {
                restarts: 4,
                iterations: 50,
                seed: 9,
                ..Default::default()
            }),
            ..Default::default()
        };
        let a = sweep(Family::Example3, &grid, &[("n".into(), 2.0)], &settings).unwrap();
        let b = sweep(Family::Example3, &grid, &[("n".into(), 2.0)], &settings).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn example1_samples_are_in_region_and_ppt() {
        for (t, alpha) in example1_region_samples(200, 4) {
            assert!(example1_region(t, alpha));
            let rho = build_example1_state(t[0], t[1], t[2]).unwrap();
            assert!(ppt_negativity(&rho).unwrap().1.value <= 1e-10);
        }
    }

    #[test]
    fn scatter_corner_cases() {
        let bell = StateVector::normalized_from(vec![2, 2], vec![real(1.0), ZERO, ZERO, real(1.0)]).unwrap();
        let p = scatter_point(&density(&bell).unwrap()).unwrap();
        assert!((p.concurrence - 1.0).abs() < 1e-12 && (p.negativity - 0.5).abs() < 1e-12);
        let p = scatter_point(&DensityMatrix::maximally_mixed(vec![2, 2]).unwrap()).unwrap();
        assert!(p.concurrence.abs() < 1e-12 && p.negativity.abs() < 1e-12);
        assert!(fig1_scatter(0, 1).is_err());
        assert_eq!(fig1_scatter(1, 1).unwrap().len(), 1);
    }

    #[test]
    fn scatter_is_deterministic_and_ordered() {
        let a = fig1_scatter(200, 7).unwrap();
        let b = fig1_scatter(200, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.negativity <= p.concurrence + 1e-9));
        let c = fig1_scatter(200, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn classification_is_lu_invariant() {
        let mut r = rng(2024);
        let states = [ghz(), w(), example4()];
        let base: Vec<_> = states
            .iter()
            .map(|s| classify_qubit_loss(s, &quick()).unwrap().classification)
            .collect();
        for trial in 0..50 {
            let s = &states[trial % 3];
            let d = s.dims().to_vec();
            let us: Vec<_> = d.iter().map(|&k| haar_unitary(&mut r, k)).collect();
            let rotated = s.apply_local(&us).unwrap();
            let got = classify_qubit_loss(&rotated, &quick()).unwrap();
            assert_eq!(got.classification, base[trial % 3], "trial {trial}");
        }
    }

    #[test]
    fn negativity_implies_robust() {
        for seed in 0..100u64 {
            let mut r = stream(seed, 0);
            let u = haar_unitary(&mut r, 12);
            let s = StateVector::normalized_from(vec![2, 2, 3], u.column(0)).unwrap();
            let rep = classify_qubit_loss(&s, &quick()).unwrap();
            if rep.measure("negativity").unwrap() > 1e-10 {
                assert_eq!(rep.classification, Classification::Robust);
            }
        }
    }

    #[test]
    fn permuted_inputs_are_canonicalised() {
        let r = classify_qubit_loss(&example3_family(2, 3, [real(1.0); 3]).unwrap().permute(&[0, 2, 1]).unwrap(), &quick())
            .unwrap();
        assert!(r.input.permuted);
        assert_eq!(r.input.dims, vec![2, 3, 2]);
        assert_eq!(r.classification, Classification::Robust);
    }

    #[test]
    fn example4_partial_transpose_spectrum() {
        let rho = partial_trace(&density(&example4()).unwrap(), &[1, 2]).unwrap();
        let e = eigvalsh(&partial_transpose(&rho, 0).unwrap()).unwrap();
        let s = 1.0 / 8f64.sqrt();
        let want = [-s, 0.0, 0.0, 0.0, 0.25, 0.25, 0.25, 0.25, s];
        for (g, w) in e.iter().zip(want) {
            assert!((g - w).abs() < 1e-12);
        }
    }
}

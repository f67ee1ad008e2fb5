//! Spectra of π-self-adjoint operators and the gap quantities built on them:
//! the right gap γ, the absolute gap γ*, the pseudo-spectral gap γ^ps, the
//! MH-spectral gap γ^MH and the Weyl sandwich.
//!
//! A π-self-adjoint `K` is similar to the symmetric `S = D^{1/2} K D^{-1/2}`
//! with `D = diag(π)`. Quantities "on `L²₀`" are eigenvalues of `S`
//! restricted to the orthogonal complement of `√π`; that restriction is taken
//! exactly with one Householder reflection.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::eigen::{symmetric_eigen, symmetric_eigenvalues, Solver};
use crate::error::{MhError, Result};
use crate::kernel::{
    pi_adjoint, renormalize_rows, require_stationary, OperatorKind, PiOperator,
    ProbabilityVector, StochasticKernel,
};
use crate::reversiblize::mh_matrices;

/// Allowed asymmetry of `D_π K` relative to the largest entry of `K`.
pub const SELF_ADJOINT_TOL: f64 = 1e-8;

/// `S = D^{1/2} K D^{-1/2}`, symmetrized after checking self-adjointness.
pub fn symmetrize(m: &DMatrix<f64>, pi: &ProbabilityVector) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if pi.len() != n {
        return Err(MhError::DimensionMismatch {
            expected: n,
            got: pi.len(),
        });
    }
    let root = pi.sqrt();
    let s = DMatrix::from_fn(n, n, |x, y| root[x] * m[(x, y)] / root[y]);
    let asymmetry = (&s - s.transpose()).amax();
    if asymmetry > SELF_ADJOINT_TOL * m.amax().max(1.0) {
        return Err(MhError::NotSelfAdjoint { asymmetry });
    }
    Ok((&s + s.transpose()) * 0.5)
}

/// `D^{1/2} K D^{-1/2}` without symmetrizing, for operators that are not
/// self-adjoint.
pub(crate) fn similarity(m: &DMatrix<f64>, pi: &ProbabilityVector) -> DMatrix<f64> {
    let root = pi.sqrt();
    let n = m.nrows();
    DMatrix::from_fn(n, n, |x, y| root[x] * m[(x, y)] / root[y])
}

/// Eigenvalues of `S` on the complement of `√π`, sorted descending.
pub(crate) fn restricted_eigenvalues(
    s: &DMatrix<f64>,
    pi: &ProbabilityVector,
    solver: Solver,
) -> Result<Vec<f64>> {
    let n = s.nrows();
    if n == 1 {
        return Ok(Vec::new());
    }
    let mut w = pi.sqrt();
    w[0] += 1.0;
    let beta = 2.0 / w.norm_squared();
    let p: DVector<f64> = s * &w * beta;
    let k = 0.5 * beta * w.dot(&p);
    let q = &p - &w * k;
    let reflected = s - &w * q.transpose() - &q * w.transpose();
    let block = reflected.view((1, 1), (n - 1, n - 1)).into_owned();
    let block = (&block + block.transpose()) * 0.5;
    symmetric_eigenvalues(&block, solver)
}

/// `(λ, Λ)`: smallest and largest eigenvalue of a π-self-adjoint operator on
/// `L²₀(π)`.
pub fn l2_0_extremes(m: &DMatrix<f64>, pi: &ProbabilityVector) -> Result<(f64, f64)> {
    let s = symmetrize(m, pi)?;
    let values = restricted_eigenvalues(&s, pi, Solver::Auto)?;
    Ok(extremes(&values))
}

fn extremes(values: &[f64]) -> (f64, f64) {
    match (values.last(), values.first()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0.0, 0.0),
    }
}

/// Full spectrum of a π-self-adjoint operator, sorted descending.
pub fn spectrum(m: &DMatrix<f64>, pi: &ProbabilityVector) -> Result<Vec<f64>> {
    symmetric_eigenvalues(&symmetrize(m, pi)?, Solver::Auto)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Whole spectrum, descending.
    pub eigenvalues: Vec<f64>,
    /// λ: smallest eigenvalue on `L²₀`.
    pub lambda_min: f64,
    /// Λ: largest eigenvalue on `L²₀`.
    pub lambda_max_sub: f64,
    /// β = max(|λ|, Λ).
    pub beta: f64,
    /// Kernels: 1 − Λ. Generators: −Λ, the distance from the spectrum of
    /// `−G` restricted to `L²₀` to zero.
    pub gamma: f64,
    /// Kernels: 1 − β. Generators: equal to `gamma`.
    pub gamma_star: f64,
    pub kind: OperatorKind,
}

pub fn self_adjoint_spectrum<K: PiOperator>(
    k: &K,
    pi: &ProbabilityVector,
) -> Result<SpectrumReport> {
    spectrum_report(k.matrix(), pi, K::KIND)
}

pub fn spectrum_report(
    m: &DMatrix<f64>,
    pi: &ProbabilityVector,
    kind: OperatorKind,
) -> Result<SpectrumReport> {
    let s = symmetrize(m, pi)?;
    let eigenvalues = symmetric_eigenvalues(&s, Solver::Auto)?;
    let (lambda_min, lambda_max_sub) = extremes(&restricted_eigenvalues(&s, pi, Solver::Auto)?);
    let beta = lambda_min.abs().max(lambda_max_sub);
    let (gamma, gamma_star) = match kind {
        OperatorKind::Kernel => (1.0 - lambda_max_sub, 1.0 - beta),
        OperatorKind::Generator => (-lambda_max_sub, -lambda_max_sub),
    };
    Ok(SpectrumReport {
        eigenvalues,
        lambda_min,
        lambda_max_sub,
        beta,
        gamma,
        gamma_star,
        kind,
    })
}

/// Eigenvalues with π-orthonormal eigenfunctions `φ_j = D^{-1/2} v_j`, each
/// signed so that its largest-magnitude entry is positive.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub values: Vec<f64>,
    pub phi: DMatrix<f64>,
}

impl EigenBasis {
    pub fn new(m: &DMatrix<f64>, pi: &ProbabilityVector) -> Result<Self> {
        let s = symmetrize(m, pi)?;
        let eig = symmetric_eigen(&s, Solver::Auto)?;
        let root = pi.sqrt();
        let n = s.nrows();
        let mut phi = DMatrix::from_fn(n, n, |x, j| eig.vectors[(x, j)] / root[x]);
        for j in 0..n {
            let col = phi.column(j);
            let lead = col.iter().copied().fold(0.0_f64, |a, v| {
                if v.abs() > a.abs() {
                    v
                } else {
                    a
                }
            });
            if lead < 0.0 {
                phi.column_mut(j).neg_mut();
            }
        }
        Ok(Self {
            values: eig.values,
            phi,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the eigenfunction closest to the constants.
    pub fn constant_index(&self, pi: &ProbabilityVector) -> usize {
        let w = pi.as_vector();
        (0..self.len())
            .map(|j| (j, self.phi.column(j).component_mul(w).sum().abs()))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0
    }
}

/// γ(P) = 1 − Λ((P + P*)/2).
pub fn right_spectral_gap(p: &StochasticKernel, pi: &ProbabilityVector) -> Result<f64> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let a = (p.matrix() + pi_adjoint(p.matrix(), pi)) * 0.5;
    Ok(1.0 - l2_0_extremes(&a, pi)?.1)
}

/// Left spectral gap of a generator: −Λ((G + G*)/2).
pub fn generator_spectral_gap(g: &DMatrix<f64>, pi: &ProbabilityVector) -> Result<f64> {
    require_stationary(g, pi, OperatorKind::Generator)?;
    let a = (g + pi_adjoint(g, pi)) * 0.5;
    Ok(-l2_0_extremes(&a, pi)?.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Truncation N₀ of the scan over k.
    pub n_max: usize,
    /// Margin below 1 required for membership in 𝓒.
    pub tol: f64,
    pub solver: Solver,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            n_max: 100,
            tol: 1e-9,
            solver: Solver::Auto,
        }
    }
}

impl ScanOptions {
    pub fn with_n_max(n_max: usize) -> Self {
        Self {
            n_max,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRecord {
    pub k: usize,
    /// Λ(M1(Pᵏ)).
    pub lambda_m1: f64,
    /// λ(M2(Pᵏ)), signed.
    pub lambda_m2: f64,
    /// max(Λ(M1(Pᵏ)), 0)^{1/k}.
    pub lambda_m1_root: f64,
    /// |λ(M2(Pᵏ))|^{1/k}.
    pub abs_lambda_m2_root: f64,
    /// γ(P*ᵏPᵏ)/k.
    pub ps_term: f64,
    pub in_c: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapScanResult {
    pub n_max: usize,
    pub per_k: Vec<GapRecord>,
    /// 𝓒ᶜ ∩ [1, n_max].
    pub c_complement: Vec<usize>,
    /// max 𝓒ᶜ ∩ [1, n_max], 0 when empty.
    pub t_star: usize,
    pub beta_mh: f64,
    pub gamma_mh: f64,
    /// Step attaining β^MH, if 𝓒 ∩ [1, n_max] is non-empty.
    pub beta_argmax: Option<usize>,
    pub gamma_ps: f64,
    pub ps_argmax: usize,
    /// Heuristic: ‖P^{n_max} − Π‖_∞ < 1e-6.
    pub converged: bool,
}

const CHUNK: usize = 16;

/// Magnitudes below this are rounding noise; their k-th roots would not be.
fn noise_floor(n: usize) -> f64 {
    8.0 * n as f64 * f64::EPSILON
}

fn snap(v: f64, floor: f64) -> f64 {
    if v.abs() < floor {
        0.0
    } else {
        v
    }
}

fn ps_term(pk: &DMatrix<f64>, pi: &ProbabilityVector, k: usize, solver: Solver) -> Result<f64> {
    let a = similarity(pk, pi);
    let b = a.tr_mul(&a);
    let b = (&b + b.transpose()) * 0.5;
    let values = restricted_eigenvalues(&b, pi, solver)?;
    let top = extremes(&values).1;
    Ok((1.0 - top).max(0.0) / k as f64)
}

fn record(
    pk: &DMatrix<f64>,
    pi: &ProbabilityVector,
    k: usize,
    opts: &ScanOptions,
) -> Result<GapRecord> {
    let n = pk.nrows();
    let floor = noise_floor(n);
    let (m1, m2) = mh_matrices(pk, &pi_adjoint(pk, pi), 1.0);
    let v1 = restricted_eigenvalues(&symmetrize(&m1, pi)?, pi, opts.solver)?;
    let v2 = restricted_eigenvalues(&symmetrize(&m2, pi)?, pi, opts.solver)?;
    let lambda_m1 = snap(extremes(&v1).1, floor);
    let lambda_m2 = snap(extremes(&v2).0, floor);
    let inv = 1.0 / k as f64;
    let in_c = lambda_m2.abs() < 1.0 - opts.tol && lambda_m1 < 1.0 - opts.tol;
    Ok(GapRecord {
        k,
        lambda_m1,
        lambda_m2,
        lambda_m1_root: lambda_m1.max(0.0).powf(inv),
        abs_lambda_m2_root: lambda_m2.abs().powf(inv),
        ps_term: ps_term(pk, pi, k, opts.solver)?,
        in_c,
    })
}

/// Applies `f` to `(k, Pᵏ)` for `k = 1..=n_max`. Powers are built
/// sequentially; each chunk is evaluated in parallel and collected in order.
fn scan_powers<T, F>(p: &StochasticKernel, n_max: usize, f: F) -> Result<(Vec<T>, DMatrix<f64>)>
where
    T: Send,
    F: Fn(usize, &DMatrix<f64>) -> Result<T> + Sync,
{
    let mut out = Vec::with_capacity(n_max);
    let mut current = p.matrix().clone();
    let mut k = 1;
    while k <= n_max {
        let end = (k + CHUNK - 1).min(n_max);
        let mut chunk = Vec::with_capacity(end - k + 1);
        for step in k..=end {
            if step > 1 {
                current = &current * p.matrix();
                renormalize_rows(&mut current, step);
            }
            chunk.push((step, current.clone()));
        }
        let results: Vec<Result<T>> = chunk.par_iter().map(|(s, m)| f(*s, m)).collect();
        for r in results {
            out.push(r?);
        }
        k = end + 1;
    }
    Ok((out, current))
}

/// γ^ps truncated at `n_max`: `max_{k ≤ n_max} γ(P*ᵏPᵏ)/k` and the first
/// maximizing k.
pub fn pseudo_spectral_gap(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    n_max: usize,
) -> Result<(f64, usize)> {
    if n_max == 0 {
        return Err(MhError::BadParams("n_max must be at least 1".into()));
    }
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let (terms, _) = scan_powers(p, n_max, |k, pk| ps_term(pk, pi, k, Solver::Auto))?;
    Ok(argmax(&terms))
}

fn argmax(terms: &[f64]) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, &t) in terms.iter().enumerate() {
        if t > best.0 {
            best = (t, i + 1);
        }
    }
    best
}

/// Scans `k = 1..=n_max`, building `M1(Pᵏ)` and `M2(Pᵏ)` from `Pᵏ` and
/// collecting everything needed for γ^MH, t* and γ^ps.
pub fn mh_spectral_gap(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    opts: &ScanOptions,
) -> Result<GapScanResult> {
    if opts.n_max == 0 {
        return Err(MhError::BadParams("n_max must be at least 1".into()));
    }
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let (per_k, last) = scan_powers(p, opts.n_max, |k, pk| record(pk, pi, k, opts))?;

    let c_complement: Vec<usize> = per_k.iter().filter(|r| !r.in_c).map(|r| r.k).collect();
    let t_star = c_complement.last().copied().unwrap_or(0);
    let mut beta_mh = f64::NEG_INFINITY;
    let mut beta_argmax = None;
    for r in per_k.iter().filter(|r| r.in_c) {
        let v = r.lambda_m1_root.max(r.abs_lambda_m2_root);
        if v > beta_mh {
            beta_mh = v;
            beta_argmax = Some(r.k);
        }
    }
    if beta_argmax.is_none() {
        beta_mh = 1.0;
    }
    let terms: Vec<f64> = per_k.iter().map(|r| r.ps_term).collect();
    let (gamma_ps, ps_argmax) = argmax(&terms);

    let n = p.dim();
    let distance = (0..n)
        .map(|x| (0..n).map(|y| (last[(x, y)] - pi[y]).abs()).sum::<f64>())
        .fold(0.0, f64::max);

    Ok(GapScanResult {
        n_max: opts.n_max,
        per_k,
        c_complement,
        t_star,
        beta_mh,
        gamma_mh: (1.0 - beta_mh).clamp(0.0, 1.0),
        beta_argmax,
        gamma_ps: gamma_ps.clamp(0.0, 1.0),
        ps_argmax,
        converged: distance < 1e-6,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylSandwich {
    /// `max_{l+m = n+2} λ_l(M1) + λ_m(M2)`.
    pub l: f64,
    /// `min(λ_1(M1) + λ_2(M2), λ_2(M1) + λ_1(M2))`.
    pub u: f64,
    pub gamma_lower: f64,
    pub gamma_upper: f64,
    /// The right gap the bounds enclose.
    pub gamma: f64,
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
}

impl WeylSandwich {
    pub fn holds(&self, tol: f64) -> bool {
        self.gamma_lower - tol <= self.gamma && self.gamma <= self.gamma_upper + tol
    }
}

/// `1 − U/2 ≤ γ(P) ≤ 1 − L/2` from the spectra of the two MH kernels.
pub fn weyl_sandwich(p: &StochasticKernel, pi: &ProbabilityVector) -> Result<WeylSandwich> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let n = p.dim();
    if n < 2 {
        return Err(MhError::BadParams("need at least two states".into()));
    }
    let (m1, m2) = mh_matrices(p.matrix(), &pi_adjoint(p.matrix(), pi), 1.0);
    let a = spectrum(&m1, pi)?;
    let b = spectrum(&m2, pi)?;
    // 1-based l, m with l + m = n + 2
    let l = (2..=n)
        .map(|l| a[l - 1] + b[n + 2 - l - 1])
        .fold(f64::NEG_INFINITY, f64::max);
    let u = (a[0] + b[1]).min(a[1] + b[0]);
    let gamma = right_spectral_gap(p, pi)?;
    let out = WeylSandwich {
        l,
        u,
        gamma_lower: 1.0 - u / 2.0,
        gamma_upper: 1.0 - l / 2.0,
        gamma,
        m1: a,
        m2: b,
    };
    if !out.holds(1e-9) {
        log::warn!(
            "Weyl sandwich violated: {} <= {} <= {}",
            out.gamma_lower,
            out.gamma,
            out.gamma_upper
        );
    }
    Ok(out)
}

/// A failed Weyl inequality, indices 1-based into descending spectra of
/// `P + P*` (i), `M1` (j) and `M2` (k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylViolation {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub upper: bool,
    pub excess: f64,
}

/// Checks every `λ_{j+k−1}(P+P*) ≤ λ_j(M1) + λ_k(M2)` and
/// `λ_{l+m−n}(P+P*) ≥ λ_l(M1) + λ_m(M2)`.
pub fn weyl_violations(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    tol: f64,
) -> Result<Vec<WeylViolation>> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let n = p.dim();
    let ps = pi_adjoint(p.matrix(), pi);
    let (m1, m2) = mh_matrices(p.matrix(), &ps, 1.0);
    let a = spectrum(&m1, pi)?;
    let b = spectrum(&m2, pi)?;
    let c = spectrum(&(p.matrix() + &ps), pi)?;
    let mut out = Vec::new();
    for j in 1..=n {
        for k in 1..=n {
            if j + k - 1 <= n {
                let i = j + k - 1;
                let excess = c[i - 1] - (a[j - 1] + b[k - 1]);
                if excess > tol {
                    out.push(WeylViolation { i, j, k, upper: true, excess });
                }
            }
            if j + k > n {
                let i = j + k - n;
                let excess = a[j - 1] + b[k - 1] - c[i - 1];
                if excess > tol {
                    out.push(WeylViolation { i, j, k, upper: false, excess });
                }
            }
        }
    }
    Ok(out)
}

/// For a lazy kernel, whether `λ_min(M2(P)) ≥ −1 − 1e-10`.
pub fn lazy_contraction_check(p: &StochasticKernel, pi: &ProbabilityVector) -> Result<bool> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    if let Some(x) = (0..p.dim()).find(|&x| p.get(x, x) < 0.5) {
        return Err(MhError::PreconditionViolated {
            state: x,
            reason: format!("holding probability {} is below 1/2", p.get(x, x)),
        });
    }
    let (_, m2) = mh_matrices(p.matrix(), &pi_adjoint(p.matrix(), pi), 1.0);
    let values = spectrum(&m2, pi)?;
    Ok(values.last().copied().unwrap_or(1.0) >= -1.0 - 1e-10)
}

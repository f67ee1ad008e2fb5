//! Total-variation, mixing-time, operator-norm and variance bounds driven by
//! the MH-spectral gap, next to exact baselines that check them.

use nalgebra::{DMatrix, DVector};

use crate::error::{MhError, Result};
use crate::kernel::{
    check_dim, kernel_power, pi_adjoint, renormalize_rows, require_stationary, OperatorKind,
    ProbabilityVector, StochasticKernel,
};
use crate::models::{birth_death_generator, VortexModel};
use crate::reversiblize::mh_matrices;
use crate::spectra::{generator_spectral_gap, l2_0_extremes, restricted_eigenvalues, similarity, GapScanResult};
use crate::eigen::Solver;

/// Slack allowed when asserting that an inequality holds.
pub const BOUND_TOL: f64 = 1e-9;
/// Largest tail mass a truncated birth-death chain may discard.
pub const TAIL_TOL: f64 = 1e-8;

/// `½ Σ |μ(x) − ν(x)|`. Signed measures are allowed.
pub fn tv_distance(mu: &[f64], nu: &[f64]) -> f64 {
    assert_eq!(mu.len(), nu.len(), "measures live on different spaces");
    0.5 * mu.iter().zip(nu).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

fn row_distance(m: &DMatrix<f64>, x: usize, pi: &ProbabilityVector) -> f64 {
    0.5 * (0..m.ncols()).map(|y| (m[(x, y)] - pi[y]).abs()).sum::<f64>()
}

fn worst_distance(m: &DMatrix<f64>, pi: &ProbabilityVector) -> f64 {
    (0..m.nrows()).map(|x| row_distance(m, x, pi)).fold(0.0, f64::max)
}

/// Worst-start distance `d(n)` for `n = 1..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingProfile {
    /// `distances[n-1] = d(n)`.
    pub distances: Vec<f64>,
    /// Whether `d` is non-increasing up to rounding.
    pub monotone: bool,
}

impl MixingProfile {
    pub fn d(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.distances.get(i).copied())
    }

    /// Smallest `n ≤ n_max` with `d(n) ≤ ε`.
    pub fn mixing_time(&self, eps: f64) -> Option<usize> {
        self.distances.iter().position(|&d| d <= eps).map(|i| i + 1)
    }
}

pub fn exact_mixing_profile(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    n_max: usize,
) -> Result<MixingProfile> {
    if n_max == 0 {
        return Err(MhError::BadParams("n_max must be at least 1".into()));
    }
    check_dim(pi, p.dim())?;
    let mut distances = Vec::with_capacity(n_max);
    let mut current = p.matrix().clone();
    for n in 1..=n_max {
        if n > 1 {
            current = &current * p.matrix();
            renormalize_rows(&mut current, n);
        }
        distances.push(worst_distance(&current, pi));
    }
    let monotone = distances.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(MixingProfile { distances, monotone })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingTimeBound {
    /// `t* + ln(1/(ε π_min))/γ^MH`.
    pub bound: f64,
    /// The same bound with `t* = 0`, the form valid for reversible chains.
    pub reversible_form: f64,
    pub t_star: usize,
    pub gamma_mh: f64,
    pub pi_min: f64,
}

pub fn mixing_time_bound(
    scan: &GapScanResult,
    pi: &ProbabilityVector,
    eps: f64,
) -> Result<MixingTimeBound> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(MhError::BadParams(format!("epsilon = {eps} must lie in (0, 1)")));
    }
    if scan.gamma_mh <= 0.0 {
        return Err(MhError::ZeroGap);
    }
    let pi_min = pi.min();
    let reversible_form = (1.0 / (eps * pi_min)).ln() / scan.gamma_mh;
    Ok(MixingTimeBound {
        bound: scan.t_star as f64 + reversible_form,
        reversible_form,
        t_star: scan.t_star,
        gamma_mh: scan.gamma_mh,
        pi_min,
    })
}

/// Minimal slack, over starting states, of the four cross inequalities
/// between the distances of `Pⁿ`, `P*ⁿ`, `M1(Pⁿ)` and `M2(Pⁿ)` to π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvCrossSlacks {
    /// `3/2 (d1 + d2) − d(Pⁿ)`.
    pub forward: f64,
    /// `3/2 (d1 + d2) − d(P*ⁿ)`.
    pub reversal: f64,
    /// `2 (d + d*) − d1`.
    pub first: f64,
    /// `3 (d + d*) − d2`.
    pub second: f64,
}

impl TvCrossSlacks {
    pub fn min(&self) -> f64 {
        self.forward.min(self.reversal).min(self.first).min(self.second)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.min() >= -tol
    }
}

pub fn tv_cross_bounds_check(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    n: usize,
) -> Result<TvCrossSlacks> {
    if n == 0 {
        return Err(MhError::BadParams("n must be at least 1".into()));
    }
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let pn = kernel_power(p, n);
    let ps = pi_adjoint(pn.matrix(), pi);
    let (m1, m2) = mh_matrices(pn.matrix(), &ps, 1.0);
    let mut out = TvCrossSlacks {
        forward: f64::INFINITY,
        reversal: f64::INFINITY,
        first: f64::INFINITY,
        second: f64::INFINITY,
    };
    for x in 0..p.dim() {
        let d = row_distance(pn.matrix(), x, pi);
        let ds = row_distance(&ps, x, pi);
        let d1 = row_distance(&m1, x, pi);
        let d2 = row_distance(&m2, x, pi);
        out.forward = out.forward.min(1.5 * (d1 + d2) - d);
        out.reversal = out.reversal.min(1.5 * (d1 + d2) - ds);
        out.first = out.first.min(2.0 * (d + ds) - d1);
        out.second = out.second.min(3.0 * (d + ds) - d2);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorNormCheck {
    /// `‖P‖` on `L²₀(π)`.
    pub lhs: f64,
    /// `‖M1‖ + ‖M2‖ + |λ(M1(P²))|^{1/2} + |λ(M2(P²))|^{1/2}`.
    pub rhs: f64,
    pub holds: bool,
}

fn l2_0_norm(m: &DMatrix<f64>, pi: &ProbabilityVector) -> Result<f64> {
    let (lo, hi) = l2_0_extremes(m, pi)?;
    Ok(lo.abs().max(hi.abs()))
}

pub fn operator_norm_bound_check(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
) -> Result<OperatorNormCheck> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let a = similarity(p.matrix(), pi);
    let gram = a.tr_mul(&a);
    let gram = (&gram + gram.transpose()) * 0.5;
    let top = restricted_eigenvalues(&gram, pi, Solver::Auto)?
        .first()
        .copied()
        .unwrap_or(0.0);
    let lhs = top.max(0.0).sqrt();

    let (m1, m2) = mh_matrices(p.matrix(), &pi_adjoint(p.matrix(), pi), 1.0);
    let p2 = kernel_power(p, 2);
    let (q1, q2) = mh_matrices(p2.matrix(), &pi_adjoint(p2.matrix(), pi), 1.0);
    let rhs = l2_0_norm(&m1, pi)?
        + l2_0_norm(&m2, pi)?
        + l2_0_extremes(&q1, pi)?.0.abs().sqrt()
        + l2_0_extremes(&q2, pi)?.0.abs().sqrt();
    Ok(OperatorNormCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-10,
    })
}

/// A bound next to the exact quantity it controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceCheck {
    pub bound: f64,
    pub exact: f64,
    pub holds: bool,
}

fn centered(f: &[f64], pi: &ProbabilityVector) -> Vec<f64> {
    let mean: f64 = f.iter().zip(pi.as_slice()).map(|(a, b)| a * b).sum();
    f.iter().map(|v| v - mean).collect()
}

fn inner(f: &[f64], g: &[f64], pi: &ProbabilityVector) -> f64 {
    f.iter()
        .zip(g)
        .zip(pi.as_slice())
        .map(|((a, b), w)| a * b * w)
        .sum()
}

fn require_gap(scan: &GapScanResult) -> Result<()> {
    if scan.gamma_mh <= 0.0 {
        return Err(MhError::ZeroGap);
    }
    Ok(())
}

fn check_len(f: &[f64], n: usize) -> Result<()> {
    if f.len() != n {
        return Err(MhError::DimensionMismatch {
            expected: n,
            got: f.len(),
        });
    }
    Ok(())
}

/// `C_l = ⟨f₀, Pˡ f₀⟩_π` for `l = 0..len`.
fn autocovariances(p: &StochasticKernel, pi: &ProbabilityVector, f0: &[f64], len: usize) -> Vec<f64> {
    let mut g = f0.to_vec();
    let mut out = Vec::with_capacity(len);
    for l in 0..len {
        if l > 0 {
            g = p.apply(&g);
        }
        out.push(inner(f0, &g, pi));
    }
    out
}

/// `Var_π(Σ_{i=1}^n f(X_i))` for the stationary chain.
pub fn exact_variance(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    f: &[f64],
    n: usize,
) -> Result<f64> {
    check_len(f, p.dim())?;
    let f0 = centered(f, pi);
    let c = autocovariances(p, pi, &f0, n.max(1));
    Ok(n as f64 * c[0]
        + 2.0
            * (1..n)
                .map(|l| (n - l) as f64 * c[l])
                .sum::<f64>())
}

fn slack_count(scan: &GapScanResult) -> f64 {
    scan.c_complement.len() as f64
}

pub fn variance_bound(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    scan: &GapScanResult,
    f: &[f64],
    n: usize,
) -> Result<VarianceCheck> {
    require_gap(scan)?;
    check_len(f, p.dim())?;
    let f0 = centered(f, pi);
    let v = inner(&f0, &f0, pi);
    let bound = n as f64 * v * (slack_count(scan) + 2.0 / scan.gamma_mh);
    let exact = exact_variance(p, pi, f, n)?;
    Ok(VarianceCheck {
        bound,
        exact,
        holds: exact <= bound + BOUND_TOL,
    })
}

pub fn heterogeneous_variance_bound(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    scan: &GapScanResult,
    fs: &[Vec<f64>],
) -> Result<VarianceCheck> {
    require_gap(scan)?;
    let centered_fs = fs
        .iter()
        .map(|f| {
            check_len(f, p.dim())?;
            Ok(centered(f, pi))
        })
        .collect::<Result<Vec<_>>>()?;
    let variances: f64 = centered_fs.iter().map(|f| inner(f, f, pi)).sum();
    let bound = variances * (slack_count(scan) + 2.0 / scan.gamma_mh);

    let mut exact = 0.0;
    for (i, fi) in centered_fs.iter().enumerate() {
        // Cov(f_i(X_i), f_j(X_j)) = ⟨f_i, P^{j−i} f_j⟩ for j ≥ i
        exact += inner(fi, fi, pi);
        let mut g: Vec<f64>;
        for (j, fj) in centered_fs.iter().enumerate().skip(i + 1) {
            g = fj.clone();
            for _ in 0..(j - i) {
                g = p.apply(&g);
            }
            exact += 2.0 * inner(fi, &g, pi);
        }
    }
    Ok(VarianceCheck {
        bound,
        exact,
        holds: exact <= bound + BOUND_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticVarianceCheck {
    /// `4V_f (1 + |𝓒ᶜ| + 4(β^MH)^{|𝓒ᶜ|+1}/γ^MH)²`.
    pub bound: f64,
    /// σ²_as.
    pub sigma2: f64,
    /// `lim_n |Var_n − nσ²_as| = 2|⟨f₀, Q(I−Q)⁻²f₀⟩|`, `Q = P − Π`.
    pub exact_gap: f64,
    /// `max_{n ≤ n_max} |Var_n − nσ²_as|` over the scan window.
    pub max_finite_gap: f64,
    pub holds: bool,
}

fn resolvent_solve(q: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let n = q.nrows();
    let a = DMatrix::identity(n, n) - q;
    let x = a.clone().lu().solve(rhs).ok_or(MhError::SingularResolvent)?;
    let residual = (&a * &x - rhs).amax();
    if !x.iter().all(|v| v.is_finite()) || residual > 1e-12 * rhs.amax().max(1.0) {
        return Err(MhError::SingularResolvent);
    }
    Ok(x)
}

pub fn asymptotic_variance_bound(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    scan: &GapScanResult,
    f: &[f64],
) -> Result<AsymptoticVarianceCheck> {
    require_gap(scan)?;
    check_len(f, p.dim())?;
    let n = p.dim();
    let f0 = DVector::from_vec(centered(f, pi));
    let q = p.matrix() - DMatrix::from_fn(n, n, |_, y| pi[y]);
    let w = |a: &DVector<f64>, b: &DVector<f64>| inner(a.as_slice(), b.as_slice(), pi);

    // u = (I−Q)⁻¹ Q f₀, z = (I−Q)⁻¹ u
    let qf = &q * &f0;
    let u = resolvent_solve(&q, &qf)?;
    let z = resolvent_solve(&q, &u)?;
    let v = w(&f0, &f0);
    let sigma2 = v + 2.0 * w(&f0, &u);
    let exact_gap = (2.0 * w(&f0, &z)).abs();

    // Var_n − nσ² = −2Σ_{l<n} l C_l − 2n⟨f₀, (I−Q)⁻¹ Qⁿ f₀⟩
    let mut qn_f = qf.clone();
    let mut weighted = 0.0;
    let mut max_finite_gap: f64 = 0.0;
    for steps in 1..=scan.n_max {
        if steps > 1 {
            let c = w(&f0, &qn_f);
            weighted += (steps - 1) as f64 * c;
            qn_f = &q * &qn_f;
        }
        let tail = w(&f0, &resolvent_solve(&q, &qn_f)?);
        let gap = (-2.0 * weighted - 2.0 * steps as f64 * tail).abs();
        max_finite_gap = max_finite_gap.max(gap);
    }

    let c = slack_count(scan);
    let bound = 4.0 * v * (1.0 + c + 4.0 * scan.beta_mh.powf(c + 1.0) / scan.gamma_mh).powi(2);
    Ok(AsymptoticVarianceCheck {
        bound,
        sigma2,
        exact_gap,
        max_finite_gap,
        holds: exact_gap <= bound + BOUND_TOL && max_finite_gap <= bound + BOUND_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexGapBounds {
    /// Closed-form lower bound for the idealized chain.
    pub lower: f64,
    /// Closed-form upper bound for the idealized chain.
    pub upper: f64,
    /// Spectral gap of the truncated birth-death generator alone.
    pub gamma_bd: f64,
    /// Spectral gap of the truncated generator with the vortex.
    pub gamma_exact: f64,
    /// `γ(G^BD) + 2(1 − cos(2π/n))/min_{i<n} π(i)` on the truncated chain.
    pub generic_upper: f64,
    pub tail_mass: f64,
    pub lower_holds: bool,
    /// Advisory: the closed form describes the untruncated chain.
    pub upper_holds: bool,
}

pub fn vortex_gap_bounds(model: &VortexModel) -> Result<VortexGapBounds> {
    let chain = birth_death_generator(model.base)?;
    if chain.tail_mass > TAIL_TOL {
        return Err(MhError::BadTruncation {
            tail_mass: chain.tail_mass,
        });
    }
    let (_, v) = model.build()?;
    let (lower, upper) = model.table_bounds();
    let base = chain.generator.matrix();
    let gamma_bd = generator_spectral_gap(base, &chain.pi)?;
    let gamma_exact = generator_spectral_gap(&(base + v.matrix()), &chain.pi)?;
    let min_pi = (0..model.n).map(|i| chain.pi[i]).fold(f64::INFINITY, f64::min);
    let wave = 1.0 - (2.0 * std::f64::consts::PI / model.n as f64).cos();
    Ok(VortexGapBounds {
        lower,
        upper,
        gamma_bd,
        gamma_exact,
        generic_upper: gamma_bd + 2.0 * wave / min_pi,
        tail_mass: chain.tail_mass,
        lower_holds: lower - BOUND_TOL <= gamma_exact,
        upper_holds: gamma_exact <= upper + BOUND_TOL,
    })
}

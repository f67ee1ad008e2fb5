//! Constructors for the worked example chains.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{MhError, Result};
use crate::kernel::{ProbabilityVector, RateGenerator, StochasticKernel};

/// Largest state space `torus_walk` will build.
pub const TORUS_CAP: usize = 4096;

fn check_probability(p: f64, name: &str) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(MhError::BadParams(format!("{name} = {p} must lie in (0, 1)")));
    }
    Ok(())
}

/// Walk on `Z/nZ` stepping `+1` with probability `p` and `−1` otherwise.
pub fn asymmetric_cycle(n: usize, p: f64) -> Result<StochasticKernel> {
    if n < 3 {
        return Err(MhError::BadParams(format!("cycle needs n >= 3, got {n}")));
    }
    check_probability(p, "p")?;
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        m[(j, (j + 1) % n)] += p;
        m[(j, (j + n - 1) % n)] += 1.0 - p;
    }
    StochasticKernel::new(m)
}

/// Product walk on `(Z/nZ)^d`: pick a coordinate uniformly, move it by the
/// cycle kernel. State `x` has coordinates `x = Σ c_i nⁱ`.
pub fn torus_walk(n: usize, d: usize, p: f64) -> Result<StochasticKernel> {
    if d == 0 {
        return Err(MhError::BadParams("torus dimension must be at least 1".into()));
    }
    let size = (0..d).try_fold(1usize, |acc, _| acc.checked_mul(n));
    let size = match size {
        Some(s) if s <= TORUS_CAP => s,
        _ => {
            return Err(MhError::TooLarge {
                size: size.unwrap_or(usize::MAX),
                cap: TORUS_CAP,
            })
        }
    };
    let base = asymmetric_cycle(n, p)?;
    let mut m = DMatrix::zeros(size, size);
    let w = 1.0 / d as f64;
    for x in 0..size {
        let mut stride = 1;
        for _ in 0..d {
            let c = (x / stride) % n;
            for to in [(c + 1) % n, (c + n - 1) % n] {
                let y = x - c * stride + to * stride;
                m[(x, y)] += w * base.get(c, to);
            }
            stride *= n;
        }
    }
    StochasticKernel::new(m)
}

/// The three-state chain with `P(0,1) = P(1,2) = 1`, `P(2,0) = P(2,1) = 1/2`.
pub fn triangle() -> StochasticKernel {
    StochasticKernel::from_matrix_unchecked(DMatrix::from_row_slice(
        3,
        3,
        &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.5, 0.5, 0.0],
    ))
}

/// Index of label `label ∈ {−(m−1), …, m}` in the sampler's state space.
pub fn dhn_index(m: usize, label: i64) -> usize {
    let two_m = 2 * m as i64;
    (label + m as i64 - 1).rem_euclid(two_m) as usize
}

/// Label of index `i` in the sampler's state space.
pub fn dhn_label(m: usize, i: usize) -> i64 {
    i as i64 - (m as i64 - 1)
}

/// Sampler on `Z/2mZ` with `P(i, i+1) = 1 − 1/m` and `P(i, −i) = 1/m`.
/// Labels `−(m−1), …, m` occupy indices `0..2m` in increasing order.
pub fn dhn_sampler(m: usize) -> Result<StochasticKernel> {
    if m < 2 {
        return Err(MhError::BadParams(format!("sampler needs m >= 2, got {m}")));
    }
    let n = 2 * m;
    let inv = 1.0 / m as f64;
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        let label = dhn_label(m, i);
        k[(i, dhn_index(m, label + 1))] += 1.0 - inv;
        k[(i, dhn_index(m, -label))] += inv;
    }
    StochasticKernel::new(k)
}

/// Chain on `{0, …, m}` with `P(i,0) = P(i, i+1) = P(m,m) = 1/2`.
pub fn winning_streak(m: usize) -> Result<StochasticKernel> {
    if m < 2 {
        return Err(MhError::BadParams(format!("winning streak needs m >= 2, got {m}")));
    }
    let mut k = DMatrix::zeros(m + 1, m + 1);
    for i in 0..=m {
        k[(i, 0)] += 0.5;
        k[(i, (i + 1).min(m))] += 0.5;
    }
    StochasticKernel::new(k)
}

/// Stationary law of the winning streak: `π(i) = 2^{−(i+1)}`, `π(m) = 2^{−m}`.
pub fn winning_streak_stationary(m: usize) -> Result<ProbabilityVector> {
    let mut w: Vec<f64> = (0..m).map(|i| 0.5f64.powi(i as i32 + 1)).collect();
    w.push(0.5f64.powi(m as i32));
    ProbabilityVector::new(w)
}

/// The four-state upward skip-free chain on states labelled 1..4.
pub fn upward_skip_free() -> StochasticKernel {
    StochasticKernel::from_matrix_unchecked(DMatrix::from_row_slice(
        4,
        4,
        &[
            0.5, 0.5, 0.0, 0.0, //
            0.2, 0.6, 0.2, 0.0, //
            0.1, 0.3, 0.5, 0.1, //
            0.1, 0.2, 0.4, 0.3,
        ],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BirthDeathSpec {
    /// `b_i = p(n−i)`, `d_i = (1−p)i` on `{0, …, n}`.
    Ehrenfest { n: usize, p: f64 },
    /// `b_i = λ`, `d_i = μ`, truncated to `{0, …, trunc}`.
    Mm1 { lambda: f64, mu: f64, trunc: usize },
    /// `b_i = λ`, `d_i = i`, truncated to `{0, …, trunc}`.
    MmInf { lambda: f64, trunc: usize },
    /// `b_i = λ(r+i)`, `d_i = i`, truncated to `{0, …, trunc}`.
    Gwi { lambda: f64, r: f64, trunc: usize },
}

impl BirthDeathSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            BirthDeathSpec::Ehrenfest { n, p } => {
                if n < 1 {
                    return Err(MhError::BadParams("Ehrenfest needs n >= 1".into()));
                }
                check_probability(p, "p")
            }
            BirthDeathSpec::Mm1 { lambda, mu, trunc } => {
                if !(lambda > 0.0 && mu > lambda) {
                    return Err(MhError::BadParams(format!(
                        "M/M/1 needs 0 < lambda < mu, got lambda = {lambda}, mu = {mu}"
                    )));
                }
                check_trunc(trunc)
            }
            BirthDeathSpec::MmInf { lambda, trunc } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(MhError::BadParams(format!("M/M/inf needs lambda > 0, got {lambda}")));
                }
                check_trunc(trunc)
            }
            BirthDeathSpec::Gwi { lambda, r, trunc } => {
                check_probability(lambda, "lambda")?;
                if !(r > 0.0 && r.is_finite()) {
                    return Err(MhError::BadParams(format!("GWI needs r > 0, got {r}")));
                }
                check_trunc(trunc)
            }
        }
    }

    /// Number of states after truncation.
    pub fn states(&self) -> usize {
        match *self {
            BirthDeathSpec::Ehrenfest { n, .. } => n + 1,
            BirthDeathSpec::Mm1 { trunc, .. }
            | BirthDeathSpec::MmInf { trunc, .. }
            | BirthDeathSpec::Gwi { trunc, .. } => trunc + 1,
        }
    }

    pub fn birth(&self, i: usize) -> f64 {
        let i_f = i as f64;
        match *self {
            BirthDeathSpec::Ehrenfest { n, p } => p * (n as f64 - i_f),
            BirthDeathSpec::Mm1 { lambda, .. } | BirthDeathSpec::MmInf { lambda, .. } => lambda,
            BirthDeathSpec::Gwi { lambda, r, .. } => lambda * (r + i_f),
        }
    }

    pub fn death(&self, i: usize) -> f64 {
        let i_f = i as f64;
        match *self {
            BirthDeathSpec::Ehrenfest { p, .. } => (1.0 - p) * i_f,
            BirthDeathSpec::Mm1 { mu, .. } => {
                if i == 0 {
                    0.0
                } else {
                    mu
                }
            }
            BirthDeathSpec::MmInf { .. } | BirthDeathSpec::Gwi { .. } => i_f,
        }
    }

    /// Stationary weight of state `i` on the untruncated chain.
    pub fn untruncated_pi(&self, i: usize) -> f64 {
        match *self {
            BirthDeathSpec::Ehrenfest { n, p } => {
                if i > n {
                    return 0.0;
                }
                let log_choose = ln_factorial(n) - ln_factorial(i) - ln_factorial(n - i);
                (log_choose + i as f64 * p.ln() + (n - i) as f64 * (1.0 - p).ln()).exp()
            }
            BirthDeathSpec::Mm1 { lambda, mu, .. } => {
                let rho = lambda / mu;
                (1.0 - rho) * rho.powi(i as i32)
            }
            BirthDeathSpec::MmInf { lambda, .. } => {
                (-lambda + i as f64 * lambda.ln() - ln_factorial(i)).exp()
            }
            BirthDeathSpec::Gwi { lambda, r, .. } => {
                let log_rising: f64 = (0..i).map(|k| ((r + k as f64) / (k as f64 + 1.0)).ln()).sum();
                (log_rising + r * (1.0 - lambda).ln() + i as f64 * lambda.ln()).exp()
            }
        }
    }

    /// Stationary mass beyond the truncation window.
    pub fn tail_mass(&self) -> f64 {
        match *self {
            BirthDeathSpec::Ehrenfest { .. } => 0.0,
            BirthDeathSpec::Mm1 { lambda, mu, trunc } => (lambda / mu).powi(trunc as i32 + 1),
            _ => {
                let kept: f64 = (0..self.states()).map(|i| self.untruncated_pi(i)).sum();
                (1.0 - kept).max(0.0)
            }
        }
    }
}

fn check_trunc(trunc: usize) -> Result<()> {
    if trunc < 1 {
        return Err(MhError::BadParams("truncation must keep at least two states".into()));
    }
    Ok(())
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// A truncated birth-death chain: tridiagonal generator, its stationary law
/// and the mass the truncation discards.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathChain {
    pub generator: RateGenerator,
    pub pi: ProbabilityVector,
    pub tail_mass: f64,
}

/// Builds the generator on the truncation window, with no births out of the
/// top state, and π from the detailed-balance recursion.
pub fn birth_death_generator(spec: BirthDeathSpec) -> Result<BirthDeathChain> {
    spec.validate()?;
    let n = spec.states();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        if i + 1 < n {
            g[(i, i + 1)] = spec.birth(i);
        }
        if i > 0 {
            g[(i, i - 1)] = spec.death(i);
        }
        let out: f64 = (0..n).filter(|&j| j != i).map(|j| g[(i, j)]).sum();
        g[(i, i)] = -out;
    }
    let mut w = vec![1.0; n];
    for i in 1..n {
        w[i] = w[i - 1] * spec.birth(i - 1) / spec.death(i);
    }
    Ok(BirthDeathChain {
        generator: RateGenerator::new(g)?,
        pi: ProbabilityVector::from_weights(w)?,
        tail_mass: spec.tail_mass(),
    })
}

/// Cyclic vortex on states `0..n`: `V(i,i) = −1/π(i)`, `V(i, i+1 mod n) = 1/π(i)`.
pub fn cyclic_vortex(n: usize, pi: &ProbabilityVector) -> Result<RateGenerator> {
    if n < 2 || n > pi.len() {
        return Err(MhError::BadParams(format!(
            "vortex dimension {n} must lie in [2, {}]",
            pi.len()
        )));
    }
    let mut v = DMatrix::zeros(pi.len(), pi.len());
    for i in 0..n {
        v[(i, i)] -= 1.0 / pi[i];
        v[(i, (i + 1) % n)] += 1.0 / pi[i];
    }
    RateGenerator::new(v)
}

/// A birth-death chain with an `n`-dimensional cyclic vortex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexModel {
    pub base: BirthDeathSpec,
    pub n: usize,
}

impl VortexModel {
    pub fn build(&self) -> Result<(BirthDeathChain, RateGenerator)> {
        let chain = birth_death_generator(self.base)?;
        let v = cyclic_vortex(self.n, &chain.pi)?;
        Ok((chain, v))
    }

    /// The closed-form `(lower, upper)` gap bounds for the idealized chain.
    pub fn table_bounds(&self) -> (f64, f64) {
        let n = self.n as f64;
        let wave = 2.0 * (1.0 - (2.0 * PI / n).cos());
        match self.base {
            BirthDeathSpec::Ehrenfest { p, .. } => {
                let worst = p.powf(-n).max((1.0 - p).powf(-n));
                (1.0, 1.0 + wave * worst)
            }
            BirthDeathSpec::Mm1 { lambda, mu, .. } => {
                let lower = (mu.sqrt() - lambda.sqrt()).powi(2);
                let upper = lower + wave * (1.0 - lambda / mu).powi(-1) * (mu / lambda).powf(n - 1.0);
                (lower, upper)
            }
            BirthDeathSpec::MmInf { lambda, .. } => {
                let worst = (0..=self.n)
                    .map(|i| (ln_factorial(i) - i as f64 * lambda.ln()).exp())
                    .fold(f64::NEG_INFINITY, f64::max);
                (1.0, 1.0 + wave * lambda.exp() * worst)
            }
            BirthDeathSpec::Gwi { lambda, r, .. } => {
                // Γ(r) i! / Γ(r+i) = Π_{k<i} (k+1)/(r+k)
                let worst = (0..=self.n)
                    .map(|i| {
                        let ratio: f64 = (0..i).map(|k| (k as f64 + 1.0) / (r + k as f64)).product();
                        ratio * (1.0 - lambda).powf(-r) * lambda.powi(-(i as i32))
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                (1.0 - lambda, 1.0 - lambda + wave * worst)
            }
        }
    }
}

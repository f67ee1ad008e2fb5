//! Metastability of partitions, leakage, conductance and Cheeger-type
//! bounds in terms of the spectra of the two MH kernels.

use nalgebra::DMatrix;

use crate::error::{MhError, Result};
use crate::kernel::{
    check_dim, kernel_power, pi_adjoint, require_stationary, OperatorKind, ProbabilityVector,
    StochasticKernel,
};
use crate::reversiblize::mh_matrices;
use crate::spectra::{spectrum, EigenBasis};

/// Slack allowed in the sandwich assertions.
pub const SANDWICH_TOL: f64 = 1e-9;
/// Gap below which two eigenvalues count as equal.
const SPLIT_TOL: f64 = 1e-10;
/// Default enumeration cap for `Φ_*(2)`.
pub const PAIR_CAP: usize = 14;
/// Default enumeration cap for `Φ_*(k)`, `k ≥ 3`.
pub const TUPLE_CAP: usize = 10;

/// Disjoint non-empty blocks covering `0..n`, each sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(mut blocks: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for block in &mut blocks {
            if block.is_empty() {
                return Err(MhError::InvalidPartition("empty block".into()));
            }
            block.sort_unstable();
            for &x in block.iter() {
                if x >= n {
                    return Err(MhError::InvalidPartition(format!("state {x} out of range 0..{n}")));
                }
                if std::mem::replace(&mut seen[x], true) {
                    return Err(MhError::InvalidPartition(format!("state {x} appears twice")));
                }
            }
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            return Err(MhError::InvalidPartition(format!("state {x} is not covered")));
        }
        Ok(Self { blocks })
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            blocks: (0..n).map(|x| vec![x]).collect(),
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    fn states(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }
}

fn check_states(states: &[usize], n: usize) -> Result<()> {
    match states.iter().find(|&&x| x >= n) {
        Some(&x) => Err(MhError::BadParams(format!("state {x} out of range 0..{n}"))),
        None => Ok(()),
    }
}

fn flow_matrix(m: &DMatrix<f64>, pi: &ProbabilityVector, a: &[usize], b: &[usize]) -> f64 {
    let mass = pi.mass(a);
    if mass <= 0.0 {
        return 0.0;
    }
    a.iter()
        .map(|&x| pi[x] * b.iter().map(|&y| m[(x, y)]).sum::<f64>())
        .sum::<f64>()
        / mass
}

/// `Q(A,B) = (1/π(A)) Σ_{x∈A} π(x) P(x,B)`, zero when `π(A) = 0`.
pub fn flow(p: &StochasticKernel, pi: &ProbabilityVector, a: &[usize], b: &[usize]) -> Result<f64> {
    check_dim(pi, p.dim())?;
    check_states(a, p.dim())?;
    check_states(b, p.dim())?;
    Ok(flow_matrix(p.matrix(), pi, a, b))
}

/// `m(𝓓) = Σ_i Q(A_i, A_i)`.
pub fn partition_metastability(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    d: &Partition,
) -> Result<f64> {
    check_dim(pi, p.dim())?;
    if d.states() != p.dim() {
        return Err(MhError::DimensionMismatch {
            expected: p.dim(),
            got: d.states(),
        });
    }
    Ok(d.blocks().iter().map(|a| flow_matrix(p.matrix(), pi, a, a)).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetastabilityBounds {
    pub value: f64,
    /// `1 + Σ_{j=2}^n ρ_j λ_j^{(2)} + c`.
    pub lower: f64,
    /// `1 + Σ_{j=2}^n λ_j^{(1)}`.
    pub upper: f64,
    /// Top `n` eigenvalues of `M1`.
    pub lambda_first: Vec<f64>,
    /// Top `n` eigenvalues of `M2`.
    pub lambda_second: Vec<f64>,
    /// `ρ_j` for `j = 1..=n`; `ρ_1 = 1`.
    pub rho: Vec<f64>,
    /// Bottom of the band holding the non-dominant spectrum of `M2`.
    pub a: f64,
    /// `a Σ_{j=2}^n (1 − ρ_j)`.
    pub c: f64,
    pub holds: bool,
}

fn check_top_split(values: &[f64], which: &str) -> Result<()> {
    if values.len() > 1 && values[0] - values[1] <= SPLIT_TOL {
        return Err(MhError::AssumptionViolated(format!(
            "{which} has a repeated top eigenvalue ({} vs {})",
            values[0], values[1]
        )));
    }
    Ok(())
}

/// `ρ_j = Σ_i ⟨φ_j, 𝟙_{A_i}⟩²_π / π(A_i)`: the squared norm of the
/// projection of `φ_j` onto the block indicators.
fn block_weight(basis: &EigenBasis, j: usize, pi: &ProbabilityVector, d: &Partition) -> f64 {
    d.blocks()
        .iter()
        .map(|a| {
            let inner: f64 = a.iter().map(|&x| basis.phi[(x, j)] * pi[x]).sum();
            inner * inner / pi.mass(a)
        })
        .sum()
}

pub fn metastability_bounds(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    d: &Partition,
) -> Result<MetastabilityBounds> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let value = partition_metastability(p, pi, d)?;
    let (m1, m2) = mh_matrices(p.matrix(), &pi_adjoint(p.matrix(), pi), 1.0);
    let first = spectrum(&m1, pi)?;
    let second = EigenBasis::new(&m2, pi)?;
    let n = d.len();
    let total = p.dim();

    if n < total && second.values[n - 1] - second.values[n] <= SPLIT_TOL {
        return Err(MhError::AssumptionViolated(format!(
            "M2 has no gap after its top {n} eigenvalues ({} vs {})",
            second.values[n - 1],
            second.values[n]
        )));
    }
    let a = *second.values.last().expect("non-empty spectrum");

    let rho: Vec<f64> = (0..n).map(|j| block_weight(&second, j, pi, d)).collect();
    let c = a * rho.iter().skip(1).map(|r| 1.0 - r).sum::<f64>();
    let lower = 1.0
        + rho
            .iter()
            .zip(&second.values)
            .skip(1)
            .map(|(r, l)| r * l)
            .sum::<f64>()
        + c;
    let upper = 1.0 + first.iter().take(n).skip(1).sum::<f64>();
    Ok(MetastabilityBounds {
        value,
        lower,
        upper,
        lambda_first: first[..n].to_vec(),
        lambda_second: second.values[..n].to_vec(),
        rho,
        a,
        c,
        holds: lower - SANDWICH_TOL <= value && value <= upper + SANDWICH_TOL,
    })
}

fn complement(a: &[usize], n: usize) -> Vec<usize> {
    let mut inside = vec![false; n];
    for &x in a {
        inside[x] = true;
    }
    (0..n).filter(|&x| !inside[x]).collect()
}

fn checked_set(a: &[usize], pi: &ProbabilityVector, n: usize) -> Result<f64> {
    check_states(a, n)?;
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mass = pi.mass(&sorted);
    if sorted.is_empty() || sorted.len() == n {
        return Err(MhError::DegenerateSet { mass });
    }
    Ok(mass)
}

fn leakage_matrix(pt: &DMatrix<f64>, pi: &ProbabilityVector, a: &[usize], mass: f64) -> f64 {
    let n = pt.nrows();
    let mut inside = vec![0.0; n];
    for &x in a {
        inside[x] = 1.0;
    }
    let l1: f64 = (0..n)
        .map(|x| {
            let moved: f64 = (0..n).map(|y| pt[(x, y)] * inside[y]).sum();
            pi[x] * (inside[x] - moved).abs()
        })
        .sum();
    l1 / (2.0 * mass * (1.0 - mass))
}

/// `l(A,t) = ‖𝟙_A − Pᵗ𝟙_A‖_{L¹(π)} / (2π(A)(1 − π(A)))`.
pub fn leakage(p: &StochasticKernel, pi: &ProbabilityVector, a: &[usize], t: usize) -> Result<f64> {
    check_dim(pi, p.dim())?;
    if t == 0 {
        return Err(MhError::BadParams("t must be at least 1".into()));
    }
    let mass = checked_set(a, pi, p.dim())?;
    Ok(leakage_matrix(kernel_power(p, t).matrix(), pi, a, mass))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageBounds {
    pub value: f64,
    /// `1 − λ₂^{(1)}(Pᵗ)`.
    pub lower: f64,
    /// `1 − γ_A² λ₂^{(2)}(Pᵗ)`; valid when `M2(Pᵗ)` has no negative spectrum.
    pub upper: f64,
    /// `γ_A²(1 − λ₂^{(2)}) + (1 − a)(1 − γ_A²)`.
    pub upper_general: f64,
    /// `|⟨ψ_A, φ₂^{(2)}⟩_π|`, or the norm of the projection of `ψ_A` onto
    /// the whole `λ₂^{(2)}` eigenspace when it is repeated.
    pub gamma_a: f64,
    pub lambda2_first: f64,
    pub lambda2_second: f64,
    /// Smallest eigenvalue of `M2(Pᵗ)`.
    pub a: f64,
    /// Whether `λ₂ > λ₃` for both kernels.
    pub split: bool,
    /// `lower ≤ value ≤ upper_general`.
    pub holds: bool,
    /// `lower ≤ value ≤ upper`.
    pub holds_upper: bool,
}

/// `ψ_A = √(π(B)/π(A)) 𝟙_A − √(π(A)/π(B)) 𝟙_B` with `B = Aᶜ`.
pub fn psi(a: &[usize], pi: &ProbabilityVector) -> Vec<f64> {
    let mut members = a.to_vec();
    members.sort_unstable();
    members.dedup();
    let mass = pi.mass(&members);
    let (inside, outside) = (((1.0 - mass) / mass).sqrt(), -(mass / (1.0 - mass)).sqrt());
    let mut out = vec![outside; pi.len()];
    for &x in a {
        out[x] = inside;
    }
    out
}

pub fn leakage_bounds(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    a_set: &[usize],
    t: usize,
) -> Result<LeakageBounds> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let value = leakage(p, pi, a_set, t)?;
    let pt = kernel_power(p, t);
    let (m1, m2) = mh_matrices(pt.matrix(), &pi_adjoint(pt.matrix(), pi), 1.0);
    let first = spectrum(&m1, pi)?;
    let second = EigenBasis::new(&m2, pi)?;
    check_top_split(&first, "M1(P^t)")?;
    check_top_split(&second.values, "M2(P^t)")?;
    let a = *second.values.last().expect("non-empty spectrum");
    let n = p.dim();
    let (l1, l2) = (first[1], second.values[1]);
    let split = n <= 2
        || (first[1] - first[2] > SPLIT_TOL && second.values[1] - second.values[2] > SPLIT_TOL);

    let psi = psi(a_set, pi);
    let gamma2: f64 = (1..n)
        .filter(|&j| (second.values[j] - l2).abs() <= SPLIT_TOL)
        .map(|j| {
            let c: f64 = (0..n).map(|x| psi[x] * second.phi[(x, j)] * pi[x]).sum();
            c * c
        })
        .sum::<f64>()
        .min(1.0);

    let lower = 1.0 - l1;
    let upper = 1.0 - gamma2 * l2;
    let upper_general = gamma2 * (1.0 - l2) + (1.0 - a) * (1.0 - gamma2);
    Ok(LeakageBounds {
        value,
        lower,
        upper,
        upper_general,
        gamma_a: gamma2.sqrt(),
        lambda2_first: l1,
        lambda2_second: l2,
        a,
        split,
        holds: lower - SANDWICH_TOL <= value && value <= upper_general + SANDWICH_TOL,
        holds_upper: lower - SANDWICH_TOL <= value && value <= upper + SANDWICH_TOL,
    })
}

/// `Φ(A) = Q(A, Aᶜ) = 1 − Q(A, A)`.
pub fn conductance(p: &StochasticKernel, pi: &ProbabilityVector, a: &[usize]) -> Result<f64> {
    check_dim(pi, p.dim())?;
    check_states(a, p.dim())?;
    Ok(flow_matrix(p.matrix(), pi, a, &complement(a, p.dim())))
}

/// `Φ(A)` and `π(A)` for every non-empty subset, indexed by bitmask.
fn subset_table(p: &StochasticKernel, pi: &ProbabilityVector) -> Vec<(f64, f64)> {
    let n = p.dim();
    let m = p.matrix();
    (0..1usize << n)
        .map(|mask| {
            if mask == 0 {
                return (f64::INFINITY, 0.0);
            }
            let members: Vec<usize> = (0..n).filter(|&x| mask >> x & 1 == 1).collect();
            let mass = pi.mass(&members);
            let stay: f64 = members
                .iter()
                .map(|&x| pi[x] * members.iter().map(|&y| m[(x, y)]).sum::<f64>())
                .sum();
            (1.0 - stay / mass, mass)
        })
        .collect()
}

/// `Φ_*(k)` with the default caps.
pub fn conductance_profile(p: &StochasticKernel, pi: &ProbabilityVector, k: usize) -> Result<f64> {
    let cap = if k == 2 { PAIR_CAP } else { TUPLE_CAP };
    conductance_profile_capped(p, pi, k, cap)
}

/// `Φ_*(2) = min_{0 < π(A) ≤ 1/2} Φ(A)`; for `k ≥ 3`, the minimum over
/// `k`-tuples of disjoint non-empty sets of the largest `Φ(A_i)`.
pub fn conductance_profile_capped(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    k: usize,
    cap: usize,
) -> Result<f64> {
    let n = p.dim();
    check_dim(pi, n)?;
    if k < 2 || k > n {
        return Err(MhError::BadParams(format!("k = {k} must lie in [2, {n}]")));
    }
    if n > cap {
        return Err(MhError::TooLarge { size: n, cap });
    }
    let table = subset_table(p, pi);
    if k == 2 {
        return Ok(table
            .iter()
            .filter(|(_, mass)| *mass > 0.0 && *mass <= 0.5 + 1e-12)
            .map(|(phi, _)| *phi)
            .fold(f64::INFINITY, f64::min));
    }
    let mut best = f64::INFINITY;
    search(&table, n, (1 << n) - 1, k, 0, f64::NEG_INFINITY, &mut best);
    Ok(best)
}

/// Picks sets in order of their lowest state so every tuple is visited once.
fn search(
    table: &[(f64, f64)],
    n: usize,
    free: usize,
    left: usize,
    from: usize,
    worst: f64,
    best: &mut f64,
) {
    if left == 0 {
        *best = best.min(worst);
        return;
    }
    for low in from..n {
        if free >> low & 1 == 0 {
            continue;
        }
        // states above `low` that are still free
        let rest = free & !((1usize << (low + 1)) - 1);
        if (rest.count_ones() as usize) < left - 1 {
            break;
        }
        let mut sub = rest;
        loop {
            let set = sub | 1 << low;
            let w = worst.max(table[set].0);
            if w < *best {
                search(table, n, free & !set, left - 1, low + 1, w, best);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheegerBounds {
    /// `(1 − λ_k^{(1)})/2`.
    pub lower: f64,
    /// `√(1 − λ_k^{(2)})`.
    pub upper_root: f64,
    /// `C k⁴ √(1 − λ_k^{(2)})`; advisory, the constant is not known.
    pub upper: f64,
    pub constant: f64,
}

pub fn cheeger_bounds(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    k: usize,
    constant: f64,
) -> Result<CheegerBounds> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let n = p.dim();
    if k == 0 || k > n {
        return Err(MhError::BadParams(format!("k = {k} must lie in [1, {n}]")));
    }
    let (m1, m2) = mh_matrices(p.matrix(), &pi_adjoint(p.matrix(), pi), 1.0);
    let first = spectrum(&m1, pi)?;
    let second = spectrum(&m2, pi)?;
    let upper_root = (1.0 - second[k - 1]).max(0.0).sqrt();
    Ok(CheegerBounds {
        lower: ((1.0 - first[k - 1]) / 2.0).max(0.0),
        upper_root,
        upper: constant * (k as f64).powi(4) * upper_root,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::stationary_distribution;
    use crate::models::{asymmetric_cycle, upward_skip_free};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn skip_free() -> (StochasticKernel, ProbabilityVector) {
        let p = upward_skip_free();
        let pi = stationary_distribution(&p).unwrap();
        (p, pi)
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![vec![0, 1], vec![2]], 3).is_ok());
        assert!(Partition::new(vec![vec![0, 1], vec![1, 2]], 3).is_err());
        assert!(Partition::new(vec![vec![0], vec![2]], 3).is_err());
        assert!(Partition::new(vec![vec![0, 1, 2], vec![]], 3).is_err());
        assert!(Partition::new(vec![vec![0, 3]], 3).is_err());
    }

    #[test]
    fn skip_free_flows() {
        let (p, pi) = skip_free();
        let all = [0, 1, 2, 3];
        assert_abs_diff_eq!(flow(&p, &pi, &all, &all).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(flow(&p, &pi, &[0, 1], &[0, 1]).unwrap(), 0.87, epsilon = 5e-3);
        assert_abs_diff_eq!(flow(&p, &pi, &[2, 3], &[2, 3]).unwrap(), 0.61, epsilon = 5e-3);
        assert_abs_diff_eq!(flow(&p, &pi, &[0, 1, 2], &[0, 1, 2]).unwrap(), 0.98, epsilon = 5e-3);
        let d = Partition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        assert_abs_diff_eq!(partition_metastability(&p, &pi, &d).unwrap(), 1.48, epsilon = 5e-3);
        let d = Partition::new(vec![vec![0, 1, 2], vec![3]], 4).unwrap();
        assert_abs_diff_eq!(partition_metastability(&p, &pi, &d).unwrap(), 1.28, epsilon = 5e-3);
    }

    #[test]
    fn flow_and_conductance_are_complementary() {
        let (p, pi) = skip_free();
        for a in [vec![0], vec![1, 3], vec![0, 2, 3]] {
            let stay = flow(&p, &pi, &a, &a).unwrap();
            assert_abs_diff_eq!(stay + conductance(&p, &pi, &a).unwrap(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn skip_free_metastability_sandwich() {
        let (p, pi) = skip_free();
        let d = Partition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let b = metastability_bounds(&p, &pi, &d).unwrap();
        assert!(b.holds);
        assert_abs_diff_eq!(b.upper, 1.7351, epsilon = 1e-4);
        assert_abs_diff_eq!(b.lower, 1.2891, epsilon = 1e-4);
        assert_abs_diff_eq!(b.a, -0.1604, epsilon = 1e-4);
        assert_abs_diff_eq!(b.rho[1], 0.854, epsilon = 1e-3);

        let whole = Partition::new(vec![vec![0, 1, 2, 3]], 4).unwrap();
        let b = metastability_bounds(&p, &pi, &whole).unwrap();
        assert_abs_diff_eq!(b.value, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.lower, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.upper, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn iid_singletons() {
        let pi = ProbabilityVector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let p = StochasticKernel::rank_one(&pi);
        let m = partition_metastability(&p, &pi, &Partition::singletons(4)).unwrap();
        assert_abs_diff_eq!(m, 1.0, epsilon = 1e-14);
        for a in [vec![0], vec![1, 2]] {
            assert_abs_diff_eq!(leakage(&p, &pi, &a, 1).unwrap(), 1.0, epsilon = 1e-14);
        }
        // Φ(A) = π(Aᶜ) is smallest at the heaviest set of mass ≤ 1/2
        assert_abs_diff_eq!(conductance_profile(&p, &pi, 2).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn leakage_degenerate_and_closed_sets() {
        let (p, pi) = skip_free();
        assert!(matches!(leakage(&p, &pi, &[], 1), Err(MhError::DegenerateSet { .. })));
        assert!(matches!(
            leakage(&p, &pi, &[0, 1, 2, 3], 1),
            Err(MhError::DegenerateSet { .. })
        ));
        let block = StochasticKernel::from_rows(&[
            vec![0.5, 0.5, 0.0],
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let pi = ProbabilityVector::new(vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(leakage(&block, &pi, &[0, 1], 3).unwrap(), 0.0);
    }

    #[test]
    fn psi_is_centered_and_normalized() {
        let (_, pi) = skip_free();
        let v = psi(&[0, 1], &pi);
        let mean: f64 = v.iter().zip(pi.as_slice()).map(|(a, b)| a * b).sum();
        let norm: f64 = v.iter().zip(pi.as_slice()).map(|(a, b)| a * a * b).sum();
        assert!(mean.abs() < 1e-12);
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cycle_leakage_lower_bound() {
        let n = 8;
        let q = 0.3;
        let p = asymmetric_cycle(n, 0.7).unwrap();
        let pi = ProbabilityVector::uniform(n);
        let b = leakage_bounds(&p, &pi, &[0, 1, 2, 3], 1).unwrap();
        assert_abs_diff_eq!(b.lower, 2.0 * q * (1.0 - (2.0 * PI / n as f64).cos()), epsilon = 1e-12);
        assert!(!b.split);
        assert!(b.holds);
        // the arc loses exactly its two boundary states: l = 2·(1/8)·... / (2·½·½)
        assert_abs_diff_eq!(b.value, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn skip_free_leakage() {
        let (p, pi) = skip_free();
        for t in 1..=5 {
            let b = leakage_bounds(&p, &pi, &[0, 1], t).unwrap();
            assert!(b.holds, "t = {t}: {b:?}");
            assert_eq!(b.holds_upper, b.value <= b.upper + SANDWICH_TOL);
        }
    }

    #[test]
    fn conductance_of_nearly_split_chain() {
        let e = 1e-6;
        let p = StochasticKernel::from_rows(&[
            vec![0.5, 0.5 - e, e, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5],
            vec![e, 0.0, 0.5, 0.5 - e],
        ])
        .unwrap();
        let pi = stationary_distribution(&p).unwrap();
        let phi = conductance_profile(&p, &pi, 2).unwrap();
        assert!(phi < 1e-5);
        assert!(cheeger_bounds(&p, &pi, 2, 1.0).unwrap().lower <= phi + 1e-12);
    }

    #[test]
    fn skip_free_cheeger() {
        let (p, pi) = skip_free();
        let phi = conductance_profile(&p, &pi, 2).unwrap();
        let b = cheeger_bounds(&p, &pi, 2, 1.0).unwrap();
        assert_abs_diff_eq!(b.lower, (1.0 - 0.7351) / 2.0, epsilon = 1e-4);
        assert!(b.lower <= phi);
        for k in 3..=4 {
            let phi = conductance_profile(&p, &pi, k).unwrap();
            assert!(cheeger_bounds(&p, &pi, k, 1.0).unwrap().lower <= phi + 1e-12);
        }
        assert_eq!(cheeger_bounds(&p, &pi, 1, 1.0).unwrap().lower, 0.0);
    }

    #[test]
    fn tuple_search_matches_label_enumeration() {
        let (p, pi) = skip_free();
        let n = p.dim();
        let table = subset_table(&p, &pi);
        for k in 3..=4 {
            let mut best = f64::INFINITY;
            for code in 0..(k + 1usize).pow(n as u32) {
                let mut masks = vec![0usize; k];
                let mut c = code;
                for x in 0..n {
                    let label = c % (k + 1);
                    c /= k + 1;
                    if label > 0 {
                        masks[label - 1] |= 1 << x;
                    }
                }
                if masks.iter().all(|&m| m != 0) {
                    best = best.min(masks.iter().map(|&m| table[m].0).fold(f64::NEG_INFINITY, f64::max));
                }
            }
            assert_eq!(conductance_profile(&p, &pi, k).unwrap(), best);
        }
    }

    #[test]
    fn enumeration_caps() {
        let p = asymmetric_cycle(12, 0.6).unwrap();
        let pi = ProbabilityVector::uniform(12);
        assert!(conductance_profile(&p, &pi, 2).is_ok());
        assert!(matches!(conductance_profile(&p, &pi, 3), Err(MhError::TooLarge { .. })));
        assert!(matches!(conductance_profile(&p, &pi, 13), Err(MhError::BadParams(_))));
    }
}

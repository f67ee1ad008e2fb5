//! Finite-state kernels, the π-weighted inner product, stationary
//! distributions, time reversal and matrix powers.
//!
//! States are indexed `0..n`. Every matrix is stored densely and row-major in
//! the mathematical sense: entry `(x, y)` is the transition weight from `x`
//! to `y`.

use nalgebra::{DMatrix, DVector};

use crate::error::{MhError, Result};

/// Absolute tolerance for structural invariants (row sums, signs).
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Absolute tolerance for solved quantities (stationarity residuals).
pub const SOLVED_TOL: f64 = 1e-10;

/// Above this many states the stationary solve switches to power iteration.
const DIRECT_SOLVE_LIMIT: usize = 2000;

/// Whether an operator fixes constants with eigenvalue one (a kernel) or
/// annihilates them (a rate generator).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Kernel,
    Generator,
}

/// Square matrices that act on `L²(π)`.
pub trait PiOperator {
    const KIND: OperatorKind;

    fn matrix(&self) -> &DMatrix<f64>;

    fn dim(&self) -> usize {
        self.matrix().nrows()
    }
}

/// A strictly positive probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    entries: DVector<f64>,
}

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(entries, STRUCTURAL_TOL)
    }

    pub fn with_tolerance(entries: Vec<f64>, tol: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(MhError::InvalidDistribution("empty vector".into()));
        }
        if let Some((i, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(MhError::InvalidDistribution(format!(
                "entry {i} = {v} is not strictly positive"
            )));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(MhError::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(Self {
            entries: DVector::from_vec(entries),
        })
    }

    /// Normalizes positive weights into a probability vector.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(MhError::InvalidDistribution(format!(
                "weights sum to {total}"
            )));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            entries: DVector::from_element(n, 1.0 / n as f64),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.entries.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.entries
    }

    pub fn min(&self) -> f64 {
        self.entries.min()
    }

    /// π-mass of a set of states.
    pub fn mass(&self, states: &[usize]) -> f64 {
        states.iter().map(|&x| self.entries[x]).sum()
    }

    /// Entrywise square root, the change of basis between `L²(π)` and `ℓ²`.
    pub fn sqrt(&self) -> DVector<f64> {
        self.entries.map(f64::sqrt)
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// A row-stochastic, entrywise non-negative square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticKernel {
    matrix: DMatrix<f64>,
}

/// A square matrix with unit row sums and non-negative off-diagonal entries;
/// the diagonal may be negative down to `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedKernel {
    matrix: DMatrix<f64>,
}

/// A square matrix with zero row sums and non-negative off-diagonal rates.
#[derive(Debug, Clone, PartialEq)]
pub struct RateGenerator {
    matrix: DMatrix<f64>,
}

fn check_square(m: &DMatrix<f64>, what: &'static str) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(MhError::InvalidKernel {
            what,
            reason: format!("matrix is {}x{}", m.nrows(), m.ncols()),
        });
    }
    if let Some(v) = m.iter().find(|v| !v.is_finite()) {
        return Err(MhError::InvalidKernel {
            what,
            reason: format!("non-finite entry {v}"),
        });
    }
    Ok(())
}

fn check_row_sums(m: &DMatrix<f64>, target: f64, tol: f64, what: &'static str) -> Result<()> {
    for (x, row) in m.row_iter().enumerate() {
        let s: f64 = row.iter().sum();
        if (s - target).abs() > tol {
            return Err(MhError::InvalidKernel {
                what,
                reason: format!("row {x} sums to {s}, expected {target}"),
            });
        }
    }
    Ok(())
}

fn check_off_diagonal(m: &DMatrix<f64>, tol: f64, what: &'static str) -> Result<()> {
    let n = m.nrows();
    for x in 0..n {
        for y in 0..n {
            if x != y && m[(x, y)] < -tol {
                return Err(MhError::InvalidKernel {
                    what,
                    reason: format!("off-diagonal entry ({x}, {y}) = {} is negative", m[(x, y)]),
                });
            }
        }
    }
    Ok(())
}

impl StochasticKernel {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(matrix, STRUCTURAL_TOL)
    }

    pub fn with_tolerance(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        const WHAT: &str = "stochastic kernel";
        check_square(&matrix, WHAT)?;
        if let Some(((x, y), v)) = matrix
            .iter()
            .enumerate()
            .map(|(i, v)| ((i % matrix.nrows(), i / matrix.nrows()), v))
            .find(|(_, v)| **v < -tol)
        {
            return Err(MhError::InvalidKernel {
                what: WHAT,
                reason: format!("entry ({x}, {y}) = {v} is negative"),
            });
        }
        check_row_sums(&matrix, 1.0, tol, WHAT)?;
        Ok(Self { matrix })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    /// The kernel whose every row equals `pi`.
    pub fn rank_one(pi: &ProbabilityVector) -> Self {
        let n = pi.len();
        Self {
            matrix: DMatrix::from_fn(n, n, |_, y| pi[y]),
        }
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.matrix[(x, y)]
    }

    /// `(Pf)(x) = Σ_y P(x,y) f(y)`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(f))
            .as_slice()
            .to_vec()
    }
}

impl SignedKernel {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(matrix, STRUCTURAL_TOL)
    }

    pub fn with_tolerance(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        const WHAT: &str = "signed kernel";
        check_square(&matrix, WHAT)?;
        check_off_diagonal(&matrix, tol, WHAT)?;
        check_row_sums(&matrix, 1.0, tol, WHAT)?;
        if let Some(x) = (0..matrix.nrows()).find(|&x| matrix[(x, x)] < -1.0 - tol) {
            return Err(MhError::InvalidKernel {
                what: WHAT,
                reason: format!("diagonal entry {x} = {} is below -1", matrix[(x, x)]),
            });
        }
        Ok(Self { matrix })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.matrix[(x, y)]
    }
}

impl RateGenerator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(matrix, STRUCTURAL_TOL)
    }

    /// Row sums are checked relative to the largest rate in the row.
    pub fn with_tolerance(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        const WHAT: &str = "rate generator";
        check_square(&matrix, WHAT)?;
        check_off_diagonal(&matrix, tol, WHAT)?;
        for (x, row) in matrix.row_iter().enumerate() {
            let s: f64 = row.iter().sum();
            let scale = row.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
            if s.abs() > tol * scale {
                return Err(MhError::InvalidKernel {
                    what: WHAT,
                    reason: format!("row {x} sums to {s}, expected 0"),
                });
            }
        }
        Ok(Self { matrix })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(n, n),
        }
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.matrix[(x, y)]
    }
}

impl PiOperator for StochasticKernel {
    const KIND: OperatorKind = OperatorKind::Kernel;

    fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl PiOperator for SignedKernel {
    const KIND: OperatorKind = OperatorKind::Kernel;

    fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl PiOperator for RateGenerator {
    const KIND: OperatorKind = OperatorKind::Generator;

    fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl StochasticKernel {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

impl SignedKernel {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

impl RateGenerator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(MhError::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(n, n, |x, y| rows[x][y]))
}

pub(crate) fn check_dim(pi: &ProbabilityVector, n: usize) -> Result<()> {
    if pi.len() != n {
        return Err(MhError::DimensionMismatch {
            expected: n,
            got: pi.len(),
        });
    }
    Ok(())
}

/// `‖πK − c·π‖_∞`, where `c` is 1 for kernels and 0 for generators.
pub fn stationarity_residual(m: &DMatrix<f64>, pi: &ProbabilityVector, kind: OperatorKind) -> f64 {
    let left = m.tr_mul(pi.as_vector());
    let target = match kind {
        OperatorKind::Kernel => 1.0,
        OperatorKind::Generator => 0.0,
    };
    left.iter()
        .zip(pi.as_slice())
        .map(|(l, p)| (l - target * p).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn require_stationary(
    m: &DMatrix<f64>,
    pi: &ProbabilityVector,
    kind: OperatorKind,
) -> Result<()> {
    check_dim(pi, m.nrows())?;
    let scale = match kind {
        OperatorKind::Kernel => 1.0,
        OperatorKind::Generator => m.iter().fold(1.0_f64, |a, v| a.max(v.abs())),
    };
    let residual = stationarity_residual(m, pi, kind);
    if residual > SOLVED_TOL * scale {
        return Err(MhError::NotStationary { residual });
    }
    Ok(())
}

/// The π-adjoint `K*(x,y) = π(y) K(y,x) / π(x)` of any square matrix.
pub fn pi_adjoint(m: &DMatrix<f64>, pi: &ProbabilityVector) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |x, y| pi[y] * m[(y, x)] / pi[x])
}

/// Returns a pair `(from, to)` with `to` unreachable from `from`, or `None`
/// when the positive-entry graph is strongly connected.
pub fn find_unreachable(m: &DMatrix<f64>) -> Option<(usize, usize)> {
    let n = m.nrows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for y in 0..n {
                let w = if forward { m[(x, y)] } else { m[(y, x)] };
                if x != y && w > 0.0 && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    };
    if let Some(y) = reach(true).iter().position(|s| !s) {
        return Some((0, y));
    }
    reach(false).iter().position(|s| !s).map(|x| (x, 0))
}

/// Stationary distribution of an irreducible kernel.
///
/// Uses the subtraction-free GTH state reduction, which keeps every entry of
/// π accurate to a few ulps relative to its own size even when π spans many
/// orders of magnitude.
pub fn stationary_distribution(p: &StochasticKernel) -> Result<ProbabilityVector> {
    if let Some((from, to)) = find_unreachable(p.matrix()) {
        return Err(MhError::ReducibleChain { from, to });
    }
    let n = p.dim();
    let raw = if n > DIRECT_SOLVE_LIMIT {
        power_iteration(p.matrix())
    } else {
        gth(p.matrix())
    };
    let total: f64 = raw.iter().sum();
    let entries: Vec<f64> = raw.iter().map(|v| v / total).collect();
    if let Some((state, &value)) = entries
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(MhError::NonPositiveStationary { state, value });
    }
    let pi = ProbabilityVector::new(entries)?;
    let residual = stationarity_residual(p.matrix(), &pi, OperatorKind::Kernel);
    if residual > SOLVED_TOL {
        return Err(MhError::NotStationary { residual });
    }
    Ok(pi)
}

fn gth(p: &DMatrix<f64>) -> Vec<f64> {
    let n = p.nrows();
    let mut a = p.clone();
    for k in (1..n).rev() {
        let s: f64 = (0..k).map(|j| a[(k, j)]).sum();
        for i in 0..k {
            a[(i, k)] /= s;
        }
        for i in 0..k {
            let aik = a[(i, k)];
            if aik == 0.0 {
                continue;
            }
            for j in 0..k {
                a[(i, j)] += aik * a[(k, j)];
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        pi[k] = (0..k).map(|i| pi[i] * a[(i, k)]).sum();
    }
    pi
}

fn power_iteration(p: &DMatrix<f64>) -> Vec<f64> {
    let n = p.nrows();
    // lazy version so that periodic chains still converge
    let lazy = (p + DMatrix::<f64>::identity(n, n)) * 0.5;
    let mut v = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..200_000 {
        let next = lazy.tr_mul(&v);
        let delta = (&next - &v).amax();
        v = next;
        if delta < 1e-16 {
            break;
        }
    }
    v.as_slice().to_vec()
}

/// The time reversal `P*(x,y) = π(y) P(y,x) / π(x)`.
pub fn time_reversal(p: &StochasticKernel, pi: &ProbabilityVector) -> Result<StochasticKernel> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    Ok(StochasticKernel::from_matrix_unchecked(pi_adjoint(
        p.matrix(),
        pi,
    )))
}

/// `Pⁿ` by repeated multiplication. Rows are renormalized (with a warning)
/// only if their sums drift by more than the structural tolerance.
pub fn kernel_power(p: &StochasticKernel, n: usize) -> StochasticKernel {
    let dim = p.dim();
    let mut acc = DMatrix::<f64>::identity(dim, dim);
    let mut base = p.matrix().clone();
    let mut e = n;
    let mut first = true;
    while e > 0 {
        if e & 1 == 1 {
            acc = if first { base.clone() } else { &acc * &base };
            first = false;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    renormalize_rows(&mut acc, n);
    StochasticKernel::from_matrix_unchecked(acc)
}

pub(crate) fn renormalize_rows(m: &mut DMatrix<f64>, step: usize) {
    for x in 0..m.nrows() {
        let s: f64 = m.row(x).sum();
        if (s - 1.0).abs() > STRUCTURAL_TOL {
            log::warn!("row {x} of the {step}-step kernel drifted to {s}; renormalizing");
            m.row_mut(x).iter_mut().for_each(|v| *v /= s);
        }
    }
}

/// Detailed balance check: `max |π(x)P(x,y) − π(y)P(y,x)| ≤ tol`.
pub fn is_reversible(p: &StochasticKernel, pi: &ProbabilityVector, tol: f64) -> bool {
    detailed_balance_residual(p.matrix(), pi) <= tol
}

pub(crate) fn detailed_balance_residual(m: &DMatrix<f64>, pi: &ProbabilityVector) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for x in 0..n {
        for y in (x + 1)..n {
            worst = worst.max((pi[x] * m[(x, y)] - pi[y] * m[(y, x)]).abs());
        }
    }
    worst
}

/// `⟨f, g⟩_π = Σ_x f(x) g(x) π(x)`.
pub fn weighted_inner_product(f: &[f64], g: &[f64], pi: &ProbabilityVector) -> Result<f64> {
    for v in [f, g] {
        if v.len() != pi.len() {
            return Err(MhError::DimensionMismatch {
                expected: pi.len(),
                got: v.len(),
            });
        }
    }
    Ok(f.iter()
        .zip(g)
        .zip(pi.as_slice())
        .map(|((a, b), w)| a * b * w)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn triangle() -> StochasticKernel {
        StochasticKernel::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn triangle_stationary() {
        let pi = stationary_distribution(&triangle()).unwrap();
        for (got, want) in pi.as_slice().iter().zip([0.2, 0.4, 0.4]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn two_state_stationary() {
        let p = StochasticKernel::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        assert_abs_diff_eq!(pi[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pi[1], 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn reducible_chain_rejected() {
        let p = StochasticKernel::from_rows(&[vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            stationary_distribution(&p),
            Err(MhError::ReducibleChain { .. })
        ));
    }

    #[test]
    fn gth_keeps_relative_accuracy_for_tiny_mass() {
        // winning-streak chain with m = 50: π(i) = 2^-(i+1), π(m) = 2^-m
        let m = 50;
        let mut p = DMatrix::zeros(m + 1, m + 1);
        for i in 0..=m {
            p[(i, 0)] += 0.5;
            p[(i, (i + 1).min(m))] += 0.5;
        }
        let pi = stationary_distribution(&StochasticKernel::new(p).unwrap()).unwrap();
        for i in 0..m {
            assert_eq!(pi[i], 2f64.powi(-(i as i32 + 1)));
        }
        assert_eq!(pi[m], 2f64.powi(-(m as i32)));
    }

    #[test]
    fn power_iteration_agrees_with_gth() {
        let p = triangle();
        let a = gth(p.matrix());
        let b = power_iteration(p.matrix());
        let sa: f64 = a.iter().sum();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x / sa, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn triangle_reversal_entry() {
        let p = triangle();
        let pi = stationary_distribution(&p).unwrap();
        let ps = time_reversal(&p, &pi).unwrap();
        assert_eq!(p.get(1, 0), 0.0);
        assert_abs_diff_eq!(ps.get(1, 0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ps.get(0, 2), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn reversal_rejects_wrong_pi() {
        let p = triangle();
        let pi = ProbabilityVector::uniform(3);
        assert!(matches!(
            time_reversal(&p, &pi),
            Err(MhError::NotStationary { .. })
        ));
    }

    #[test]
    fn triangle_powers() {
        let p = triangle();
        let p4 = kernel_power(&p, 4);
        let want4 = [[0.0, 0.5, 0.5], [0.25, 0.25, 0.5], [0.25, 0.5, 0.25]];
        let p5 = kernel_power(&p, 5);
        let want5 = [[0.25, 0.25, 0.5], [0.25, 0.5, 0.25], [0.125, 0.375, 0.5]];
        for x in 0..3 {
            for y in 0..3 {
                assert_abs_diff_eq!(p4.get(x, y), want4[x][y], epsilon = 1e-15);
                assert_abs_diff_eq!(p5.get(x, y), want5[x][y], epsilon = 1e-15);
            }
        }
        assert_eq!(kernel_power(&p, 1), p);
    }

    #[test]
    fn reversibility_examples() {
        let p = triangle();
        let pi = stationary_distribution(&p).unwrap();
        assert!(!is_reversible(&p, &pi, 1e-10));
        assert!(is_reversible(&kernel_power(&p, 4), &pi, 1e-12));
        let sym = StochasticKernel::from_rows(&[
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.5, 0.0, 0.5, 0.0],
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.5, 0.0, 0.5, 0.0],
        ])
        .unwrap();
        assert!(is_reversible(&sym, &ProbabilityVector::uniform(4), 1e-15));
    }

    #[test]
    fn inner_products() {
        let pi = ProbabilityVector::new(vec![0.2, 0.4, 0.4]).unwrap();
        let ones = [1.0; 3];
        assert_abs_diff_eq!(weighted_inner_product(&ones, &ones, &pi).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            weighted_inner_product(&[1.0, 2.0, 3.0], &ones, &pi).unwrap(),
            2.2,
            epsilon = 1e-15
        );
        let u = ProbabilityVector::uniform(4);
        let a = [1.0, 1.0, 0.0, 0.0];
        assert_abs_diff_eq!(weighted_inner_product(&a, &a, &u).unwrap(), 0.5, epsilon = 1e-15);
        assert!(matches!(
            weighted_inner_product(&[1.0], &ones, &pi),
            Err(MhError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constructors_enforce_invariants() {
        assert!(StochasticKernel::from_rows(&[vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(StochasticKernel::from_rows(&[vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
        assert!(SignedKernel::from_rows(&[vec![-1.0, 2.0], vec![0.5, 0.5]]).is_ok());
        assert!(SignedKernel::from_rows(&[vec![-1.5, 2.5], vec![0.5, 0.5]]).is_err());
        assert!(RateGenerator::from_rows(&[vec![-1.0, 1.0], vec![2.0, -2.0]]).is_ok());
        assert!(RateGenerator::from_rows(&[vec![-1.0, 1.0], vec![2.0, -1.0]]).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.5, 0.0]).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
    }
}

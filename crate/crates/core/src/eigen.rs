//! Dense real symmetric eigensolvers.
//!
//! Small matrices go through a cyclic Jacobi sweep, which is accurate to a few
//! ulps and doubles as the reference oracle in tests. Larger ones are handed
//! to nalgebra's tridiagonal QR.

use nalgebra::DMatrix;

use crate::error::{MhError, Result};

/// Largest dimension routed to Jacobi under [`Solver::Auto`].
pub const JACOBI_LIMIT: usize = 32;

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    #[default]
    Auto,
    Jacobi,
    Householder,
}

/// Eigenpairs sorted by descending eigenvalue; column `j` of `vectors` is
/// the unit eigenvector for `values[j]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn symmetric_eigen(s: &DMatrix<f64>, solver: Solver) -> Result<SymmetricEigen> {
    match pick(s.nrows(), solver) {
        Solver::Jacobi => jacobi(s),
        _ => householder(s),
    }
}

/// Eigenvalues only, sorted descending.
pub fn symmetric_eigenvalues(s: &DMatrix<f64>, solver: Solver) -> Result<Vec<f64>> {
    match pick(s.nrows(), solver) {
        Solver::Jacobi => Ok(jacobi(s)?.values),
        _ => {
            let mut values: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
            values.sort_by(|a, b| b.total_cmp(a));
            Ok(values)
        }
    }
}

fn pick(n: usize, solver: Solver) -> Solver {
    match solver {
        Solver::Auto if n <= JACOBI_LIMIT => Solver::Jacobi,
        Solver::Auto => Solver::Householder,
        other => other,
    }
}

fn householder(s: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let eig = nalgebra::SymmetricEigen::try_new(s.clone(), f64::EPSILON, 10_000)
        .ok_or(MhError::NoConvergence { sweeps: 10_000 })?;
    Ok(sorted(eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors))
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// `1e-13 · ‖S‖_F`.
pub fn jacobi(s: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = s.nrows();
    let mut a = s.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = s.norm();
    let threshold = OFF_DIAGONAL_TOL * scale;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(MhError::NoConvergence { sweeps: MAX_SWEEPS });
    }
    let values = (0..n).map(|i| a[(i, i)]).collect();
    Ok(sorted(values, v))
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let n = a.nrows();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn sorted(values: Vec<f64>, vectors: DMatrix<f64>) -> SymmetricEigen {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let n = vectors.nrows();
    SymmetricEigen {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: DMatrix::from_fn(n, order.len(), |r, c| vectors[(r, order[c])]),
    }
}

//! The two Metropolis-Hastings kernels, additive and multiplicative
//! reversiblizations, and their generator analogues.

use nalgebra::DMatrix;

use crate::error::{MhError, Result};
use crate::kernel::{
    detailed_balance_residual, kernel_power, pi_adjoint, require_stationary, OperatorKind,
    ProbabilityVector, RateGenerator, SignedKernel, StochasticKernel, SOLVED_TOL,
};

/// Ties `p = p*` closer than this count as equal when building `A_x`.
pub const TIE_TOL: f64 = 1e-14;

/// `(M1, M2)` from a matrix and its π-adjoint. `diagonal` is the row-sum
/// target (1 for kernels, 0 for generators).
pub(crate) fn mh_matrices(
    p: &DMatrix<f64>,
    ps: &DMatrix<f64>,
    diagonal: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = p.nrows();
    let mut m1 = DMatrix::zeros(n, n);
    let mut m2 = DMatrix::zeros(n, n);
    for x in 0..n {
        let (mut off1, mut off2) = (0.0, 0.0);
        let mut balanced = true;
        for y in (0..n).filter(|&y| y != x) {
            let (a, b) = (p[(x, y)], ps[(x, y)]);
            // p* is a ratio of products; treat last-bit disagreement as balance
            let b = if (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) { a } else { b };
            balanced &= a == b;
            m1[(x, y)] = a.min(b);
            m2[(x, y)] = a.max(b);
            off1 += m1[(x, y)];
            off2 += m2[(x, y)];
        }
        if balanced {
            m1[(x, x)] = p[(x, x)];
            m2[(x, x)] = p[(x, x)];
        } else {
            m1[(x, x)] = diagonal - off1;
            m2[(x, x)] = diagonal - off2;
        }
    }
    (m1, m2)
}

/// First MH kernel: `min(p, p*)` off the diagonal, rejected mass on it.
pub fn mh_first(p: &StochasticKernel, pi: &ProbabilityVector) -> Result<StochasticKernel> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let ps = pi_adjoint(p.matrix(), pi);
    let (m1, _) = mh_matrices(p.matrix(), &ps, 1.0);
    Ok(StochasticKernel::from_matrix_unchecked(m1))
}

/// Second MH kernel: `max(p, p*)` off the diagonal, `p(x,x) − r1(x)` on it.
pub fn mh_second(p: &StochasticKernel, pi: &ProbabilityVector) -> Result<SignedKernel> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let ps = pi_adjoint(p.matrix(), pi);
    let (_, m2) = mh_matrices(p.matrix(), &ps, 1.0);
    Ok(SignedKernel::from_matrix_unchecked(m2))
}

/// Both MH kernels at once.
pub fn mh_pair(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
) -> Result<(StochasticKernel, SignedKernel)> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let ps = pi_adjoint(p.matrix(), pi);
    let (m1, m2) = mh_matrices(p.matrix(), &ps, 1.0);
    Ok((
        StochasticKernel::from_matrix_unchecked(m1),
        SignedKernel::from_matrix_unchecked(m2),
    ))
}

/// `A_x = {y ≠ x : p*(x,y) < p(x,y)}`, the states where a proposal from `x`
/// can be rejected.
pub fn acceptance_region(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    x: usize,
) -> Result<Vec<usize>> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    if x >= p.dim() {
        return Err(MhError::DimensionMismatch {
            expected: p.dim(),
            got: x + 1,
        });
    }
    Ok(region_row(p.matrix(), pi, x))
}

pub(crate) fn region_row(p: &DMatrix<f64>, pi: &ProbabilityVector, x: usize) -> Vec<usize> {
    (0..p.nrows())
        .filter(|&y| y != x && pi[y] * p[(y, x)] / pi[x] < p[(x, y)] - TIE_TOL)
        .collect()
}

/// `(P + P*) / 2`.
pub fn additive_reversiblization(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
) -> Result<StochasticKernel> {
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let ps = pi_adjoint(p.matrix(), pi);
    Ok(StochasticKernel::from_matrix_unchecked(
        (p.matrix() + ps) * 0.5,
    ))
}

/// `P*ᵏ Pᵏ`.
pub fn multiplicative_reversiblization(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    k: usize,
) -> Result<StochasticKernel> {
    if k == 0 {
        return Err(MhError::BadParams("k must be at least 1".into()));
    }
    require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
    let pk = kernel_power(p, k);
    Ok(StochasticKernel::from_matrix_unchecked(
        pi_adjoint(pk.matrix(), pi) * pk.matrix(),
    ))
}

/// `M1(G)`: off-diagonal `min(g, g*)`, zero row sums.
pub fn generator_mh_first(g: &RateGenerator, pi: &ProbabilityVector) -> Result<RateGenerator> {
    Ok(generator_mh(g, pi)?.0)
}

/// `M2(G) = G + G* − M1(G)`.
pub fn generator_mh_second(g: &RateGenerator, pi: &ProbabilityVector) -> Result<RateGenerator> {
    Ok(generator_mh(g, pi)?.1)
}

fn generator_mh(g: &RateGenerator, pi: &ProbabilityVector) -> Result<(RateGenerator, RateGenerator)> {
    require_stationary(g.matrix(), pi, OperatorKind::Generator)?;
    let gs = pi_adjoint(g.matrix(), pi);
    let (m1, m2) = mh_matrices(g.matrix(), &gs, 0.0);
    Ok((
        RateGenerator::from_matrix_unchecked(m1),
        RateGenerator::from_matrix_unchecked(m2),
    ))
}

/// For `G = G_BD + V` with `G_BD` reversible: `(M1(G), M2(G)) = (G_BD, G_BD + V + V*)`.
pub fn generator_mh_pair(
    gbd: &RateGenerator,
    v: &RateGenerator,
    pi: &ProbabilityVector,
) -> Result<(RateGenerator, RateGenerator)> {
    if gbd.dim() != v.dim() {
        return Err(MhError::DimensionMismatch {
            expected: gbd.dim(),
            got: v.dim(),
        });
    }
    let g = gbd.matrix() + v.matrix();
    require_stationary(&g, pi, OperatorKind::Generator)?;
    let scale = gbd.matrix().amax().max(1.0);
    let residual = detailed_balance_residual(gbd.matrix(), pi);
    if residual > SOLVED_TOL * scale {
        return Err(MhError::NotReversibleBase { residual });
    }
    let vs = pi_adjoint(v.matrix(), pi);
    Ok((
        gbd.clone(),
        RateGenerator::from_matrix_unchecked(gbd.matrix() + v.matrix() + vs),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{is_reversible, stationary_distribution};
    use approx::assert_abs_diff_eq;

    fn triangle() -> (StochasticKernel, ProbabilityVector) {
        let p = StochasticKernel::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap();
        let pi = stationary_distribution(&p).unwrap();
        (p, pi)
    }

    fn assert_matrix(m: &DMatrix<f64>, want: &[[f64; 3]; 3]) {
        for x in 0..3 {
            for y in 0..3 {
                assert_abs_diff_eq!(m[(x, y)], want[x][y], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn triangle_mh_kernels() {
        let (p, pi) = triangle();
        let m1 = mh_first(&p, &pi).unwrap();
        let m2 = mh_second(&p, &pi).unwrap();
        assert_matrix(m1.matrix(), &[[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.0, 0.5, 0.5]]);
        assert_matrix(m2.matrix(), &[[-1.0, 1.0, 1.0], [0.5, -0.5, 1.0], [0.5, 1.0, -0.5]]);
        assert!(SignedKernel::new(m2.matrix().clone()).is_ok());
    }

    #[test]
    fn triangle_acceptance_regions() {
        let (p, pi) = triangle();
        assert_eq!(acceptance_region(&p, &pi, 0).unwrap(), vec![1]);
        assert_eq!(acceptance_region(&p, &pi, 1).unwrap(), vec![2]);
    }

    #[test]
    fn triangle_additive() {
        let (p, pi) = triangle();
        let a = additive_reversiblization(&p, &pi).unwrap();
        // P* = [[0,0,1],[.5,0,.5],[0,1,0]]
        assert_matrix(a.matrix(), &[[0.0, 0.5, 0.5], [0.25, 0.0, 0.75], [0.25, 0.75, 0.0]]);
        assert!(is_reversible(&a, &pi, 1e-14));
    }

    #[test]
    fn cycle_mh_entries() {
        let (n, pr) = (5, 0.8);
        let p = DMatrix::from_fn(n, n, |j, k| {
            if k == (j + 1) % n {
                pr
            } else if (k + 1) % n == j {
                1.0 - pr
            } else {
                0.0
            }
        });
        let p = StochasticKernel::new(p).unwrap();
        let pi = ProbabilityVector::uniform(n);
        let m1 = mh_first(&p, &pi).unwrap();
        let m2 = mh_second(&p, &pi).unwrap();
        for j in 0..n {
            assert_abs_diff_eq!(m1.get(j, (j + 1) % n), 0.2, epsilon = 1e-15);
            assert_abs_diff_eq!(m1.get(j, j), 0.6, epsilon = 1e-15);
            assert_abs_diff_eq!(m2.get(j, (j + n - 1) % n), 0.8, epsilon = 1e-15);
            assert_abs_diff_eq!(m2.get(j, j), -0.6, epsilon = 1e-15);
        }
    }

    #[test]
    fn reversible_input_is_fixed() {
        let p = StochasticKernel::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        let m1 = mh_first(&p, &pi).unwrap();
        let m2 = mh_second(&p, &pi).unwrap();
        assert!((m1.matrix() - p.matrix()).amax() < 1e-15);
        assert!((m2.matrix() - p.matrix()).amax() < 1e-15);
        assert!(acceptance_region(&p, &pi, 0).unwrap().is_empty());
    }

    #[test]
    fn multiplicative_is_reversible() {
        let (p, pi) = triangle();
        for k in 1..4 {
            let m = multiplicative_reversiblization(&p, &pi, k).unwrap();
            assert!(is_reversible(&m, &pi, 1e-14));
        }
        assert!(multiplicative_reversiblization(&p, &pi, 0).is_err());
    }

    #[test]
    fn generator_pair_matches_generic_construction() {
        // three-state reversible base, uniform π, plus a cyclic vortex
        let gbd = RateGenerator::from_rows(&[
            vec![-1.0, 1.0, 0.0],
            vec![1.0, -2.0, 1.0],
            vec![0.0, 1.0, -1.0],
        ])
        .unwrap();
        let pi = ProbabilityVector::uniform(3);
        let v = RateGenerator::from_rows(&[
            vec![-3.0, 3.0, 0.0],
            vec![0.0, -3.0, 3.0],
            vec![3.0, 0.0, -3.0],
        ])
        .unwrap();
        let (m1, m2) = generator_mh_pair(&gbd, &v, &pi).unwrap();
        let g = RateGenerator::new(gbd.matrix() + v.matrix()).unwrap();
        let g1 = generator_mh_first(&g, &pi).unwrap();
        let g2 = generator_mh_second(&g, &pi).unwrap();
        assert!((m1.matrix() - g1.matrix()).amax() < 1e-14);
        assert!((m2.matrix() - g2.matrix()).amax() < 1e-14);

        let zero = RateGenerator::zero(3);
        let (a, b) = generator_mh_pair(&gbd, &zero, &pi).unwrap();
        assert_eq!(a, gbd);
        assert_eq!(b, gbd);
    }

    #[test]
    fn generator_pair_rejects_non_reversible_base() {
        let g = RateGenerator::from_rows(&[
            vec![-1.0, 1.0, 0.0],
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
        ])
        .unwrap();
        let pi = ProbabilityVector::uniform(3);
        assert!(matches!(
            generator_mh_pair(&g, &RateGenerator::zero(3), &pi),
            Err(MhError::NotReversibleBase { .. })
        ));
    }
}

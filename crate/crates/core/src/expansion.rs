//! The MH pseudospectral expansion: `Pⁿ` and `P*ⁿ` rebuilt entrywise from
//! the eigendecompositions of `M1(Pⁿ)` and `M2(Pⁿ)`.
//!
//! For `y ∈ A_x` the transition `Pⁿ(x,y)` is the larger of `pⁿ, p*ⁿ`, hence
//! an entry of `M2(Pⁿ)`; off `A_x` it is the smaller, an entry of `M1(Pⁿ)`.
//! The diagonal is the average of both. The time reversal swaps the roles.

use nalgebra::DMatrix;

use crate::error::{MhError, Result};
use crate::kernel::{
    kernel_power, pi_adjoint, require_stationary, OperatorKind, ProbabilityVector,
    StochasticKernel,
};
use crate::reversiblize::{mh_matrices, region_row};
use crate::spectra::EigenBasis;

/// Largest entrywise deviation tolerated between a reconstruction and the
/// directly computed power.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct PseudospectralExpansion {
    pub steps: usize,
    /// `A_x` of `Pⁿ` for each state `x`.
    pub regions: Vec<Vec<usize>>,
    pub first: EigenBasis,
    pub second: EigenBasis,
    pi: ProbabilityVector,
}

impl PseudospectralExpansion {
    pub fn new(p: &StochasticKernel, pi: &ProbabilityVector, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(MhError::BadParams("n must be at least 1".into()));
        }
        require_stationary(p.matrix(), pi, OperatorKind::Kernel)?;
        let pn = kernel_power(p, n);
        let (m1, m2) = mh_matrices(pn.matrix(), &pi_adjoint(pn.matrix(), pi), 1.0);
        Ok(Self {
            steps: n,
            regions: (0..p.dim()).map(|x| region_row(pn.matrix(), pi, x)).collect(),
            first: EigenBasis::new(&m1, pi)?,
            second: EigenBasis::new(&m2, pi)?,
            pi: pi.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.pi.len()
    }

    /// `Σ_j λ_j φ_j(x) φ_j(y) π(y)`.
    fn kernel_entry(basis: &EigenBasis, pi: &ProbabilityVector, x: usize, y: usize) -> f64 {
        basis
            .values
            .iter()
            .enumerate()
            .map(|(j, l)| l * basis.phi[(x, j)] * basis.phi[(y, j)])
            .sum::<f64>()
            * pi[y]
    }

    fn entry(&self, x: usize, y: usize, reversed: bool) -> f64 {
        let one = || Self::kernel_entry(&self.first, &self.pi, x, y);
        let two = || Self::kernel_entry(&self.second, &self.pi, x, y);
        if x == y {
            return 0.5 * (one() + two());
        }
        let in_region = self.regions[x].binary_search(&y).is_ok();
        if in_region != reversed {
            two()
        } else {
            one()
        }
    }

    /// `Pⁿ` from the two expansions.
    pub fn kernel(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |x, y| self.entry(x, y, false))
    }

    /// `P*ⁿ` from the two expansions.
    pub fn reversal(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |x, y| self.entry(x, y, true))
    }

    /// `Pⁿf` evaluated pointwise through the expansions.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if f.len() != n {
            return Err(MhError::DimensionMismatch {
                expected: n,
                got: f.len(),
            });
        }
        let project = |basis: &EigenBasis, x: usize, mask: &dyn Fn(usize) -> bool| -> f64 {
            (0..n)
                .map(|j| {
                    let inner: f64 = (0..n)
                        .filter(|&y| mask(y))
                        .map(|y| f[y] * basis.phi[(y, j)] * self.pi[y])
                        .sum();
                    basis.values[j] * basis.phi[(x, j)] * inner
                })
                .sum()
        };
        Ok((0..n)
            .map(|x| {
                let region = &self.regions[x];
                let inside = |y: usize| region.binary_search(&y).is_ok();
                let outside = |y: usize| y != x && region.binary_search(&y).is_err();
                let diagonal = 0.5
                    * (Self::kernel_entry(&self.first, &self.pi, x, x)
                        + Self::kernel_entry(&self.second, &self.pi, x, x))
                    * f[x];
                project(&self.first, x, &outside) + project(&self.second, x, &inside) + diagonal
            })
            .collect())
    }
}

fn verify(rebuilt: DMatrix<f64>, direct: &DMatrix<f64>) -> Result<StochasticKernel> {
    let n = direct.nrows();
    for x in 0..n {
        for y in 0..n {
            let deviation = (rebuilt[(x, y)] - direct[(x, y)]).abs();
            if deviation > RECONSTRUCTION_TOL {
                return Err(MhError::ReconstructionMismatch { x, y, deviation });
            }
        }
    }
    Ok(StochasticKernel::from_matrix_unchecked(rebuilt))
}

/// `Pⁿ` rebuilt from the expansion, checked against the direct power.
pub fn pseudospectral_reconstruct(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    n: usize,
) -> Result<StochasticKernel> {
    let e = PseudospectralExpansion::new(p, pi, n)?;
    verify(e.kernel(), kernel_power(p, n).matrix())
}

/// `P*ⁿ` rebuilt from the expansion, checked against the reversal of `Pⁿ`.
pub fn pseudospectral_reconstruct_reversal(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    n: usize,
) -> Result<StochasticKernel> {
    let e = PseudospectralExpansion::new(p, pi, n)?;
    verify(e.reversal(), &pi_adjoint(kernel_power(p, n).matrix(), pi))
}

/// `Pⁿf` through the expansion.
pub fn expansion_apply(
    p: &StochasticKernel,
    pi: &ProbabilityVector,
    n: usize,
    f: &[f64],
) -> Result<Vec<f64>> {
    PseudospectralExpansion::new(p, pi, n)?.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::stationary_distribution;
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

    #[test]
    fn triangle_reconstructs_p() {
        let (p, pi) = triangle();
        let r = pseudospectral_reconstruct(&p, &pi, 1).unwrap();
        assert!((r.matrix() - p.matrix()).amax() < 1e-12);
    }

    #[test]
    fn triangle_fourth_power() {
        let (p, pi) = triangle();
        let r = pseudospectral_reconstruct(&p, &pi, 4).unwrap();
        let want = DMatrix::from_row_slice(3, 3, &[0.0, 0.5, 0.5, 0.25, 0.25, 0.5, 0.25, 0.5, 0.25]);
        assert!((r.matrix() - want).amax() < 1e-12);
    }

    #[test]
    fn triangle_fifth_reversal() {
        let (p, pi) = triangle();
        let r = pseudospectral_reconstruct_reversal(&p, &pi, 5).unwrap();
        let want = DMatrix::from_row_slice(
            3,
            3,
            &[0.25, 0.5, 0.25, 0.125, 0.5, 0.375, 0.25, 0.25, 0.5],
        );
        assert!((r.matrix() - want).amax() < 1e-12);
    }

    #[test]
    fn apply_matches_columns() {
        let (p, pi) = triangle();
        let out = expansion_apply(&p, &pi, 1, &[1.0, 0.0, 0.0]).unwrap();
        for (g, w) in out.iter().zip([0.0, 0.0, 0.5]) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-12);
        }
        let ones = expansion_apply(&p, &pi, 3, &[1.0; 3]).unwrap();
        for v in ones {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
        assert!(matches!(
            expansion_apply(&p, &pi, 1, &[1.0]),
            Err(MhError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reversible_chain_uses_plain_spectrum() {
        let p = StochasticKernel::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        let e = PseudospectralExpansion::new(&p, &pi, 1).unwrap();
        assert!(e.regions.iter().all(Vec::is_empty));
        assert!((e.kernel() - e.reversal()).amax() < 1e-14);
        assert!((e.kernel() - p.matrix()).amax() < 1e-14);
    }
}

#![allow(dead_code)]

use mhrev::{stationary_distribution, ProbabilityVector, StochasticKernel};
use nalgebra::DMatrix;
use rand::Rng;

/// Random irreducible kernel on `n` states: sparse random weights on top of
/// a guaranteed cycle `x → x+1`.
pub fn random_chain<R: Rng>(rng: &mut R, n: usize, density: f64) -> (StochasticKernel, ProbabilityVector) {
    let mut m = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            if rng.gen::<f64>() < density {
                m[(x, y)] = rng.gen::<f64>();
            }
        }
        m[(x, (x + 1) % n)] += 0.05 + rng.gen::<f64>();
        let s: f64 = m.row(x).sum();
        for y in 0..n {
            m[(x, y)] /= s;
        }
    }
    let p = StochasticKernel::new(m).expect("rows are normalized");
    let pi = stationary_distribution(&p).expect("chain is irreducible");
    (p, pi)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// `⟨f, M f⟩_π`.
pub fn quadratic(m: &DMatrix<f64>, pi: &ProbabilityVector, f: &[f64]) -> f64 {
    let n = f.len();
    (0..n)
        .map(|x| pi[x] * f[x] * (0..n).map(|y| m[(x, y)] * f[y]).sum::<f64>())
        .sum()
}

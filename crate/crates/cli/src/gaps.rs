use std::fmt::Write;

use mhrev::{mh_spectral_gap, GapScanResult, ScanOptions};
use serde::Serialize;

use crate::error::Result;
use crate::model::Chain;
use crate::svg::{line_plot, Series};

#[derive(Debug, Serialize)]
pub struct Row {
    pub k: usize,
    #[serde(rename = "Lambda_M1")]
    pub lambda_m1: f64,
    #[serde(rename = "lambda_M2")]
    pub lambda_m2: f64,
    #[serde(rename = "Lambda_M1_root")]
    pub lambda_m1_root: f64,
    #[serde(rename = "abs_lambda_M2_root")]
    pub abs_lambda_m2_root: f64,
    pub ps_term: f64,
    #[serde(rename = "in_C")]
    pub in_c: bool,
}

#[derive(Debug, Serialize)]
pub struct GapsReport {
    pub states: usize,
    pub n_max: usize,
    pub per_k: Vec<Row>,
    #[serde(rename = "gamma_MH")]
    pub gamma_mh: f64,
    #[serde(rename = "beta_MH")]
    pub beta_mh: f64,
    pub gamma_ps: f64,
    pub ps_argmax: usize,
    pub t_star: usize,
    pub c_complement: Vec<usize>,
    /// False when the scan window may have cut off part of 𝓒ᶜ.
    pub converged: bool,
}

impl GapsReport {
    pub fn new(states: usize, scan: &GapScanResult) -> Self {
        Self {
            states,
            n_max: scan.n_max,
            per_k: scan
                .per_k
                .iter()
                .map(|r| Row {
                    k: r.k,
                    lambda_m1: r.lambda_m1,
                    lambda_m2: r.lambda_m2,
                    lambda_m1_root: r.lambda_m1_root,
                    abs_lambda_m2_root: r.abs_lambda_m2_root,
                    ps_term: r.ps_term,
                    in_c: r.in_c,
                })
                .collect(),
            gamma_mh: scan.gamma_mh,
            beta_mh: scan.beta_mh,
            gamma_ps: scan.gamma_ps,
            ps_argmax: scan.ps_argmax,
            t_star: scan.t_star,
            c_complement: scan.c_complement.clone(),
            converged: scan.converged,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,Lambda_M1_root,abs_lambda_M2_root,ps_term,in_C\n");
        for r in &self.per_k {
            let _ = writeln!(
                out,
                "{},{:?},{:?},{:?},{}",
                r.k, r.lambda_m1_root, r.abs_lambda_m2_root, r.ps_term, r.in_c
            );
        }
        let _ = writeln!(
            out,
            "# gamma_MH={:?},beta_MH={:?},gamma_ps={:?},t_star={},converged={}",
            self.gamma_mh, self.beta_mh, self.gamma_ps, self.t_star, self.converged
        );
        out
    }

    pub fn to_svg(&self, title: &str) -> String {
        let col = |f: fn(&Row) -> f64| self.per_k.iter().map(|r| (r.k as f64, f(r))).collect();
        line_plot(
            title,
            "k",
            "value",
            &[
                Series { name: "Λ(M1(P^k))^(1/k)", points: col(|r| r.lambda_m1_root) },
                Series { name: "|λ(M2(P^k))|^(1/k)", points: col(|r| r.abs_lambda_m2_root) },
                Series { name: "γ(P*^k P^k)/k", points: col(|r| r.ps_term) },
            ],
        )
    }
}

pub fn run(chain: &Chain, n_max: usize, tol: f64) -> Result<GapsReport> {
    let opts = ScanOptions {
        tol,
        ..ScanOptions::with_n_max(n_max)
    };
    let scan = mh_spectral_gap(&chain.kernel, &chain.pi, &opts)?;
    Ok(GapsReport::new(chain.kernel.dim(), &scan))
}

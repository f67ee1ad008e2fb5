//! End-to-end reproduction targets: expected-vs-computed tables and figure
//! series.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use clap::ValueEnum;
use mhrev::bounds::{exact_mixing_profile, vortex_gap_bounds};
use mhrev::kernel::pi_adjoint;
use mhrev::metastability::{metastability_bounds, partition_metastability, Partition};
use mhrev::models::{
    asymmetric_cycle, dhn_sampler, torus_walk, triangle, upward_skip_free, winning_streak,
    BirthDeathSpec, VortexModel,
};
use mhrev::reversiblize::mh_pair;
use mhrev::spectra::{spectrum, weyl_sandwich};
use mhrev::{
    kernel_power, mh_spectral_gap, stationary_distribution, time_reversal, GapScanResult,
    ProbabilityVector, ScanOptions, StochasticKernel,
};
use nalgebra::DMatrix;

use crate::error::Result;
use crate::gaps::GapsReport;
use crate::svg::{line_plot, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Triangle,
    Dhn3,
    Dhn100,
    Ws4,
    Ws50,
    Cycle,
    Torus,
    VortexTable,
    Skipfree,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Triangle => "triangle",
            Target::Dhn3 => "dhn3",
            Target::Dhn100 => "dhn100",
            Target::Ws4 => "ws4",
            Target::Ws50 => "ws50",
            Target::Cycle => "cycle",
            Target::Torus => "torus",
            Target::VortexTable => "vortex-table",
            Target::Skipfree => "skipfree",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub tolerance: String,
    pub pass: bool,
    /// Informational rows never fail the target.
    pub fatal: bool,
}

impl Check {
    fn num(name: impl Into<String>, expected: f64, computed: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            expected: format!("{expected:.10}"),
            computed: format!("{computed:.10}"),
            tolerance: format!("{tol:e}"),
            pass: (computed - expected).abs() <= tol,
            fatal: true,
        }
    }

    fn exact(name: impl Into<String>, expected: String, computed: String) -> Self {
        Self {
            name: name.into(),
            pass: expected == computed,
            expected,
            computed,
            tolerance: "exact".into(),
            fatal: true,
        }
    }

    fn advisory(mut self) -> Self {
        self.fatal = false;
        self
    }

    pub fn ok(&self) -> bool {
        self.pass || !self.fatal
    }

    fn status(&self) -> &'static str {
        match (self.pass, self.fatal) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "WARN",
        }
    }
}

pub struct Outcome {
    pub checks: Vec<Check>,
    /// Extra files, name and contents.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.ok()).collect()
    }

    pub fn table_csv(&self) -> String {
        let mut out = String::from("check,expected,computed,tolerance,status\n");
        for c in &self.checks {
            let _ = writeln!(out, "{},{},{},{},{}", quote(&c.name), c.expected, c.computed, c.tolerance, c.status());
        }
        out
    }

    pub fn table_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let pad = width - c.name.chars().count();
            let _ = writeln!(
                out,
                "{} {}{}  expected {}  computed {}  tol {}",
                c.status(),
                c.name,
                " ".repeat(pad),
                c.expected,
                c.computed,
                c.tolerance
            );
        }
        out
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn max_dev(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

fn mat3(rows: [[f64; 3]; 3]) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |x, y| rows[x][y])
}

fn scan(p: &StochasticKernel, pi: &ProbabilityVector, n_max: usize) -> Result<GapScanResult> {
    Ok(mh_spectral_gap(p, pi, &ScanOptions::with_n_max(n_max))?)
}

fn series_files(stem: &str, title: &str, s: &GapScanResult, states: usize) -> Vec<(String, String)> {
    let report = GapsReport::new(states, s);
    vec![
        (format!("{stem}.csv"), report.to_csv()),
        (format!("{stem}.svg"), report.to_svg(title)),
    ]
}

fn run_triangle() -> Result<Outcome> {
    let p = triangle();
    let pi = stationary_distribution(&p)?;
    let s = scan(&p, &pi, 100)?;
    let closed = 1.0 - (3.0f64 / 8.0).powf(1.0 / 6.0);
    let mut checks = vec![
        Check::num("gamma_ps", 0.25, s.gamma_ps, 1e-9),
        Check::num("gamma_MH (closed form)", closed, s.gamma_mh, 1e-9),
        Check::num("gamma_MH (reference)", 0.151, s.gamma_mh, 1e-3),
        Check::exact("C^c in [1,100]", "[1, 2, 3]".into(), format!("{:?}", s.c_complement)),
    ];

    let p4 = mat3([[0.0, 0.5, 0.5], [0.25, 0.25, 0.5], [0.25, 0.5, 0.25]]);
    let p5 = mat3([[0.25, 0.25, 0.5], [0.25, 0.5, 0.25], [0.125, 0.375, 0.5]]);
    let ps5 = mat3([[0.25, 0.5, 0.25], [0.125, 0.5, 0.375], [0.25, 0.25, 0.5]]);
    let reversal = time_reversal(&p, &pi)?;
    checks.push(Check::num("P^4 max deviation", 0.0, max_dev(kernel_power(&p, 4).matrix(), &p4), 1e-12));
    checks.push(Check::num("P^5 max deviation", 0.0, max_dev(kernel_power(&p, 5).matrix(), &p5), 1e-12));
    checks.push(Check::num("P*^5 max deviation", 0.0, max_dev(kernel_power(&reversal, 5).matrix(), &ps5), 1e-12));
    let printed = [
        (
            mat3([[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.0, 0.5, 0.5]]),
            mat3([[-1.0, 1.0, 1.0], [0.5, -0.5, 1.0], [0.5, 1.0, -0.5]]),
        ),
        (
            DMatrix::identity(3, 3),
            mat3([[-1.0, 1.0, 1.0], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]]),
        ),
        (
            mat3([[1.0, 0.0, 0.0], [0.0, 0.75, 0.25], [0.0, 0.25, 0.75]]),
            mat3([[0.0, 0.5, 0.5], [0.25, 0.25, 0.5], [0.25, 0.5, 0.25]]),
        ),
    ];
    for (i, (w1, w2)) in printed.iter().enumerate() {
        let (m1, m2) = mh_pair(&kernel_power(&p, i + 1), &pi)?;
        checks.push(Check::num(format!("M1(P^{}) max deviation", i + 1), 0.0, max_dev(m1.matrix(), w1), 1e-12));
        checks.push(Check::num(format!("M2(P^{}) max deviation", i + 1), 0.0, max_dev(m2.matrix(), w2), 1e-12));
    }

    // raw per-k extremes against the envelope 2/4^⌊k/4⌋
    let fig = scan(&p, &pi, 40)?;
    let mut csv = String::from("k,Lambda_M1,abs_lambda_M2,envelope\n");
    let mut worst: f64 = f64::NEG_INFINITY;
    for r in &fig.per_k {
        let env = 2.0 / 4f64.powi((r.k / 4) as i32);
        let _ = writeln!(csv, "{},{:?},{:?},{:?}", r.k, r.lambda_m1, r.lambda_m2.abs(), env);
        if r.k >= 8 {
            worst = worst.max(r.lambda_m1.max(r.lambda_m2.abs()) - env);
        }
    }
    checks.push(
        Check {
            name: "envelope 2/4^floor(k/4) max excess, k=8..40".into(),
            expected: "<= 0".into(),
            computed: format!("{worst:.3e}"),
            tolerance: "1e-12".into(),
            pass: worst <= 1e-12,
            fatal: true,
        }
        .advisory(),
    );
    let pts = |f: &dyn Fn(&mhrev::spectra::GapRecord) -> f64| -> Vec<(f64, f64)> {
        fig.per_k.iter().map(|r| (r.k as f64, f(r))).collect()
    };
    let svg = line_plot(
        "Triangle: per-k MH eigenvalues",
        "k",
        "value",
        &[
            Series { name: "Λ(M1(P^k))", points: pts(&|r| r.lambda_m1) },
            Series { name: "|λ(M2(P^k))|", points: pts(&|r| r.lambda_m2.abs()) },
            Series { name: "2/4^⌊k/4⌋", points: pts(&|r| 2.0 / 4f64.powi((r.k / 4) as i32)) },
        ],
    );
    Ok(Outcome {
        checks,
        files: vec![("triangle_fig1.csv".into(), csv), ("triangle_fig1.svg".into(), svg)],
    })
}

fn run_dhn(m: usize) -> Result<Outcome> {
    let p = dhn_sampler(m)?;
    let pi = ProbabilityVector::uniform(2 * m);
    if m == 3 {
        let s = scan(&p, &pi, 100)?;
        return Ok(Outcome {
            checks: vec![
                Check::num("gamma_ps", 0.315, s.gamma_ps, 1e-3),
                Check::num("gamma_MH", 0.270, s.gamma_mh, 1e-3),
            ],
            files: Vec::new(),
        });
    }
    let s = scan(&p, &pi, 500)?;
    Ok(Outcome {
        checks: vec![
            Check::num("beta_MH", 0.999914, s.beta_mh, 5e-6),
            Check::num("gamma_ps", 0.008671, s.gamma_ps, 5e-6),
        ],
        files: series_files("dhn100_fig2", "Non-reversible sampler, m = 100", &s, 2 * m),
    })
}

fn run_ws(m: usize) -> Result<Outcome> {
    let p = winning_streak(m)?;
    let pi = stationary_distribution(&p)?;
    let s = scan(&p, &pi, 100)?;
    if m == 4 {
        return Ok(Outcome {
            checks: vec![
                Check::num("gamma_ps", 0.5, s.gamma_ps, 1e-9),
                Check::num("gamma_MH", 0.138, s.gamma_mh, 1e-3),
            ],
            files: Vec::new(),
        });
    }
    let reversal = time_reversal(&p, &pi)?;
    let profile = exact_mixing_profile(&reversal, &pi, m + 1)?;
    let first_zero = profile.distances.iter().position(|&d| d == 0.0).map(|i| i + 1);
    let r = &s.per_k[m - 1];
    let curve = 1.0 - r.lambda_m1_root.max(r.abs_lambda_m2_root);
    Ok(Outcome {
        checks: vec![
            Check::num("beta_MH", 0.9999, s.beta_mh, 1e-4),
            Check::num("gamma_ps", 0.4961, s.gamma_ps, 1e-3),
            Check::exact("first n with d_P*(n) = 0", format!("{m}"), format!("{first_zero:?}").replace("Some(", "").replace(')', "")),
            Check::exact(format!("MH curve at k = {m}"), "1".into(), format!("{curve}")),
        ],
        files: series_files("ws50_fig3", "Winning streak, m = 50", &s, m + 1),
    })
}

fn cosine_waves(n: usize, d: usize) -> Vec<f64> {
    (0..n.pow(d as u32))
        .map(|mut x| {
            let mut s = 0.0;
            for _ in 0..d {
                s += 1.0 - (2.0 * PI * (x % n) as f64 / n as f64).cos();
                x /= n;
            }
            s / d as f64
        })
        .collect()
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn run_cycle(d: usize) -> Result<Outcome> {
    let p: f64 = 0.7;
    let (lo, hi) = (p.min(1.0 - p), p.max(1.0 - p));
    let mut checks = Vec::new();
    for n in 3..=12 {
        let kernel = if d == 1 { asymmetric_cycle(n, p)? } else { torus_walk(n, d, p)? };
        let pi = ProbabilityVector::uniform(kernel.dim());
        let (m1, m2) = mh_pair(&kernel, &pi)?;
        let additive = (kernel.matrix() + pi_adjoint(kernel.matrix(), &pi)) * 0.5;
        let w = cosine_waves(n, d);
        let dev = max_gap(&spectrum(&additive, &pi)?, &sorted_desc(w.iter().map(|v| 1.0 - v).collect()))
            .max(max_gap(&spectrum(m1.matrix(), &pi)?, &sorted_desc(w.iter().map(|v| 1.0 - 2.0 * lo * v).collect())))
            .max(max_gap(&spectrum(m2.matrix(), &pi)?, &sorted_desc(w.iter().map(|v| 1.0 - 2.0 * hi * v).collect())));
        checks.push(Check::num(format!("n={n}: spectra vs cosine formulas (max deviation)"), 0.0, dev, 1e-10));
        let ws = weyl_sandwich(&kernel, &pi)?;
        checks.push(Check::num(format!("n={n}: Weyl upper bound 1 - L/2 vs gamma"), ws.gamma, ws.gamma_upper, 1e-10));
    }
    Ok(Outcome { checks, files: Vec::new() })
}

fn run_vortex() -> Result<Outcome> {
    let mut checks = Vec::new();
    let sqrt2 = 2f64.sqrt();
    let rows = [
        ("Ehrenfest(4, 1/2)", BirthDeathSpec::Ehrenfest { n: 4, p: 0.5 }, 1.0, 33.0),
        ("M/M/1(1, 2)", BirthDeathSpec::Mm1 { lambda: 1.0, mu: 2.0, trunc: 60 }, 3.0 - 2.0 * sqrt2, 35.0 - 2.0 * sqrt2),
        ("M/M/inf(2)", BirthDeathSpec::MmInf { lambda: 2.0, trunc: 40 }, 1.0, 1.0 + 3.0 * 2f64.exp()),
        ("GWI(1/2, 2)", BirthDeathSpec::Gwi { lambda: 0.5, r: 2.0, trunc: 80 }, 0.5, 26.1),
    ];
    let mut csv = String::from("model,n,table_lower,table_upper,gamma_bd,gamma_exact,tail_mass\n");
    for (name, base, lo, hi) in rows {
        let (l, u) = VortexModel { base, n: 4 }.table_bounds();
        checks.push(Check::num(format!("{name}, n=4: table lower"), lo, l, 1e-12));
        checks.push(Check::num(format!("{name}, n=4: table upper"), hi, u, 1e-12));
        for n in 2..=6 {
            if let BirthDeathSpec::Ehrenfest { n: states, .. } = base {
                if n > states + 1 {
                    continue;
                }
            }
            let b = vortex_gap_bounds(&VortexModel { base, n })?;
            let _ = writeln!(
                csv,
                "{},{n},{:?},{:?},{:?},{:?},{:?}",
                quote(name),
                b.lower,
                b.upper,
                b.gamma_bd,
                b.gamma_exact,
                b.tail_mass
            );
            checks.push(Check {
                name: format!("{name}, n={n}: table lower <= exact gap"),
                expected: format!("<= {:.10}", b.gamma_exact),
                computed: format!("{:.10}", b.lower),
                tolerance: "1e-9".into(),
                pass: b.lower_holds,
                fatal: true,
            });
        }
    }
    for states in 2..=6 {
        for n in 2..=states + 1 {
            let b = vortex_gap_bounds(&VortexModel { base: BirthDeathSpec::Ehrenfest { n: states, p: 0.3 }, n })?;
            checks.push(Check {
                name: format!("Ehrenfest({states}, 0.3), n={n}: table lower <= exact gap"),
                expected: format!("<= {:.10}", b.gamma_exact),
                computed: format!("{:.10}", b.lower),
                tolerance: "1e-9".into(),
                pass: b.lower_holds,
                fatal: true,
            });
        }
    }
    Ok(Outcome {
        checks,
        files: vec![("vortex_bounds.csv".into(), csv)],
    })
}

fn run_skipfree() -> Result<Outcome> {
    let p = upward_skip_free();
    let pi = stationary_distribution(&p)?;
    let mut checks = Vec::new();
    let eig_p = sorted_desc(p.matrix().clone().complex_eigenvalues().iter().map(|c| c.re).collect());
    let (m1, m2) = mh_pair(&p, &pi)?;
    let lists = [
        ("P", eig_p, [1.0, 0.52, 0.25, 0.13]),
        ("M1", spectrum(m1.matrix(), &pi)?, [1.0, 0.74, 0.50, 0.28]),
        ("M2", spectrum(m2.matrix(), &pi)?, [1.0, 0.37, 0.08, -0.16]),
    ];
    for (name, got, want) in lists {
        for (j, (g, w)) in got.iter().zip(want).enumerate() {
            checks.push(Check::num(format!("lambda_{}({name})", j + 1), w, *g, 5e-3));
        }
    }
    let partitions = [
        ("{1,2},{3,4}", vec![vec![0, 1], vec![2, 3]], 1.48),
        ("{1,2,3},{4}", vec![vec![0, 1, 2], vec![3]], 1.28),
    ];
    for (name, blocks, m) in partitions {
        let d = Partition::new(blocks, 4)?;
        checks.push(Check::num(format!("m({name})"), m, partition_metastability(&p, &pi, &d)?, 1e-2));
        let b = metastability_bounds(&p, &pi, &d)?;
        checks.push(Check::num(format!("lower bound, {name}"), 0.89, b.lower, 1e-2));
        checks.push(Check::num(format!("upper bound, {name}"), 1.74, b.upper, 1e-2));
    }
    Ok(Outcome { checks, files: Vec::new() })
}

pub fn run(target: Target) -> Result<Outcome> {
    match target {
        Target::Triangle => run_triangle(),
        Target::Dhn3 => run_dhn(3),
        Target::Dhn100 => run_dhn(100),
        Target::Ws4 => run_ws(4),
        Target::Ws50 => run_ws(50),
        Target::Cycle => run_cycle(1),
        Target::Torus => run_cycle(2),
        Target::VortexTable => run_vortex(),
        Target::Skipfree => run_skipfree(),
    }
}

/// Writes `<target>.csv` and any figure files into `outdir`.
pub fn write(outdir: &Path, target: Target, outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(outdir)?;
    fs::write(outdir.join(format!("{}.csv", target.name())), outcome.table_csv())?;
    for (name, contents) in &outcome.files {
        fs::write(outdir.join(name), contents)?;
    }
    Ok(())
}

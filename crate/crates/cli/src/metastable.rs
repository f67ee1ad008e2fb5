use mhrev::metastability::{
    cheeger_bounds, conductance, conductance_profile, leakage_bounds, metastability_bounds,
    Partition,
};
use mhrev::MhError;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::model::Chain;

#[derive(Debug, Serialize)]
pub struct Metastability {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub lambda_m1: Vec<f64>,
    pub lambda_m2: Vec<f64>,
    pub rho: Vec<f64>,
    pub a: f64,
    pub holds: bool,
}

#[derive(Debug, Serialize)]
pub struct Leakage {
    pub t: usize,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub upper_general: f64,
    pub gamma_a: f64,
    pub a: f64,
    pub split: bool,
    pub holds: bool,
    pub holds_upper: bool,
}

#[derive(Debug, Serialize)]
pub struct Cheeger {
    pub k: usize,
    /// `None` when the state space is past the brute-force cap.
    pub phi_star: Option<f64>,
    pub lower: f64,
    pub upper_root: f64,
}

#[derive(Debug, Serialize)]
pub struct MetastableReport {
    pub partition: Vec<Vec<String>>,
    pub metastability: Metastability,
    pub conductance: Vec<f64>,
    pub leakage: Option<Leakage>,
    pub cheeger: Cheeger,
}

impl MetastableReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let m = &self.metastability;
        let mut rows = vec![
            ("m".to_string(), m.value),
            ("lower".to_string(), m.lower),
            ("upper".to_string(), m.upper),
            ("a".to_string(), m.a),
        ];
        rows.extend(m.rho.iter().enumerate().map(|(j, r)| (format!("rho_{}", j + 1), *r)));
        rows.extend(self.conductance.iter().enumerate().map(|(i, c)| (format!("conductance_{}", i + 1), *c)));
        if let Some(l) = &self.leakage {
            rows.push(("leakage".into(), l.value));
            rows.push(("leakage_lower".into(), l.lower));
            rows.push(("leakage_upper".into(), l.upper));
            rows.push(("leakage_upper_general".into(), l.upper_general));
        }
        if let Some(phi) = self.cheeger.phi_star {
            rows.push(("phi_star".into(), phi));
        }
        rows.push(("cheeger_lower".into(), self.cheeger.lower));
        rows.push(("cheeger_upper_root".into(), self.cheeger.upper_root));
        let mut out = String::from("quantity,value\n");
        for (name, v) in rows {
            out.push_str(&format!("{name},{v:?}\n"));
        }
        out
    }
}

/// Parses `"1,2;3,4"` into blocks of state indices, matching tokens against
/// state names.
pub fn parse_partition(spec: &str, states: &[String]) -> Result<Vec<Vec<usize>>> {
    spec.split(';')
        .map(|block| {
            block
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| {
                    states
                        .iter()
                        .position(|s| s == t)
                        .ok_or_else(|| CliError::Parse(format!("unknown state {t:?} in partition")))
                })
                .collect()
        })
        .collect()
}

pub fn run(chain: &Chain, spec: &str, k: usize, t: usize) -> Result<MetastableReport> {
    let n = chain.kernel.dim();
    let blocks = parse_partition(spec, &chain.states)?;
    let d = Partition::new(blocks, n)?;
    let (p, pi) = (&chain.kernel, &chain.pi);

    let b = metastability_bounds(p, pi, &d)?;
    let conductances = d
        .blocks()
        .iter()
        .map(|a| conductance(p, pi, a))
        .collect::<mhrev::Result<Vec<_>>>()?;
    let leakage = if d.len() >= 2 {
        let l = leakage_bounds(p, pi, &d.blocks()[0], t)?;
        Some(Leakage {
            t,
            value: l.value,
            lower: l.lower,
            upper: l.upper,
            upper_general: l.upper_general,
            gamma_a: l.gamma_a,
            a: l.a,
            split: l.split,
            holds: l.holds,
            holds_upper: l.holds_upper,
        })
    } else {
        None
    };
    let phi_star = match conductance_profile(p, pi, k) {
        Ok(v) => Some(v),
        Err(MhError::TooLarge { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let c = cheeger_bounds(p, pi, k, 1.0)?;

    Ok(MetastableReport {
        partition: d
            .blocks()
            .iter()
            .map(|blk| blk.iter().map(|&x| chain.states[x].clone()).collect())
            .collect(),
        metastability: Metastability {
            value: b.value,
            lower: b.lower,
            upper: b.upper,
            lambda_m1: b.lambda_first,
            lambda_m2: b.lambda_second,
            rho: b.rho,
            a: b.a,
            holds: b.holds,
        },
        conductance: conductances,
        leakage,
        cheeger: Cheeger {
            k,
            phi_star,
            lower: c.lower,
            upper_root: c.upper_root,
        },
    })
}

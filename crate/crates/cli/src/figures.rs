//! Data behind the covariance, histogram and finite-size-gap figures.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bincorr::entropy::{epsilon_sweep, SweepAxis};
use bincorr::moments::{covariance_exact, covariance_histogram, Binning};
use bincorr::{ModelKind, ModelSpec, ModelTemplate};

use crate::{Failure, Outcome};

const RHOS: [f64; 2] = [0.7, 0.95];
const SOURCES: usize = 5;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per rho: the first covariance row of the model.
fn first_row(build: impl Fn(f64) -> bincorr::Result<ModelSpec>) -> Outcome<String> {
    let mut rows = Vec::new();
    for rho in RHOS {
        rows.push((rho, covariance_exact(&build(rho)?)?.row(0).to_vec()));
    }
    let width = rows[0].1.len();
    let mut out = String::from("rho");
    for k in 1..=width {
        let _ = write!(out, ",C_1_{k}");
    }
    out.push('\n');
    for (rho, row) in rows {
        let _ = write!(out, "{rho}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    Ok(out)
}

fn histogram(build: impl Fn(f64) -> bincorr::Result<ModelSpec>) -> Outcome<String> {
    let mut out = String::from("rho,value,count\n");
    for rho in RHOS {
        let h = covariance_histogram(&covariance_exact(&build(rho)?)?, Binning::Distinct)?;
        for b in h.bins {
            let _ = writeln!(out, "{rho},{},{}", b.value, b.count);
        }
    }
    Ok(out)
}

fn gap_vs_n() -> Outcome<String> {
    let ns: Vec<usize> = (2..=20).collect();
    let mut out =
        String::from("rho,N,parallel,parallel_lb,parallel_ub,serial,mixed,mixed_lb,mixed_ub\n");
    for rho in RHOS {
        let axis = SweepAxis::N(ns.clone());
        let par = epsilon_sweep(&ModelTemplate::new(ModelKind::Parallel, rho), &axis)?;
        let ser = epsilon_sweep(&ModelTemplate::new(ModelKind::Serial, rho), &axis)?;
        let mix = epsilon_sweep(&ModelTemplate::new(ModelKind::Mixed, rho).with_m(2), &axis)?;
        for ((p, s), m) in par.iter().zip(&ser).zip(&mix) {
            let _ = writeln!(
                out,
                "{rho},{},{},{},{},{},{},{},{}",
                p.n,
                opt(p.epsilon),
                p.epsilon_lb,
                p.epsilon_ub,
                opt(s.epsilon),
                opt(m.epsilon),
                m.epsilon_lb,
                m.epsilon_ub
            );
        }
    }
    Ok(out)
}

fn gap_vs_m() -> Outcome<String> {
    let ms: Vec<usize> = (1..=10).collect();
    let mut out = String::from("rho,N,M,epsilon,epsilon_lb,epsilon_ub\n");
    for rho in RHOS {
        for n in [10, 50] {
            let t = ModelTemplate::new(ModelKind::Mixed, rho).with_n(n);
            for r in epsilon_sweep(&t, &SweepAxis::M(ms.clone()))? {
                let _ = writeln!(
                    out,
                    "{rho},{n},{},{},{},{}",
                    r.m,
                    opt(r.epsilon),
                    r.epsilon_lb,
                    r.epsilon_ub
                );
            }
        }
    }
    Ok(out)
}

/// All figure files as `(name, contents)`.
pub(crate) fn render() -> Outcome<Vec<(&'static str, String)>> {
    let parallel = |rho| ModelSpec::parallel(vec![rho; SOURCES]);
    let serial = |rho| ModelSpec::serial_constant(SOURCES, rho);
    let mixed = |rho| ModelSpec::mixed(SOURCES, 2, vec![rho; 2 * SOURCES]);
    Ok(vec![
        ("fig2a.csv", first_row(parallel)?),
        ("fig2b.csv", first_row(serial)?),
        ("fig2c.csv", first_row(mixed)?),
        ("fig3a.csv", histogram(parallel)?),
        ("fig3b.csv", histogram(serial)?),
        ("fig4.csv", gap_vs_n()?),
        ("fig5.csv", gap_vs_m()?),
    ])
}

pub(crate) fn write(dir: &Path, files: &[(&str, String)]) -> Outcome<()> {
    let io = |e: std::io::Error, p: &Path| Failure::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| io(e, &path))?;
    }
    Ok(())
}

//! Joint entropy of the source models: exact enumeration, closed forms,
//! bounds through the hidden bit, asymptotic rates, and the finite-size gap
//! `epsilon = H(X)/T - rate` between them.
//!
//! All entropies are in bits.

use std::fmt::Write as _;

use crate::config::DEFAULT_ENUMERATION_CAP;
use crate::enumerate::{self, entropy_term};
use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelSpec, ModelTemplate};

/// `H_b(p) = -p log2 p - (1-p) log2 (1-p)`, exactly 0 at both endpoints.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid_arg(format!(
            "probability {p} is outside [0, 1]"
        )));
    }
    Ok(hb(p))
}

#[inline]
pub(crate) fn hb(p: f64) -> f64 {
    entropy_term(p) + entropy_term(1.0 - p)
}

pub fn joint_entropy_exact(spec: &ModelSpec) -> Result<f64> {
    joint_entropy_exact_capped(spec, DEFAULT_ENUMERATION_CAP)
}

/// `-sum_x P(x) log2 P(x)` over all `2^T` outcomes.
pub fn joint_entropy_exact_capped(spec: &ModelSpec, cap: usize) -> Result<f64> {
    enumerate::check_cap(
        spec.total(),
        cap,
        "use joint_entropy_closed (serial, linear) or the entropy bounds (parallel, mixed)",
    )?;
    Ok(enumerate::sum_outcomes(spec.total(), |x| {
        entropy_term(spec.pmf_word(x))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBounds {
    pub lower: f64,
    pub upper: f64,
}

/// `H(X) = 1 + sum H_b(rho) - H(B|X)` with `0 <= H(B|X) <= H_b(rho_first)`.
fn hidden_bit_bounds(spec: &ModelSpec) -> EntropyBounds {
    let upper = 1.0 + spec.rho().iter().map(|&r| hb(r)).sum::<f64>();
    EntropyBounds {
        lower: upper - hb(spec.rho()[0]),
        upper,
    }
}

/// `1 + sum_{l>=2} H_b(rho_l) <= H(X) <= 1 + sum_l H_b(rho_l)`.
pub fn entropy_bounds_parallel(spec: &ModelSpec) -> Result<EntropyBounds> {
    if spec.kind() != ModelKind::Parallel {
        return Err(Error::invalid_arg(format!(
            "parallel bounds requested for a {} model",
            spec.kind()
        )));
    }
    Ok(hidden_bit_bounds(spec))
}

/// Upper bound `1 + sum_j sum_l H_b(rho_lj)`; the lower bound subtracts
/// `H_b(rho_11)`.
pub fn entropy_bounds_mixed(spec: &ModelSpec) -> Result<EntropyBounds> {
    if spec.kind() != ModelKind::Mixed {
        return Err(Error::invalid_arg(format!(
            "mixed bounds requested for a {} model",
            spec.kind()
        )));
    }
    Ok(hidden_bit_bounds(spec))
}

/// Closed-form joint entropy where one exists: serial `1 + sum_{l>=2}
/// H_b(rho_l)` and linear `sum_l H_b(rho_l)`.
pub fn joint_entropy_closed(spec: &ModelSpec) -> Option<f64> {
    match spec.kind() {
        ModelKind::Serial => Some(1.0 + spec.rho()[1..].iter().map(|&r| hb(r)).sum::<f64>()),
        ModelKind::Linear => Some(spec.rho().iter().map(|&r| hb(r)).sum()),
        ModelKind::Parallel | ModelKind::Mixed => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRate {
    /// Bits per source symbol.
    pub value: f64,
    /// The schedule is not constant, so `value` is the average over the
    /// configured edges rather than a limit.
    pub finite_horizon: bool,
}

/// Limit of `H(X)/T` as the number of sources grows.
///
/// A constant schedule gives `H_b(rho)` exactly, for every model. Otherwise
/// the average of `H_b` over the configured edges is reported with the
/// `finite_horizon` label; the serial model skips its vestigial first edge.
pub fn asymptotic_rate(spec: &ModelSpec) -> AsymptoticRate {
    if let Some(r) = spec.constant_rho() {
        return AsymptoticRate {
            value: hb(r),
            finite_horizon: false,
        };
    }
    let edges = match spec.kind() {
        ModelKind::Serial => &spec.rho()[1..],
        _ => spec.rho(),
    };
    AsymptoticRate {
        value: edges.iter().map(|&r| hb(r)).sum::<f64>() / edges.len() as f64,
        finite_horizon: true,
    }
}

/// Finite-size gap and its envelope for one spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonPoint {
    pub epsilon: Option<f64>,
    pub epsilon_lb: f64,
    pub epsilon_ub: f64,
}

fn epsilon_point(spec: &ModelSpec, exact: Option<f64>, rate: f64) -> EpsilonPoint {
    let t = spec.total() as f64;
    match joint_entropy_closed(spec) {
        Some(closed) => {
            let eps = closed / t - rate;
            EpsilonPoint {
                epsilon: Some(eps),
                epsilon_lb: eps,
                epsilon_ub: eps,
            }
        }
        None => EpsilonPoint {
            epsilon: exact.map(|h| h / t - rate),
            // the edge-entropy sum in each bound cancels against the rate
            epsilon_lb: (1.0 - hb(spec.rho()[0])) / t,
            epsilon_ub: 1.0 / t,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    /// By enumeration, when the source count is within the cap.
    pub exact: Option<f64>,
    pub closed_form: Option<f64>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `exact / T`.
    pub rate: Option<f64>,
    pub asymptotic_rate: f64,
    pub finite_horizon: bool,
    /// `rate - asymptotic_rate`, from the closed form or enumeration.
    pub epsilon: Option<f64>,
}

pub fn entropy_report(spec: &ModelSpec) -> Result<EntropyReport> {
    entropy_report_capped(spec, DEFAULT_ENUMERATION_CAP)
}

pub fn entropy_report_capped(spec: &ModelSpec, cap: usize) -> Result<EntropyReport> {
    let exact = match joint_entropy_exact_capped(spec, cap) {
        Ok(h) => Some(h),
        Err(Error::EnumerationCap { .. }) => None,
        Err(e) => return Err(e),
    };
    let closed_form = joint_entropy_closed(spec);
    let bounds = match (spec.kind(), closed_form) {
        (ModelKind::Parallel, _) => entropy_bounds_parallel(spec)?,
        (ModelKind::Mixed, _) => entropy_bounds_mixed(spec)?,
        (_, Some(h)) => EntropyBounds { lower: h, upper: h },
        (_, None) => unreachable!("serial and linear models have closed forms"),
    };
    let asym = asymptotic_rate(spec);
    let point = epsilon_point(spec, exact, asym.value);
    Ok(EntropyReport {
        exact,
        closed_form,
        lower_bound: bounds.lower,
        upper_bound: bounds.upper,
        rate: exact.map(|h| h / spec.total() as f64),
        asymptotic_rate: asym.value,
        finite_horizon: asym.finite_horizon,
        epsilon: point.epsilon,
    })
}

/// Which dimension an epsilon sweep varies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepAxis {
    /// Sources per chain; chains fixed at the template's `m`.
    N(Vec<usize>),
    /// Chains; sources per chain fixed at the template's `n`.
    M(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonRow {
    pub model: ModelKind,
    pub rho: f64,
    pub n: usize,
    pub m: usize,
    /// Exact gap; absent for parallel and mixed models beyond the cap.
    pub epsilon: Option<f64>,
    pub epsilon_lb: f64,
    pub epsilon_ub: f64,
}

pub fn epsilon_sweep(template: &ModelTemplate, axis: &SweepAxis) -> Result<Vec<EpsilonRow>> {
    epsilon_sweep_capped(template, axis, DEFAULT_ENUMERATION_CAP)
}

pub fn epsilon_sweep_capped(
    template: &ModelTemplate,
    axis: &SweepAxis,
    cap: usize,
) -> Result<Vec<EpsilonRow>> {
    let sizes: Vec<(usize, usize)> = match axis {
        SweepAxis::N(ns) => ns.iter().map(|&n| (n, template.m)).collect(),
        SweepAxis::M(ms) => {
            if template.kind != ModelKind::Mixed {
                return Err(Error::invalid_arg("only mixed models can sweep over M"));
            }
            ms.iter().map(|&m| (template.n, m)).collect()
        }
    };
    sizes
        .into_iter()
        .map(|(n, m)| {
            let spec = template.instantiate(n, m)?;
            let exact = if joint_entropy_closed(&spec).is_none() && spec.total() <= cap {
                Some(joint_entropy_exact_capped(&spec, cap)?)
            } else {
                None
            };
            let p = epsilon_point(&spec, exact, asymptotic_rate(&spec).value);
            Ok(EpsilonRow {
                model: spec.kind(),
                rho: template.rho,
                n,
                m: spec.m(),
                epsilon: p.epsilon,
                epsilon_lb: p.epsilon_lb,
                epsilon_ub: p.epsilon_ub,
            })
        })
        .collect()
}

/// CSV with header `model,rho,N,M,epsilon,epsilon_lb,epsilon_ub`; a missing
/// exact gap is an empty field.
pub fn epsilon_csv(rows: &[EpsilonRow]) -> String {
    let mut out = String::from("model,rho,N,M,epsilon,epsilon_lb,epsilon_ub\n");
    for r in rows {
        let eps = r.epsilon.map(|e| e.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.model, r.rho, r.n, r.m, eps, r.epsilon_lb, r.epsilon_ub
        );
    }
    out
}

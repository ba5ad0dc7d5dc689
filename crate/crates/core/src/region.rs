//! Achievable region of orthogonal multiple access with correlated sources.
//!
//! The region is the set of per-source capacities `lambda` with
//! `sum_{l in S} lambda_l >= r H(X(S) | X(S^c))` for every non-empty subset
//! `S`. Conditional entropies come from exact marginalization of the PMF.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{DEFAULT_ENUMERATION_CAP, TOLERANCES};
use crate::entropy::asymptotic_rate;
use crate::enumerate::{self, entropy_term};
use crate::error::{Error, Result};
use crate::model::{ModelSpec, ModelTemplate};

/// Default size limit for sweeps over all `2^T - 1` subsets; each subset
/// marginalizes the full `2^T` table.
pub const ALL_SUBSETS_CAP: usize = 12;

/// A set of source indices (0-based), stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SourceSet(u64);

impl SourceSet {
    pub const EMPTY: SourceSet = SourceSet(0);

    pub fn from_mask(mask: u64) -> Self {
        SourceSet(mask)
    }

    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &i in indices {
            if i >= 64 {
                return Err(Error::invalid_arg(format!(
                    "source index {i} is out of range"
                )));
            }
            mask |= 1 << i;
        }
        Ok(SourceSet(mask))
    }

    pub fn full(total: usize) -> Self {
        SourceSet(if total >= 64 {
            u64::MAX
        } else {
            (1u64 << total) - 1
        })
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && (self.0 >> i) & 1 == 1
    }

    pub fn is_subset_of(self, other: SourceSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn complement(self, total: usize) -> SourceSet {
        SourceSet(!self.0 & SourceSet::full(total).0)
    }

    pub fn indices(self) -> Vec<usize> {
        (0..64).filter(|&i| self.contains(i)).collect()
    }

    /// 1-based indices, as written in exported documents.
    pub fn labels(self) -> Vec<usize> {
        self.indices().into_iter().map(|i| i + 1).collect()
    }
}

impl fmt::Debug for SourceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.indices()).finish()
    }
}

fn check_subset(spec: &ModelSpec, s: SourceSet) -> Result<()> {
    if s.is_empty() {
        return Err(Error::invalid_arg("subset must be non-empty"));
    }
    if !s.is_subset_of(SourceSet::full(spec.total())) {
        return Err(Error::invalid_arg(format!(
            "subset {s:?} names sources beyond the model's {}",
            spec.total()
        )));
    }
    Ok(())
}

/// `H(X(T))` from a PMF table, summing out the sources outside `T`.
fn marginal_entropy(table: &[f64], keep: u64) -> f64 {
    if keep == 0 {
        return 0.0;
    }
    let mut buckets = vec![0.0; table.len()];
    for (x, &p) in table.iter().enumerate() {
        buckets[x & keep as usize] += p;
    }
    buckets.iter().map(|&p| entropy_term(p)).sum()
}

/// Marginal entropies `H(X(T))` for every subset `T`, indexed by mask.
#[derive(Debug, Clone)]
pub struct SubsetEntropies {
    total: usize,
    by_mask: Vec<f64>,
}

impl SubsetEntropies {
    pub fn compute(spec: &ModelSpec) -> Result<Self> {
        Self::compute_capped(spec, ALL_SUBSETS_CAP)
    }

    pub fn compute_capped(spec: &ModelSpec, cap: usize) -> Result<Self> {
        enumerate::check_cap(
            spec.total(),
            cap,
            "subset sweeps are exponential in the source count",
        )?;
        let table = spec.pmf_table(cap)?;
        let by_mask = (0..1u64 << spec.total())
            .into_par_iter()
            .map(|t| marginal_entropy(&table, t))
            .collect();
        Ok(Self {
            total: spec.total(),
            by_mask,
        })
    }

    pub fn joint(&self) -> f64 {
        self.by_mask[self.by_mask.len() - 1]
    }

    pub fn marginal(&self, t: SourceSet) -> f64 {
        self.by_mask[t.mask() as usize]
    }

    /// `H(X(S) | X(S^c)) = H(X) - H(X(S^c))`.
    pub fn conditional(&self, s: SourceSet) -> f64 {
        self.joint() - self.marginal(s.complement(self.total))
    }
}

/// `H(X(S) | X(S^c))` for one subset.
pub fn subset_conditional_entropy(spec: &ModelSpec, s: SourceSet) -> Result<f64> {
    subset_conditional_entropy_capped(spec, s, DEFAULT_ENUMERATION_CAP)
}

pub fn subset_conditional_entropy_capped(
    spec: &ModelSpec,
    s: SourceSet,
    cap: usize,
) -> Result<f64> {
    check_subset(spec, s)?;
    let table = spec.pmf_table(cap)?;
    let all = SourceSet::full(spec.total());
    Ok(marginal_entropy(&table, all.mask())
        - marginal_entropy(&table, s.complement(spec.total()).mask()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionConstraint {
    pub subset: SourceSet,
    /// `r H(X(S) | X(S^c))`.
    pub bound: f64,
}

/// One constraint per non-empty subset, ordered by bitmask.
pub fn region_constraints(spec: &ModelSpec, r: f64) -> Result<Vec<RegionConstraint>> {
    region_constraints_capped(spec, r, ALL_SUBSETS_CAP)
}

pub fn region_constraints_capped(
    spec: &ModelSpec,
    r: f64,
    cap: usize,
) -> Result<Vec<RegionConstraint>> {
    check_rate(r)?;
    let h = SubsetEntropies::compute_capped(spec, cap)?;
    Ok((1..1u64 << spec.total())
        .map(SourceSet::from_mask)
        .map(|s| RegionConstraint {
            subset: s,
            bound: r * h.conditional(s),
        })
        .collect())
}

fn check_rate(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid_arg(format!(
            "code rate must be positive, got {r}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub inside: bool,
    /// Subsets whose constraint fails, ordered by bitmask.
    pub violated: Vec<SourceSet>,
}

/// Tests a capacity vector against every constraint (non-strict, with the
/// region slack).
pub fn membership(spec: &ModelSpec, r: f64, lambdas: &[f64]) -> Result<Membership> {
    if lambdas.len() != spec.total() {
        return Err(Error::invalid_arg(format!(
            "expected {} capacities, got {}",
            spec.total(),
            lambdas.len()
        )));
    }
    if let Some(bad) = lambdas.iter().find(|l| l.is_nan() || **l < 0.0) {
        return Err(Error::invalid_arg(format!(
            "capacities must be non-negative, got {bad}"
        )));
    }
    let constraints = region_constraints(spec, r)?;
    Ok(membership_against(&constraints, lambdas))
}

pub fn membership_against(constraints: &[RegionConstraint], lambdas: &[f64]) -> Membership {
    let violated: Vec<SourceSet> = constraints
        .iter()
        .filter(|c| {
            let sum: f64 = c.subset.indices().into_iter().map(|i| lambdas[i]).sum();
            sum < c.bound - TOLERANCES.region_slack
        })
        .map(|c| c.subset)
        .collect();
    Membership {
        inside: violated.is_empty(),
        violated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicPoints {
    /// `r H(X) / T`.
    pub lambda_bal: f64,
    /// `r H(X_k | all other sources)`, with `k` the last source by default.
    pub lambda_unb: f64,
    /// `r` times the asymptotic rate.
    pub lambda_lim: f64,
    pub rate_r: f64,
}

pub fn characteristic_points(spec: &ModelSpec, r: f64) -> Result<CharacteristicPoints> {
    characteristic_points_at(spec, r, spec.total() - 1)
}

/// As [`characteristic_points`], constraining source `unbalanced` (0-based).
pub fn characteristic_points_at(
    spec: &ModelSpec,
    r: f64,
    unbalanced: usize,
) -> Result<CharacteristicPoints> {
    check_rate(r)?;
    if unbalanced >= spec.total() {
        return Err(Error::invalid_arg(format!(
            "source {unbalanced} does not exist"
        )));
    }
    let table = spec.pmf_table(DEFAULT_ENUMERATION_CAP)?;
    let all = SourceSet::full(spec.total());
    let joint = marginal_entropy(&table, all.mask());
    let rest = marginal_entropy(&table, all.mask() & !(1u64 << unbalanced));
    Ok(CharacteristicPoints {
        lambda_bal: r * joint / spec.total() as f64,
        lambda_unb: r * (joint - rest),
        lambda_lim: r * asymptotic_rate(spec).value,
        rate_r: r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub lambda_bal: f64,
    pub lambda_unb: f64,
    pub lambda_lim: f64,
    pub gap_bal: f64,
    pub gap_unb: f64,
}

/// Characteristic points of the template at each `n` (chains fixed at the
/// template's `m`).
pub fn convergence_to_limit(
    template: &ModelTemplate,
    r: f64,
    n_values: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    n_values
        .iter()
        .map(|&n| {
            let spec = template.instantiate(n, template.m)?;
            let p = characteristic_points(&spec, r)?;
            Ok(ConvergenceRow {
                n,
                lambda_bal: p.lambda_bal,
                lambda_unb: p.lambda_unb,
                lambda_lim: p.lambda_lim,
                gap_bal: (p.lambda_bal - p.lambda_lim).abs(),
                gap_unb: (p.lambda_unb - p.lambda_lim).abs(),
            })
        })
        .collect()
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("N,lambda_bal,lambda_unb,lambda_lim,gap_bal,gap_unb\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n, r.lambda_bal, r.lambda_unb, r.lambda_lim, r.gap_bal, r.gap_unb
        ));
    }
    out
}

#[derive(Serialize)]
struct ConstraintDoc {
    subset: Vec<usize>,
    bound: f64,
}

#[derive(Serialize)]
struct RegionDoc {
    r: f64,
    constraints: Vec<ConstraintDoc>,
    lambda_bal: f64,
    lambda_unb: f64,
    lambda_lim: f64,
}

/// `{"r", "constraints": [{"subset": [1-based indices], "bound"}],
/// "lambda_bal", "lambda_unb", "lambda_lim"}`.
pub fn region_json(
    constraints: &[RegionConstraint],
    points: &CharacteristicPoints,
) -> serde_json::Value {
    let doc = RegionDoc {
        r: points.rate_r,
        constraints: constraints
            .iter()
            .map(|c| ConstraintDoc {
                subset: c.subset.labels(),
                bound: c.bound,
            })
            .collect(),
        lambda_bal: points.lambda_bal,
        lambda_unb: points.lambda_unb,
        lambda_lim: points.lambda_lim,
    };
    serde_json::to_value(doc).expect("region documents always serialize")
}

//! Second-order statistics: exact and empirical covariance matrices,
//! their structure, and value histograms.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::config::{DEFAULT_ENUMERATION_CAP, TOLERANCES};
use crate::enumerate::{self, pairwise_sum};
use crate::error::{Error, Result};
use crate::model::{cascade_flip_prob, ModelKind, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Structure {
    pub symmetric: bool,
    pub toeplitz: bool,
    /// Only evaluated when the chain layout `(n, m)` is known.
    pub block_toeplitz: bool,
}

/// A real `dim x dim` covariance matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    dim: usize,
    entries: Vec<f64>,
    structure: Structure,
}

impl CovarianceMatrix {
    pub fn from_entries(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::invalid_arg(format!(
                "a {dim}x{dim} matrix needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let mut c = Self {
            dim,
            entries,
            structure: Structure::default(),
        };
        c.structure = c.detect_structure(None);
        Ok(c)
    }

    /// Re-evaluates the structure flags knowing the mixed-model layout.
    pub fn with_layout(mut self, n: usize, m: usize) -> Self {
        self.structure = self.detect_structure(Some((n, m)));
        self
    }

    fn detect_structure(&self, layout: Option<(usize, usize)>) -> Structure {
        let tol = TOLERANCES.structural;
        let d = self.dim;
        let symmetric =
            (0..d).all(|i| (0..i).all(|k| (self.get(i, k) - self.get(k, i)).abs() <= tol));
        let toeplitz =
            (1..d).all(|i| (1..d).all(|k| (self.get(i, k) - self.get(i - 1, k - 1)).abs() <= tol));
        let block_toeplitz = layout
            .and_then(|(n, m)| mixed_block_structure(self, n, m).ok())
            .is_some_and(|r| r.max_deviation <= tol);
        Structure {
            symmetric,
            toeplitz,
            block_toeplitz,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.entries[i * self.dim + k]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn max_abs_diff(&self, other: &CovarianceMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "matrices must share a dimension");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Row-major CSV with shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim {
            let line: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Closed-form covariance (enumeration for the linear model).
pub fn covariance_exact(spec: &ModelSpec) -> Result<CovarianceMatrix> {
    covariance_exact_capped(spec, DEFAULT_ENUMERATION_CAP)
}

pub fn covariance_exact_capped(spec: &ModelSpec, cap: usize) -> Result<CovarianceMatrix> {
    let d = spec.total();
    let c = match spec.kind() {
        ModelKind::Parallel => {
            let rho = spec.rho();
            let mut e = vec![0.0; d * d];
            for i in 0..d {
                for k in 0..d {
                    e[i * d + k] = if i == k {
                        0.25
                    } else {
                        0.5 * (rho[i] * rho[k] + (1.0 - rho[i]) * (1.0 - rho[k])) - 0.25
                    };
                }
            }
            CovarianceMatrix::from_entries(d, e)?
        }
        ModelKind::Serial | ModelKind::Mixed => {
            chain_covariance(spec)?.with_layout(spec.n(), spec.m())
        }
        ModelKind::Linear => linear_covariance(spec, cap)?,
    };
    Ok(c)
}

fn chain_covariance(spec: &ModelSpec) -> Result<CovarianceMatrix> {
    let (n, m) = (spec.n(), spec.m());
    let d = spec.total();
    // P(Z'_{lj} = 0) from the source bit to source l of chain j
    let mut reach = vec![0.0; d];
    for j in 0..m {
        for l in 0..n {
            let chain: Vec<f64> = (0..=l).map(|i| spec.rho_at(i, j)).collect();
            reach[j * n + l] = cascade_flip_prob(&chain)?;
        }
    }
    let mut e = vec![0.0; d * d];
    for i in 0..d {
        let (l1, j1) = (i % n, i / n);
        for k in 0..d {
            let (l2, j2) = (k % n, k / n);
            e[i * d + k] = if i == k {
                0.25
            } else if j1 == j2 {
                let (lo, hi) = (l1.min(l2), l1.max(l2));
                let prod: f64 = (lo + 1..=hi)
                    .map(|l| 2.0 * spec.rho_at(l, j1) - 1.0)
                    .product();
                0.25 * (1.0 + prod) - 0.25
            } else {
                let (p, q) = (reach[i], reach[k]);
                0.5 * (p * q + (1.0 - p) * (1.0 - q)) - 0.25
            };
        }
    }
    CovarianceMatrix::from_entries(d, e)
}

/// Linear model: `E[X X^T]` summed over every noise pattern `z`, with
/// `x = A^{-1} z`.
fn linear_covariance(spec: &ModelSpec, cap: usize) -> Result<CovarianceMatrix> {
    let d = spec.total();
    enumerate::check_cap(d, cap, "use covariance_empirical for large linear models")?;
    let a_inv = spec
        .inverse_matrix()
        .expect("linear model carries its inverse");
    let rho = spec.rho();
    const CHUNK: u64 = 1 << 12;
    let total = 1u64 << d;
    let partials: Vec<Vec<f64>> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; d * d];
            for z in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let p: f64 = (0..d)
                    .map(|l| {
                        if (z >> l) & 1 == 1 {
                            1.0 - rho[l]
                        } else {
                            rho[l]
                        }
                    })
                    .product();
                if p == 0.0 {
                    continue;
                }
                let x = a_inv.matvec_word(z);
                for i in (0..d).filter(|i| (x >> i) & 1 == 1) {
                    for k in (i..d).filter(|k| (x >> k) & 1 == 1) {
                        acc[i * d + k] += p;
                    }
                }
            }
            acc
        })
        .collect();
    let mut r = vec![0.0; d * d];
    let mut column = vec![0.0; partials.len()];
    for idx in 0..d * d {
        for (slot, part) in column.iter_mut().zip(&partials) {
            *slot = part[idx];
        }
        r[idx] = pairwise_sum(&column);
    }
    let mut e = vec![0.0; d * d];
    for i in 0..d {
        for k in i..d {
            let v = r[i * d + k] - r[i * d + i] * r[k * d + k];
            e[i * d + k] = v;
            e[k * d + i] = v;
        }
    }
    CovarianceMatrix::from_entries(d, e)
}

/// Sample covariance (1/samples normalization) from `samples` seeded draws.
pub fn covariance_empirical(
    spec: &ModelSpec,
    samples: usize,
    seed: u64,
) -> Result<CovarianceMatrix> {
    if samples < 2 {
        return Err(Error::invalid_arg(
            "empirical covariance needs at least 2 samples",
        ));
    }
    let d = spec.total();
    // upper-triangular co-occurrence counts; the diagonal holds the ones count
    let blocks = spec.sample_fold(
        seed,
        samples,
        || vec![0u64; d * d],
        |acc, x| {
            let ones: Vec<usize> = (0..d).filter(|&i| x.get(i)).collect();
            for (a, &i) in ones.iter().enumerate() {
                for &k in &ones[a..] {
                    acc[i * d + k] += 1;
                }
            }
        },
    );
    let mut counts = vec![0u64; d * d];
    for b in blocks {
        for (c, v) in counts.iter_mut().zip(b) {
            *c += v;
        }
    }
    let s = samples as f64;
    let mut e = vec![0.0; d * d];
    for i in 0..d {
        for k in i..d {
            let v = counts[i * d + k] as f64 / s
                - (counts[i * d + i] as f64 / s) * (counts[k * d + k] as f64 / s);
            e[i * d + k] = v;
            e[k * d + i] = v;
        }
    }
    CovarianceMatrix::from_entries(d, e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binning {
    /// One bar per distinct value (merged within the structural tolerance).
    Distinct,
    /// Equal-width bins spanning `[min, max]`.
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    /// Distinct value, or bin center for fixed-width bins.
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistinctValue {
    pub value: f64,
    pub count: usize,
    pub on_diagonal: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
    pub distinct: Vec<DistinctValue>,
}

impl Histogram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,count\n");
        for b in &self.bins {
            let _ = writeln!(out, "{},{}", b.value, b.count);
        }
        out
    }
}

/// Histogram of all matrix entries, with a distinct-value summary.
pub fn covariance_histogram(c: &CovarianceMatrix, binning: Binning) -> Result<Histogram> {
    let tol = TOLERANCES.structural;
    let d = c.dim();
    let mut values: Vec<(f64, bool)> = (0..d)
        .flat_map(|i| (0..d).map(move |k| (i, k)))
        .map(|(i, k)| (c.get(i, k), i == k))
        .collect();
    values.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut distinct: Vec<DistinctValue> = Vec::new();
    for &(v, diag) in &values {
        match distinct.last_mut() {
            Some(last) if (v - last.value).abs() <= tol => {
                last.count += 1;
                last.on_diagonal += usize::from(diag);
            }
            _ => distinct.push(DistinctValue {
                value: v,
                count: 1,
                on_diagonal: usize::from(diag),
            }),
        }
    }

    let bins = match binning {
        Binning::Distinct => distinct
            .iter()
            .map(|g| HistogramBin {
                value: g.value,
                lower: g.value,
                upper: g.value,
                count: g.count,
            })
            .collect(),
        Binning::Fixed(0) => return Err(Error::invalid_arg("histogram needs at least one bin")),
        Binning::Fixed(k) => {
            let (lo, hi) = (values[0].0, values[values.len() - 1].0);
            let width = (hi - lo) / k as f64;
            let mut counts = vec![0usize; k];
            for &(v, _) in &values {
                let idx = if width > 0.0 {
                    ((v - lo) / width) as usize
                } else {
                    0
                };
                counts[idx.min(k - 1)] += 1;
            }
            counts
                .into_iter()
                .enumerate()
                .map(|(b, count)| {
                    let lower = lo + width * b as f64;
                    let upper = if b + 1 == k {
                        hi
                    } else {
                        lo + width * (b + 1) as f64
                    };
                    HistogramBin {
                        value: 0.5 * (lower + upper),
                        lower,
                        upper,
                        count,
                    }
                })
                .collect()
        }
    };
    Ok(Histogram { bins, distinct })
}

/// Blocks `C_1 .. C_M` of a mixed-model covariance, read from the first
/// block row, and how far the full matrix strays from the block-Toeplitz
/// form `block(i, j) = C_{j-i+1}` (transposed below the diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub n: usize,
    pub m: usize,
    /// `blocks[s]` is the `n x n` block for chain separation `s`, row-major.
    pub blocks: Vec<Vec<f64>>,
    pub max_deviation: f64,
}

pub fn mixed_block_structure(c: &CovarianceMatrix, n: usize, m: usize) -> Result<BlockReport> {
    if n == 0 || m == 0 || c.dim() != n * m {
        return Err(Error::DimensionMismatch {
            op: "mixed_block_structure",
            left_rows: c.dim(),
            left_cols: c.dim(),
            right_rows: n * m,
            right_cols: n * m,
        });
    }
    let blocks: Vec<Vec<f64>> = (0..m)
        .map(|s| {
            (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .map(|(a, b)| c.get(a, s * n + b))
                .collect()
        })
        .collect();
    let mut max_deviation: f64 = 0.0;
    for bi in 0..m {
        for bj in 0..m {
            let s = bi.abs_diff(bj);
            for a in 0..n {
                for b in 0..n {
                    let want = if bj >= bi {
                        blocks[s][a * n + b]
                    } else {
                        blocks[s][b * n + a]
                    };
                    let got = c.get(bi * n + a, bj * n + b);
                    max_deviation = max_deviation.max((want - got).abs());
                }
            }
        }
    }
    Ok(BlockReport {
        n,
        m,
        blocks,
        max_deviation,
    })
}

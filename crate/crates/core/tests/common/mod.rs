//! Independent reference computations for the integration tests.
//!
//! Everything here works from the PMF table or from first principles, never
//! from the closed forms under test.

#![allow(dead_code)]

use bincorr::gf2::build_recursive_matrix;
use bincorr::{BitMatrix, BitVector, ModelSpec, SourceRealization};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// PMF of every outcome through the public `pmf` entry point.
pub fn pmf_by_outcome(spec: &ModelSpec) -> Vec<f64> {
    let t = spec.total();
    (0..1u64 << t)
        .map(|w| {
            let x = SourceRealization(BitVector::from_word(t, w).unwrap());
            spec.pmf(&x).unwrap()
        })
        .collect()
}

/// `C_ik = P(X_i = X_k = 1) - P(X_i = 1) P(X_k = 1)` by enumeration.
pub fn covariance_by_enumeration(spec: &ModelSpec) -> Vec<f64> {
    let t = spec.total();
    let pmf = pmf_by_outcome(spec);
    let mut r = vec![0.0; t * t];
    for (x, &p) in pmf.iter().enumerate() {
        for i in 0..t {
            if (x >> i) & 1 == 0 {
                continue;
            }
            for k in 0..t {
                if (x >> k) & 1 == 1 {
                    r[i * t + k] += p;
                }
            }
        }
    }
    let mut c = vec![0.0; t * t];
    for i in 0..t {
        for k in 0..t {
            c[i * t + k] = r[i * t + k] - r[i * t + i] * r[k * t + k];
        }
    }
    c
}

pub fn entropy_of(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

pub fn hb(p: f64) -> f64 {
    entropy_of([p, 1.0 - p])
}

/// Marginal PMF over the sources in `keep`, keyed by the masked outcome.
pub fn marginal(pmf: &[f64], keep: usize) -> Vec<f64> {
    let mut m = vec![0.0; pmf.len()];
    for (x, &p) in pmf.iter().enumerate() {
        m[x & keep] += p;
    }
    m
}

/// `H(X(S) | X(S^c)) = -sum_x p(x) log2 p(x_S | x_{S^c})`, straight from the
/// definition.
pub fn conditional_entropy_direct(pmf: &[f64], s: usize, total: usize) -> f64 {
    let sc = !s & ((1usize << total) - 1);
    let given = marginal(pmf, sc);
    pmf.iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(x, &p)| -p * (p / given[x & sc]).log2())
        .sum()
}

/// Random recursive matrix with depth `depth` and independent taps per row.
pub fn random_recursive(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> BitMatrix {
    let taps: Vec<Vec<bool>> = (0..n)
        .map(|row| (0..depth.min(row)).map(|_| rng.gen()).collect())
        .collect();
    build_recursive_matrix(n, depth, &taps).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> BitMatrix {
    let rows: Vec<Vec<bool>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen()).collect())
        .collect();
    BitMatrix::from_rows(&rows).unwrap()
}

/// Determinant over GF(2) by cofactor expansion along the first row.
/// Exponential; intended for `n <= 7`.
pub fn determinant_by_expansion(a: &BitMatrix) -> bool {
    fn det(rows: &[Vec<bool>]) -> bool {
        let n = rows.len();
        if n == 1 {
            return rows[0][0];
        }
        let mut acc = false;
        for j in 0..n {
            if !rows[0][j] {
                continue;
            }
            let minor: Vec<Vec<bool>> = rows[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != j)
                        .map(|(_, &v)| v)
                        .collect()
                })
                .collect();
            acc ^= det(&minor);
        }
        acc
    }
    let rows: Vec<Vec<bool>> = (0..a.rows())
        .map(|i| (0..a.cols()).map(|j| a.get(i, j)).collect())
        .collect();
    det(&rows)
}

pub fn random_rho(rng: &mut ChaCha8Rng, n: usize, lo: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..=1.0)).collect()
}

//! Exhaustive enumeration over all `2^bits` outcomes with a reduction order
//! that does not depend on the thread count.

use rayon::prelude::*;

use crate::config::MAX_ENUMERATION_BITS;
use crate::error::{Error, Result};

/// Outcomes per leaf of the reduction tree.
const CHUNK: u64 = 1 << 12;

pub(crate) fn check_cap(bits: usize, cap: usize, alternative: &'static str) -> Result<()> {
    let cap = cap.min(MAX_ENUMERATION_BITS);
    if bits > cap {
        Err(Error::EnumerationCap {
            bits,
            cap,
            alternative,
        })
    } else {
        Ok(())
    }
}

/// Pairwise sum with a fixed tree shape.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// `sum_{x < 2^bits} f(x)`: sequential within fixed-size chunks, pairwise
/// across chunks. Bit-identical for any rayon pool size.
pub(crate) fn sum_outcomes<F>(bits: usize, f: F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    let total = 1u64 << bits;
    let chunks = total.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(total);
            (c * CHUNK..end).map(&f).sum()
        })
        .collect();
    pairwise_sum(&partial)
}

/// Evaluates `f` on every outcome, in outcome order.
pub(crate) fn table<F>(bits: usize, f: F) -> Vec<f64>
where
    F: Fn(u64) -> f64 + Sync,
{
    (0..1u64 << bits).into_par_iter().map(&f).collect()
}

/// `-p log2 p`, with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn entropy_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

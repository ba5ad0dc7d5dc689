//! The four binary correlation models and their exact PMFs.
//!
//! * **parallel**: `X_l = B xor Z_l`, one BSC per source fed by a hidden
//!   equiprobable bit `B`.
//! * **serial**: a cascade of BSCs, `X_1 = B xor Z_1`, `X_l = X_{l-1} xor Z_l`.
//!   The first BSC has no effect on the distribution of `X` and defaults to
//!   a pass-through (`rho_1 = 1`).
//! * **mixed**: `M` serial chains of `N` BSCs, all fed by `B`. Sources are
//!   flattened chain-major: source `l` of chain `j` (both 0-based) sits at
//!   index `j * N + l`.
//! * **linear**: `A X = Z` over GF(2) with independent `Z_l`, `P(Z_l = 0) =
//!   rho_l`, and invertible `A`.
//!
//! Every `rho` is the probability that the corresponding BSC (or `Z_l`)
//! leaves its input unchanged.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumerate;
use crate::error::{Error, Result};
use crate::gf2::{build_recursive_toeplitz, BitMatrix, BitVector};

/// Largest linear model whose marginals are checked at construction.
pub const MARGINAL_CHECK_BITS: usize = 12;

/// Realizations per random stream; block `k` uses ChaCha stream `k`.
pub const SAMPLE_BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Parallel,
    Serial,
    Mixed,
    Linear,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Parallel,
        ModelKind::Serial,
        ModelKind::Mixed,
        ModelKind::Linear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Parallel => "parallel",
            ModelKind::Serial => "serial",
            ModelKind::Mixed => "mixed",
            ModelKind::Linear => "linear",
        }
    }

    /// Models driven by the hidden common bit through BSCs.
    pub fn is_bsc(self) -> bool {
        self != ModelKind::Linear
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid_spec(format!("unknown model kind {s:?}")))
    }
}

/// One realization of all sources, flattened as described in the module docs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceRealization(pub BitVector);

impl SourceRealization {
    pub fn bits(&self) -> &BitVector {
        &self.0
    }
}

impl From<BitVector> for SourceRealization {
    fn from(bits: BitVector) -> Self {
        SourceRealization(bits)
    }
}

impl FromStr for SourceRealization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(SourceRealization(s.parse()?))
    }
}

impl fmt::Display for SourceRealization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A validated correlation model. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDoc", into = "ModelDoc")]
pub struct ModelSpec {
    kind: ModelKind,
    n: usize,
    m: usize,
    rho: Vec<f64>,
    a: Option<BitMatrix>,
    a_inv: Option<BitMatrix>,
    uniform_marginals: Option<bool>,
}

fn check_rho(rho: &[f64], lo: f64, what: &str) -> Result<()> {
    for (i, &r) in rho.iter().enumerate() {
        if !(lo..=1.0).contains(&r) {
            return Err(Error::invalid_spec(format!(
                "{what} rho[{i}] = {r} is outside [{lo}, 1]"
            )));
        }
    }
    Ok(())
}

impl ModelSpec {
    fn bsc(kind: ModelKind, n: usize, m: usize, rho: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::invalid_spec("model needs at least one source"));
        }
        if rho.len() != n * m {
            return Err(Error::invalid_spec(format!(
                "{kind} model with n={n}, m={m} needs {} rho values, got {}",
                n * m,
                rho.len()
            )));
        }
        check_rho(&rho, 0.5, kind.name())?;
        Ok(Self {
            kind,
            n,
            m,
            rho,
            a: None,
            a_inv: None,
            uniform_marginals: Some(true),
        })
    }

    pub fn parallel(rho: Vec<f64>) -> Result<Self> {
        Self::bsc(ModelKind::Parallel, rho.len(), 1, rho)
    }

    /// Serial cascade; `rho[0]` is the vestigial first BSC.
    pub fn serial(rho: Vec<f64>) -> Result<Self> {
        Self::bsc(ModelKind::Serial, rho.len(), 1, rho)
    }

    /// Serial cascade of `n` sources with every effective edge at `rho`
    /// and a pass-through first BSC.
    pub fn serial_constant(n: usize, rho: f64) -> Result<Self> {
        let mut r = vec![rho; n];
        if let Some(first) = r.first_mut() {
            *first = 1.0;
        }
        Self::serial(r)
    }

    /// `m` chains of `n` sources; `rho` is chain-major (`rho[j * n + l]`).
    pub fn mixed(n: usize, m: usize, rho: Vec<f64>) -> Result<Self> {
        Self::bsc(ModelKind::Mixed, n, m, rho)
    }

    pub fn linear(a: BitMatrix, rho: Vec<f64>) -> Result<Self> {
        let n = rho.len();
        if n == 0 {
            return Err(Error::invalid_spec("model needs at least one source"));
        }
        if a.rows() != n || a.cols() != n {
            return Err(Error::invalid_spec(format!(
                "linear model with {n} sources needs a {n}x{n} matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        check_rho(&rho, 0.0, "linear")?;
        let a_inv = a
            .invert()?
            .ok_or_else(|| Error::invalid_spec("matrix A is singular over GF(2)"))?;
        let mut spec = Self {
            kind: ModelKind::Linear,
            n,
            m: 1,
            rho,
            a: Some(a),
            a_inv: Some(a_inv),
            uniform_marginals: None,
        };
        if n <= MARGINAL_CHECK_BITS {
            let marginals = spec.marginals()?;
            spec.uniform_marginals = Some(marginals.iter().all(|&p| (p - 0.5).abs() <= 1e-12));
        }
        Ok(spec)
    }

    /// Linear model reproducing the serial cascade: `X_1 = Z_1`,
    /// `X_l = X_{l-1} xor Z_l`, with `rho_1 = 1/2`.
    pub fn linear_serial_equivalent(n: usize, rho: f64) -> Result<Self> {
        let a = build_recursive_toeplitz(n, &[true])?;
        let mut r = vec![rho; n];
        r[0] = 0.5;
        Self::linear(a, r)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Sources per chain.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of chains; 1 unless mixed.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of sources, `n * m`.
    pub fn total(&self) -> usize {
        self.n * self.m
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// `rho` of BSC `l` on chain `j` (0-based).
    pub fn rho_at(&self, l: usize, j: usize) -> f64 {
        self.rho[j * self.n + l]
    }

    pub fn matrix(&self) -> Option<&BitMatrix> {
        self.a.as_ref()
    }

    pub fn inverse_matrix(&self) -> Option<&BitMatrix> {
        self.a_inv.as_ref()
    }

    /// `Some(true)` when every `P(X_i = 1)` is exactly 1/2. Always true for
    /// the BSC models; for the linear model it is computed at construction
    /// when `n <= 12` and `None` above that.
    pub fn uniform_marginals(&self) -> Option<bool> {
        self.uniform_marginals
    }

    /// The common `rho` of the edges that shape the distribution, if they
    /// all agree. Serial and linear models ignore the first edge, which
    /// only affects a finite prefix of the schedule.
    pub fn constant_rho(&self) -> Option<f64> {
        let edges = match self.kind {
            ModelKind::Parallel | ModelKind::Mixed => &self.rho[..],
            ModelKind::Serial | ModelKind::Linear if self.n == 1 => &self.rho[..],
            ModelKind::Serial | ModelKind::Linear => &self.rho[1..],
        };
        let first = edges[0];
        edges.iter().all(|&r| r == first).then_some(first)
    }

    fn check_len(&self, x: &BitVector) -> Result<()> {
        if x.len() != self.total() {
            return Err(Error::invalid_arg(format!(
                "realization has {} bits but the model has {} sources",
                x.len(),
                self.total()
            )));
        }
        Ok(())
    }

    #[inline]
    fn edge(rho: f64, agree: bool) -> f64 {
        if agree {
            rho
        } else {
            1.0 - rho
        }
    }

    /// `P(X = x | B = b)` for the BSC models.
    fn conditional_with(&self, bit: impl Fn(usize) -> bool, b: bool) -> f64 {
        match self.kind {
            ModelKind::Parallel => (0..self.n)
                .map(|l| Self::edge(self.rho[l], bit(l) == b))
                .product(),
            ModelKind::Serial | ModelKind::Mixed => {
                let mut p = 1.0;
                for j in 0..self.m {
                    let base = j * self.n;
                    p *= Self::edge(self.rho[base], bit(base) == b);
                    for l in 1..self.n {
                        p *= Self::edge(self.rho[base + l], bit(base + l) == bit(base + l - 1));
                    }
                }
                p
            }
            ModelKind::Linear => unreachable!("linear model has no hidden bit"),
        }
    }

    fn pmf_with(&self, bit: impl Fn(usize) -> bool) -> f64 {
        match self.kind {
            ModelKind::Parallel | ModelKind::Mixed => {
                0.5 * (self.conditional_with(&bit, false) + self.conditional_with(&bit, true))
            }
            ModelKind::Serial => {
                0.5 * (1..self.n)
                    .map(|l| Self::edge(self.rho[l], bit(l) == bit(l - 1)))
                    .product::<f64>()
            }
            ModelKind::Linear => unreachable!("linear pmf goes through P_Z(Ax)"),
        }
    }

    fn pmf_of_noise(&self, z: impl Fn(usize) -> bool) -> f64 {
        (0..self.n)
            .map(|l| Self::edge(self.rho[l], !z(l)))
            .product()
    }

    /// Exact joint probability `P(X = x)`.
    pub fn pmf(&self, x: &SourceRealization) -> Result<f64> {
        let x = x.bits();
        self.check_len(x)?;
        if let Some(w) = x.as_word() {
            return Ok(self.pmf_word(w));
        }
        Ok(match &self.a {
            Some(a) => {
                let z = a.matvec(x)?;
                self.pmf_of_noise(|l| z.get(l))
            }
            None => self.pmf_with(|i| x.get(i)),
        })
    }

    /// `pmf` with the realization packed in a word (`total() <= 64`).
    pub(crate) fn pmf_word(&self, x: u64) -> f64 {
        match &self.a {
            Some(a) => {
                let z = a.matvec_word(x);
                self.pmf_of_noise(|l| (z >> l) & 1 == 1)
            }
            None => self.pmf_with(|i| (x >> i) & 1 == 1),
        }
    }

    /// `P(X = x | B = b)`. The linear model has no hidden bit.
    pub fn conditional_pmf(&self, x: &SourceRealization, b: bool) -> Result<f64> {
        if self.kind == ModelKind::Linear {
            return Err(Error::Unsupported(
                "the linear model has no hidden common bit to condition on".into(),
            ));
        }
        let x = x.bits();
        self.check_len(x)?;
        Ok(self.conditional_with(|i| x.get(i), b))
    }

    /// Full PMF table indexed by outcome word (bit `i` = source `i`).
    pub fn pmf_table(&self, cap: usize) -> Result<Vec<f64>> {
        enumerate::check_cap(self.total(), cap, "sample the model instead")?;
        Ok(enumerate::table(self.total(), |x| self.pmf_word(x)))
    }

    /// `P(X_i = 1)` for every source, by enumeration.
    pub fn marginals(&self) -> Result<Vec<f64>> {
        let bits = self.total();
        enumerate::check_cap(
            bits,
            crate::config::DEFAULT_ENUMERATION_CAP,
            "marginals need enumeration",
        )?;
        let table = enumerate::table(bits, |x| self.pmf_word(x));
        Ok((0..bits)
            .map(|i| {
                let ones: Vec<f64> = table
                    .iter()
                    .enumerate()
                    .filter(|(x, _)| (x >> i) & 1 == 1)
                    .map(|(_, &p)| p)
                    .collect();
                enumerate::pairwise_sum(&ones)
            })
            .collect())
    }

    #[inline]
    fn flip(rng: &mut ChaCha8Rng, rho: f64) -> bool {
        rng.gen_bool(1.0 - rho)
    }

    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut BitVector, scratch: &mut BitVector) {
        match self.kind {
            ModelKind::Parallel => {
                let b: bool = rng.gen();
                for l in 0..self.n {
                    out.set(l, b ^ Self::flip(rng, self.rho[l]));
                }
            }
            ModelKind::Serial | ModelKind::Mixed => {
                let b: bool = rng.gen();
                for j in 0..self.m {
                    let mut prev = b;
                    for l in 0..self.n {
                        let i = j * self.n + l;
                        prev ^= Self::flip(rng, self.rho[i]);
                        out.set(i, prev);
                    }
                }
            }
            ModelKind::Linear => {
                for l in 0..self.n {
                    scratch.set(l, Self::flip(rng, self.rho[l]));
                }
                let a_inv = self
                    .a_inv
                    .as_ref()
                    .expect("linear model carries its inverse");
                *out = a_inv
                    .matvec(scratch)
                    .expect("dimensions checked at construction");
            }
        }
    }

    /// Folds `count` realizations drawn from `seed`, one accumulator per
    /// block of [`SAMPLE_BLOCK`] realizations, returned in block order.
    ///
    /// Realization `i` always comes from stream `i / SAMPLE_BLOCK` at offset
    /// `i % SAMPLE_BLOCK`, so the result does not depend on how blocks are
    /// scheduled across threads.
    pub fn sample_fold<A, I, F>(&self, seed: u64, count: usize, init: I, fold: F) -> Vec<A>
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, &BitVector) + Sync,
    {
        let blocks = count.div_ceil(SAMPLE_BLOCK);
        (0..blocks)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                let mut acc = init();
                let mut x = BitVector::zeros(self.total()).expect("total >= 1");
                let mut scratch = BitVector::zeros(self.n).expect("n >= 1");
                let len = SAMPLE_BLOCK.min(count - k * SAMPLE_BLOCK);
                for _ in 0..len {
                    self.draw(&mut rng, &mut x, &mut scratch);
                    fold(&mut acc, &x);
                }
                acc
            })
            .collect()
    }

    /// `count` i.i.d. realizations, reproducible from `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<SourceRealization> {
        self.sample_fold(seed, count, Vec::new, |v, x| {
            v.push(SourceRealization(x.clone()))
        })
        .into_iter()
        .flatten()
        .collect()
    }

    /// Histogram of sampled outcomes indexed by outcome word.
    pub fn outcome_counts(&self, seed: u64, count: usize, cap: usize) -> Result<Vec<u64>> {
        enumerate::check_cap(
            self.total(),
            cap,
            "outcome histograms need one bin per outcome",
        )?;
        let size = 1usize << self.total();
        let blocks = self.sample_fold(
            seed,
            count,
            || vec![0u64; size],
            |h, x| h[x.as_word().expect("total <= cap") as usize] += 1,
        );
        let mut counts = vec![0u64; size];
        for block in blocks {
            for (c, b) in counts.iter_mut().zip(block) {
                *c += b;
            }
        }
        Ok(counts)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        doc.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents always serialize")
    }
}

/// `P(Z' = 0)` for the XOR of independent `Z_i` with `P(Z_i = 0) = rho_i`:
/// `(1 + prod(2 rho_i - 1)) / 2`.
pub fn cascade_flip_prob(rhos: &[f64]) -> Result<f64> {
    if rhos.is_empty() {
        return Err(Error::invalid_arg("cascade needs at least one BSC"));
    }
    check_rho(rhos, 0.0, "cascade").map_err(|e| Error::invalid_arg(e.to_string()))?;
    Ok(0.5 * (1.0 + rhos.iter().map(|r| 2.0 * r - 1.0).product::<f64>()))
}

/// On-disk form of a [`ModelSpec`].
///
/// ```json
/// {"kind": "mixed", "n": 3, "m": 2, "rho": [[1.0, 0.7, 0.7], [0.9, 0.7, 0.7]]}
/// {"kind": "linear", "n": 3, "rho": [0.5, 0.7, 0.7], "A": ["100", "110", "011"]}
/// ```
///
/// `rho` may be a scalar (constant schedule; a serial model keeps its first
/// BSC at 1), a vector of `n * m` values (chain-major for mixed), or, for
/// mixed models, an `m x n` matrix with one row per chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub kind: ModelKind,
    pub n: usize,
    #[serde(default = "one")]
    pub m: usize,
    pub rho: RhoDoc,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<String>>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoDoc {
    Scalar(f64),
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

impl TryFrom<ModelDoc> for ModelSpec {
    type Error = Error;

    fn try_from(doc: ModelDoc) -> Result<Self> {
        let ModelDoc { kind, n, m, rho, a } = doc;
        if kind != ModelKind::Mixed && m != 1 {
            return Err(Error::invalid_spec(format!(
                "{kind} model must have m = 1, got {m}"
            )));
        }
        if kind != ModelKind::Linear && a.is_some() {
            return Err(Error::invalid_spec(format!(
                "{kind} model takes no matrix A"
            )));
        }
        let total = n * m;
        let rho = match rho {
            RhoDoc::Scalar(r) => {
                let mut v = vec![r; total];
                if kind == ModelKind::Serial && total > 0 {
                    v[0] = 1.0;
                }
                v
            }
            RhoDoc::Vector(v) => v,
            RhoDoc::Matrix(rows) => {
                if kind != ModelKind::Mixed {
                    return Err(Error::invalid_spec("only mixed models take a rho matrix"));
                }
                if rows.len() != m || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::invalid_spec(format!(
                        "rho matrix must have {m} rows of {n} values"
                    )));
                }
                rows.concat()
            }
        };
        if rho.len() != total {
            return Err(Error::invalid_spec(format!(
                "expected {total} rho values, got {}",
                rho.len()
            )));
        }
        match kind {
            ModelKind::Parallel => ModelSpec::parallel(rho),
            ModelKind::Serial => ModelSpec::serial(rho),
            ModelKind::Mixed => ModelSpec::mixed(n, m, rho),
            ModelKind::Linear => {
                let rows = a.ok_or_else(|| Error::invalid_spec("linear model needs a matrix A"))?;
                let a = BitMatrix::from_row_strings(&rows)
                    .map_err(|e| Error::invalid_spec(e.to_string()))?;
                ModelSpec::linear(a, rho)
            }
        }
    }
}

impl From<ModelSpec> for ModelDoc {
    fn from(spec: ModelSpec) -> Self {
        let rho = if spec.kind == ModelKind::Mixed {
            RhoDoc::Matrix(spec.rho.chunks(spec.n).map(<[f64]>::to_vec).collect())
        } else {
            RhoDoc::Vector(spec.rho.clone())
        };
        ModelDoc {
            kind: spec.kind,
            n: spec.n,
            m: spec.m,
            rho,
            a: spec.a.as_ref().map(BitMatrix::to_row_strings),
        }
    }
}

/// A constant-`rho` model description that can be instantiated at any size,
/// for sweeps over `N` or `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTemplate {
    pub kind: ModelKind,
    pub rho: f64,
    /// First edge of serial and linear models (ignored otherwise).
    pub rho_first: f64,
    /// Recursive taps of the linear model, nearest lag first.
    pub taps: Vec<bool>,
    /// Sources per chain, used when sweeping over `M`.
    pub n: usize,
    /// Chains, used when sweeping over `N`.
    pub m: usize,
}

impl ModelTemplate {
    pub fn new(kind: ModelKind, rho: f64) -> Self {
        Self {
            kind,
            rho,
            rho_first: match kind {
                ModelKind::Serial => 1.0,
                _ => rho,
            },
            taps: vec![true],
            n: 1,
            m: if kind == ModelKind::Mixed { 2 } else { 1 },
        }
    }

    pub fn with_rho_first(mut self, rho_first: f64) -> Self {
        self.rho_first = rho_first;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_taps(mut self, taps: Vec<bool>) -> Self {
        self.taps = taps;
        self
    }

    /// Recovers a template from a constant-`rho` spec. Linear specs must use
    /// a lower-triangular Toeplitz matrix with unit diagonal.
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let rho = spec
            .constant_rho()
            .ok_or_else(|| Error::invalid_spec("sweeps need a constant-rho template spec"))?;
        let mut t = Self::new(spec.kind(), rho)
            .with_n(spec.n())
            .with_m(spec.m())
            .with_rho_first(spec.rho()[0]);
        if let Some(a) = spec.matrix() {
            if !(a.is_unit_lower_triangular() && a.is_toeplitz()) {
                return Err(Error::invalid_spec(
                    "linear sweep templates need a recursive (lower-triangular Toeplitz) matrix",
                ));
            }
            let mut taps: Vec<bool> = (1..a.rows()).map(|i| a.get(i, 0)).collect();
            while taps.last() == Some(&false) {
                taps.pop();
            }
            t.taps = taps;
        }
        Ok(t)
    }

    /// The model with `n` sources per chain and `m` chains.
    pub fn instantiate(&self, n: usize, m: usize) -> Result<ModelSpec> {
        if n == 0 {
            return Err(Error::invalid_spec("model needs at least one source"));
        }
        let first_then_rho = || {
            let mut v = vec![self.rho; n];
            v[0] = self.rho_first;
            v
        };
        match self.kind {
            ModelKind::Parallel => ModelSpec::parallel(vec![self.rho; n]),
            ModelKind::Serial => ModelSpec::serial(first_then_rho()),
            ModelKind::Mixed => ModelSpec::mixed(n, m, vec![self.rho; n * m]),
            ModelKind::Linear => {
                ModelSpec::linear(build_recursive_toeplitz(n, &self.taps)?, first_then_rho())
            }
        }
    }
}

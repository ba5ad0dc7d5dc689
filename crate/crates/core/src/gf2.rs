//! Dense linear algebra over GF(2).
//!
//! Rows are packed into `u64` words, least significant bit first, so that
//! row additions are word-wise XORs and inner products are parity of a
//! popcount. The module also builds the structured matrices used by the
//! linear correlation model: banded lower-triangular recursive matrices,
//! circulant matrices with a run of `d` ones, and Toeplitz matrices.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A packed vector of bits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid_arg("bit vector length must be at least 1"));
        }
        Ok(Self {
            len,
            words: vec![0; words_for(len)],
        })
    }

    pub fn from_bools(bits: &[bool]) -> Result<Self> {
        let mut v = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        Ok(v)
    }

    /// Builds a vector of `len <= 64` bits from the low bits of `word`;
    /// bit `i` of the word becomes entry `i`.
    pub fn from_word(len: usize, word: u64) -> Result<Self> {
        if len == 0 || len > WORD_BITS {
            return Err(Error::invalid_arg(format!(
                "from_word needs 1 <= len <= 64, got {len}"
            )));
        }
        let mut v = Self::zeros(len)?;
        v.assign_word(word);
        Ok(v)
    }

    /// Overwrites the first word, masking off bits beyond `len`.
    pub(crate) fn assign_word(&mut self, word: u64) {
        self.words[0] = if self.len >= WORD_BITS {
            word
        } else {
            word & ((1u64 << self.len) - 1)
        };
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    /// The bits as a single word, if they fit.
    pub fn as_word(&self) -> Option<u64> {
        (self.len <= WORD_BITS).then(|| self.words[0])
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                op: "xor",
                left_rows: self.len,
                left_cols: 1,
                right_rows: other.len,
                right_cols: 1,
            });
        }
        Ok(BitVector {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }
}

impl fmt::Display for BitVector {
    /// Entry 0 first, as a string of `0`/`1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid_arg(format!(
                    "bit string may only contain 0 and 1, found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        BitVector::from_bools(&bits)
    }
}

/// A dense matrix over GF(2), stored row-major with packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid_arg(format!(
                "matrix dimensions must be at least 1, got {rows}x{cols}"
            )));
        }
        let stride = words_for(cols);
        Ok(Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, true);
        }
        Ok(m)
    }

    /// Builds a matrix from rows of booleans; all rows must share a length.
    pub fn from_rows<R: AsRef<[bool]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::invalid_arg(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (j, &b) in row.iter().enumerate() {
                m.set(i, j, b);
            }
        }
        Ok(m)
    }

    /// Parses rows written as bit strings, e.g. `["100", "110", "011"]`.
    pub fn from_row_strings<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| {
                r.as_ref()
                    .parse::<BitVector>()
                    .map(|v| v.iter().collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&parsed)
    }

    pub fn to_row_strings(&self) -> Vec<String> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| if self.get(i, j) { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of range"
        );
        (self.data[i * self.stride + j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of range"
        );
        let w = &mut self.data[i * self.stride + j / WORD_BITS];
        let mask = 1u64 << (j % WORD_BITS);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    /// Row `i` as a word, valid when `cols <= 64`.
    #[inline]
    pub(crate) fn row_word(&self, i: usize) -> u64 {
        self.data[i * self.stride]
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let s = self.stride;
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&lo[src * s..src * s + s], &mut hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&hi[..s], &mut lo[dst * s..dst * s + s])
        };
        for (d, x) in b.iter_mut().zip(a) {
            *d ^= *x;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    /// Matrix-vector product over GF(2).
    pub fn matvec(&self, x: &BitVector) -> Result<BitVector> {
        if self.cols != x.len() {
            return Err(Error::DimensionMismatch {
                op: "matvec",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: x.len(),
                right_cols: 1,
            });
        }
        let mut out = BitVector::zeros(self.rows)?;
        for i in 0..self.rows {
            let parity = self
                .row(i)
                .iter()
                .zip(x.words())
                .fold(0u32, |acc, (r, v)| acc ^ (r & v).count_ones())
                & 1;
            out.set(i, parity == 1);
        }
        Ok(out)
    }

    /// `self · x` for `cols <= 64`, with both operands as words.
    #[inline]
    pub(crate) fn matvec_word(&self, x: u64) -> u64 {
        debug_assert!(self.cols <= WORD_BITS);
        let mut out = 0u64;
        for i in 0..self.rows {
            out |= u64::from((self.row_word(i) & x).count_ones() & 1) << i;
        }
        out
    }

    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "mul",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols)?;
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.get(i, k) {
                    let s = out.stride;
                    let dst = &mut out.data[i * s..(i + 1) * s];
                    for (d, x) in dst.iter_mut().zip(other.row(k)) {
                        *d ^= *x;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows).expect("non-empty dimensions");
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    out.set(j, i, true);
                }
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == (i == j)))
    }

    /// True when every entry above the diagonal is zero and the diagonal is
    /// all ones.
    pub fn is_unit_lower_triangular(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| self.get(i, i) && (i + 1..self.cols).all(|j| !self.get(i, j)))
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Determinant over GF(2), by forward elimination.
    pub fn determinant(&self) -> Result<bool> {
        self.require_square()?;
        let mut m = self.clone();
        let n = m.rows;
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| m.get(r, col)) else {
                return Ok(false);
            };
            m.swap_rows(col, pivot);
            for r in col + 1..n {
                if m.get(r, col) {
                    m.xor_row_into(col, r);
                }
            }
        }
        Ok(true)
    }

    /// Gauss-Jordan inverse. `Ok(None)` means the matrix is singular.
    pub fn invert(&self) -> Result<Option<BitMatrix>> {
        self.require_square()?;
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = BitMatrix::identity(n)?;
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| m.get(r, col)) else {
                return Ok(None);
            };
            m.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            for r in 0..n {
                if r != col && m.get(r, col) {
                    m.xor_row_into(col, r);
                    inv.xor_row_into(col, r);
                }
            }
        }
        Ok(Some(inv))
    }

    /// True when the matrix is constant along every diagonal.
    pub fn is_toeplitz(&self) -> bool {
        (1..self.rows).all(|i| (1..self.cols).all(|j| self.get(i, j) == self.get(i - 1, j - 1)))
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.to_row_strings() {
            writeln!(f, "  {row}")?;
        }
        write!(f, "]")
    }
}

/// Banded lower-triangular matrix of the recursive filter
/// `X_l = Z_l xor sum_i A[l][l-i] X_{l-i}` with depth `depth`.
///
/// `taps[l]` lists the sub-diagonal coefficients of row `l`, nearest first:
/// `taps[l][i-1]` is `A[l][l-i]`. Row `l` (0-based) may carry at most
/// `min(depth, l)` taps; shorter lists are zero-padded.
pub fn build_recursive_matrix(n: usize, depth: usize, taps: &[Vec<bool>]) -> Result<BitMatrix> {
    if depth == 0 {
        return Err(Error::invalid_arg("recursion depth must be at least 1"));
    }
    if taps.len() > n {
        return Err(Error::invalid_arg(format!(
            "taps given for {} rows but the matrix has {n}",
            taps.len()
        )));
    }
    let mut a = BitMatrix::identity(n)?;
    for (row, row_taps) in taps.iter().enumerate() {
        let band = depth.min(row);
        if row_taps.len() > band && row_taps[band..].iter().any(|&t| t) {
            return Err(Error::invalid_arg(format!(
                "row {row} has a tap outside its band of width {band}"
            )));
        }
        for (i, &t) in row_taps.iter().take(band).enumerate() {
            a.set(row, row - (i + 1), t);
        }
    }
    Ok(a)
}

/// Recursive matrix whose taps are the same in every row (lower-triangular
/// Toeplitz). `taps[i-1]` is the coefficient at lag `i`.
pub fn build_recursive_toeplitz(n: usize, taps: &[bool]) -> Result<BitMatrix> {
    let depth = taps.len().max(1);
    let rows: Vec<Vec<bool>> = (0..n)
        .map(|row| taps[..taps.len().min(row)].to_vec())
        .collect();
    build_recursive_matrix(n, depth, &rows)
}

/// Circulant matrix whose row `l` has ones at columns `l, ..., l+d-1 (mod n)`.
pub fn build_circulant(n: usize, d: usize) -> Result<BitMatrix> {
    if d == 0 || d > n {
        return Err(Error::invalid_arg(format!(
            "circulant needs 1 <= d <= n, got d={d}, n={n}"
        )));
    }
    let mut a = BitMatrix::zeros(n, n)?;
    for row in 0..n {
        for k in 0..d {
            a.set(row, (row + k) % n, true);
        }
    }
    Ok(a)
}

/// Toeplitz matrix from its `2n-1` diagonals: entry `(i, j)` is
/// `diagonals[i + n - 1 - j]`, so `diagonals[n-1]` is the main diagonal and
/// larger indices lie below it.
pub fn build_toeplitz(n: usize, diagonals: &[bool]) -> Result<BitMatrix> {
    if n == 0 || diagonals.len() != 2 * n - 1 {
        return Err(Error::invalid_arg(format!(
            "a size-{n} Toeplitz matrix needs {} diagonals, got {}",
            (2 * n).saturating_sub(1),
            diagonals.len()
        )));
    }
    let mut a = BitMatrix::zeros(n, n)?;
    for i in 0..n {
        for j in 0..n {
            a.set(i, j, diagonals[i + n - 1 - j]);
        }
    }
    Ok(a)
}

fn is_prime(d: usize) -> bool {
    d >= 2
        && (2..)
            .take_while(|k| k * k <= d)
            .all(|k| !d.is_multiple_of(k))
}

/// Closed-form invertibility of [`build_circulant`]`(n, d)` for prime `d`:
/// the determinant is 0 when `d | n` and `d mod 2` otherwise. Returns `None`
/// for non-prime `d`, where no closed form is available.
pub fn circulant_invertible_predicted(n: usize, d: usize) -> Option<bool> {
    if !is_prime(d) || d > n {
        return None;
    }
    Some(!n.is_multiple_of(d) && d % 2 == 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CirculantVerdict {
    Invertible,
    /// `d` divides `n`.
    SingularDivides,
    /// `d = 2`, which is never invertible.
    SingularEven,
    /// Non-prime `d`; decided by elimination only.
    SingularByElimination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CirculantCheck {
    pub n: usize,
    pub d: usize,
    pub predicted: Option<bool>,
    pub eliminated: bool,
    pub verdict: CirculantVerdict,
}

impl CirculantCheck {
    /// Whether the closed form, when it applies, agrees with elimination.
    pub fn consistent(&self) -> bool {
        self.predicted.is_none_or(|p| p == self.eliminated)
    }
}

impl fmt::Display for CirculantVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CirculantVerdict::Invertible => "invertible",
            CirculantVerdict::SingularDivides => "singular: d divides N",
            CirculantVerdict::SingularEven => "singular: d is even",
            CirculantVerdict::SingularByElimination => "singular: determinant is 0",
        })
    }
}

/// Decides invertibility of the `(n, d)` circulant both ways.
pub fn check_circulant(n: usize, d: usize) -> Result<CirculantCheck> {
    let a = build_circulant(n, d)?;
    let eliminated = a.determinant()?;
    let predicted = circulant_invertible_predicted(n, d);
    let verdict = if eliminated {
        CirculantVerdict::Invertible
    } else if predicted.is_some() && n.is_multiple_of(d) {
        CirculantVerdict::SingularDivides
    } else if predicted.is_some() && d.is_multiple_of(2) {
        CirculantVerdict::SingularEven
    } else {
        CirculantVerdict::SingularByElimination
    };
    Ok(CirculantCheck {
        n,
        d,
        predicted,
        eliminated,
        verdict,
    })
}

/// Populations at most this large are counted exhaustively instead of sampled.
const TOEPLITZ_CENSUS_LIMIT: u64 = 64;

/// Estimates the fraction of non-singular `n x n` binary Toeplitz matrices,
/// drawing the `2n-1` diagonals uniformly. Sizes whose whole population
/// fits in [`TOEPLITZ_CENSUS_LIMIT`] are counted exactly.
pub fn toeplitz_nonsingular_fraction(n: usize, trials: usize, seed: u64) -> Result<f64> {
    if n == 0 || trials == 0 {
        return Err(Error::invalid_arg(
            "toeplitz fraction needs n >= 1 and trials >= 1",
        ));
    }
    let ndiag = 2 * n - 1;
    if ndiag < 64 && (1u64 << ndiag) <= TOEPLITZ_CENSUS_LIMIT {
        return toeplitz_nonsingular_fraction_exhaustive(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut diagonals = vec![false; ndiag];
    let mut nonsingular = 0usize;
    for _ in 0..trials {
        for d in diagonals.iter_mut() {
            *d = rng.gen();
        }
        if build_toeplitz(n, &diagonals)?.determinant()? {
            nonsingular += 1;
        }
    }
    Ok(nonsingular as f64 / trials as f64)
}

/// Exact fraction over all `2^(2n-1)` Toeplitz matrices; `n <= 12`.
pub fn toeplitz_nonsingular_fraction_exhaustive(n: usize) -> Result<f64> {
    if n == 0 || n > 12 {
        return Err(Error::invalid_arg(format!(
            "exhaustive Toeplitz census needs 1 <= n <= 12, got {n}"
        )));
    }
    let ndiag = 2 * n - 1;
    let total = 1u64 << ndiag;
    let mut diagonals = vec![false; ndiag];
    let mut nonsingular = 0u64;
    for code in 0..total {
        for (k, d) in diagonals.iter_mut().enumerate() {
            *d = (code >> k) & 1 == 1;
        }
        if build_toeplitz(n, &diagonals)?.determinant()? {
            nonsingular += 1;
        }
    }
    Ok(nonsingular as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn mat(rows: &[&str]) -> BitMatrix {
        BitMatrix::from_row_strings(rows).unwrap()
    }

    #[test]
    fn matvec_examples() {
        let id = BitMatrix::identity(3).unwrap();
        assert_eq!(id.matvec(&bv("101")).unwrap(), bv("101"));

        let ones = mat(&["11", "11"]);
        assert_eq!(ones.matvec(&bv("11")).unwrap(), bv("00"));

        // row 1: x1 = 1; row 2: x1 ^ x2 = 0; row 3: x2 ^ x3 = 1
        let a = build_recursive_toeplitz(3, &[true]).unwrap();
        assert_eq!(a.matvec(&bv("110")).unwrap(), bv("101"));
    }

    #[test]
    fn matvec_dimension_mismatch_names_shapes() {
        let err = BitMatrix::identity(3)
            .unwrap()
            .matvec(&bv("10"))
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("3x3") && msg.contains("2x1"), "{msg}");
    }

    #[test]
    fn determinant_examples() {
        assert!(BitMatrix::identity(4).unwrap().determinant().unwrap());
        assert!(!mat(&["101", "000", "110"]).determinant().unwrap());
        assert!(build_circulant(8, 3).unwrap().determinant().unwrap());
        assert!(matches!(
            BitMatrix::zeros(2, 3).unwrap().determinant(),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn invert_examples() {
        let id = BitMatrix::identity(5).unwrap();
        assert_eq!(id.invert().unwrap().unwrap(), id);

        let a = mat(&["11", "01"]);
        let inv = a.invert().unwrap().unwrap();
        assert_eq!(inv, a);
        assert!(a.mul(&inv).unwrap().is_identity());

        let rows: Vec<Vec<bool>> = (0..6).map(|r| vec![true; r.min(2)]).collect();
        let rec = build_recursive_matrix(6, 2, &rows).unwrap();
        let inv = rec
            .invert()
            .unwrap()
            .expect("recursive matrices are invertible");
        assert!(rec.mul(&inv).unwrap().is_identity());
        assert!(inv.mul(&rec).unwrap().is_identity());

        assert!(mat(&["11", "11"]).invert().unwrap().is_none());
        assert!(BitMatrix::zeros(3, 2).unwrap().invert().is_err());
    }

    #[test]
    fn recursive_matrix_examples() {
        assert_eq!(build_recursive_matrix(1, 4, &[]).unwrap(), mat(&["1"]));
        assert_eq!(
            build_recursive_toeplitz(3, &[true]).unwrap(),
            mat(&["100", "110", "011"])
        );
        let rows: Vec<Vec<bool>> = (0..4).map(|r| vec![true; r.min(3)]).collect();
        let a = build_recursive_matrix(4, 3, &rows).unwrap();
        assert!(a.is_unit_lower_triangular());
        assert!(a.determinant().unwrap());
    }

    #[test]
    fn recursive_matrix_rejects_out_of_band_taps() {
        // row 1 can only reach column 0
        let err = build_recursive_matrix(3, 2, &[vec![], vec![true, true]]).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
        // depth 1 forbids a lag-2 tap
        let err =
            build_recursive_matrix(4, 1, &[vec![], vec![true], vec![false, true]]).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
        assert!(build_recursive_matrix(3, 0, &[]).is_err());
    }

    #[test]
    fn circulant_examples() {
        assert!(build_circulant(3, 1).unwrap().is_identity());
        assert!(!build_circulant(4, 2).unwrap().determinant().unwrap());
        assert!(!build_circulant(9, 3).unwrap().determinant().unwrap());
        assert!(build_circulant(3, 4).is_err());

        let c = check_circulant(9, 3).unwrap();
        assert_eq!(c.verdict, CirculantVerdict::SingularDivides);
        assert_eq!(c.verdict.to_string(), "singular: d divides N");
        assert!(c.consistent());
        assert_eq!(circulant_invertible_predicted(8, 4), None);
    }

    #[test]
    fn toeplitz_small_sizes_are_exact() {
        assert_eq!(toeplitz_nonsingular_fraction(1, 1, 7).unwrap(), 0.5);
        assert_eq!(toeplitz_nonsingular_fraction(2, 3, 7).unwrap(), 0.5);
        assert!(toeplitz_nonsingular_fraction(0, 3, 7).is_err());
        assert!(toeplitz_nonsingular_fraction(4, 0, 7).is_err());
    }

    #[test]
    fn toeplitz_n2_matches_hand_count() {
        // independent count: det [[a, b], [c, a]] = a ^ (b & c)
        let mut ones = 0;
        for code in 0..8u8 {
            let (c, a, b) = (code & 1, (code >> 1) & 1, (code >> 2) & 1);
            ones += (a ^ (b & c)) as usize;
        }
        assert_eq!(ones, 4);
        assert_eq!(
            toeplitz_nonsingular_fraction_exhaustive(2).unwrap(),
            ones as f64 / 8.0
        );
    }

    #[test]
    fn toeplitz_exhaustive_is_half_for_small_n() {
        for n in 1..=5 {
            assert_eq!(
                toeplitz_nonsingular_fraction_exhaustive(n).unwrap(),
                0.5,
                "n={n}"
            );
        }
    }

    #[test]
    fn toeplitz_layout() {
        // diagonals index 0 is the top-right corner, 2n-2 the bottom-left
        let t = build_toeplitz(2, &[true, false, false]).unwrap();
        assert_eq!(t, mat(&["01", "00"]));
        assert!(t.is_toeplitz());
    }

    #[test]
    fn bit_string_round_trip() {
        let a = mat(&["1001", "0110", "1111"]);
        assert_eq!(BitMatrix::from_row_strings(&a.to_row_strings()).unwrap(), a);
        assert!("10x".parse::<BitVector>().is_err());
        assert!("".parse::<BitVector>().is_err());
    }

    #[test]
    fn wide_matrices_cross_word_boundaries() {
        let n = 130;
        let a = build_recursive_toeplitz(n, &[true, false, true]).unwrap();
        let inv = a.invert().unwrap().unwrap();
        assert!(a.mul(&inv).unwrap().is_identity());
        let mut x = BitVector::zeros(n).unwrap();
        x.set(0, true);
        x.set(129, true);
        let z = a.matvec(&x).unwrap();
        assert_eq!(inv.matvec(&z).unwrap(), x);
    }
}

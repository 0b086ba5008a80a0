//! Dense matrices over GF(2) with bit-packed rows.
//!
//! Rows are stored row-major, `stride` 64-bit words per row. Bit `c` of a row
//! lives in word `c / 64` at position `c % 64`. Bits past `cols` in the last
//! word of a row are always zero, so word-level equality and zero tests are
//! exact.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

const WORD_BITS: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(bits: usize) -> u64 {
    match bits % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

#[inline]
fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

#[inline]
fn bit(words: &[u64], c: usize) -> bool {
    (words[c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
}

#[inline]
fn lowest_set_bit(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * WORD_BITS + w.trailing_zeros() as usize)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Gf2Error {
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("entry ({row}, {col}) is {value}, expected 0 or 1")]
    InvalidBit { row: usize, col: usize, value: u8 },
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("target row {row} is not in the row space of the basis")]
    Unsolvable { row: usize },
}

/// A dense `rows × cols` matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// The all-ones matrix `J`.
    pub fn ones(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        if m.stride > 0 {
            let mask = tail_mask(cols);
            for r in 0..rows {
                let row = m.row_words_mut(r);
                row.fill(u64::MAX);
                *row.last_mut().unwrap() &= mask;
            }
        }
        m
    }

    /// Builds a matrix from rows of 0/1 entries. `cols` is the declared width,
    /// which also fixes the shape of an empty row list.
    pub fn from_rows<R: AsRef<[u8]>>(cols: usize, rows: &[R]) -> Result<Self, Gf2Error> {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Gf2Error::RaggedRow {
                    row: r,
                    expected: cols,
                    found: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => m.set(r, c, true),
                    value => return Err(Gf2Error::InvalidBit { row: r, col: c, value }),
                }
            }
        }
        Ok(m)
    }

    /// Builds a `1 × bits.len()` matrix.
    pub fn row_vector(bits: &[bool]) -> Self {
        let mut m = Self::zeros(1, bits.len());
        for (c, &b) in bits.iter().enumerate() {
            m.set(0, c, b);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        bit(self.row_words(r), c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        let mask = 1u64 << (c % WORD_BITS);
        let w = &mut self.row_words_mut(r)[c / WORD_BITS];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        self.row_words_mut(r)[c / WORD_BITS] ^= 1u64 << (c % WORD_BITS);
    }

    #[inline]
    pub(crate) fn words(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub(crate) fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub(crate) fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub(crate) fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    /// XORs row `src_row` of `src` into row `dst_row` of `self`.
    #[inline]
    pub(crate) fn xor_row_from(&mut self, dst_row: usize, src: &Gf2Matrix, src_row: usize) {
        debug_assert_eq!(self.cols, src.cols);
        let s = src_row * src.stride;
        let d = dst_row * self.stride;
        xor_into(
            &mut self.data[d..d + self.stride],
            &src.data[s..s + src.stride],
        );
    }

    pub fn row_bits(&self, r: usize) -> Vec<u8> {
        let words = self.row_words(r);
        (0..self.cols).map(|c| bit(words, c) as u8).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|r| self.row_bits(r)).collect()
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row_words(r).iter().all(|w| *w == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|w| *w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn add(&self, other: &Gf2Matrix) -> Result<Gf2Matrix, Gf2Error> {
        if self.shape() != other.shape() {
            return Err(Gf2Error::DimensionMismatch {
                op: "add",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = self.clone();
        xor_into(&mut out.data, &other.data);
        Ok(out)
    }

    pub fn mul(&self, other: &Gf2Matrix) -> Result<Gf2Matrix, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::DimensionMismatch {
                op: "mul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Gf2Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let lhs = self.row_words(i);
            for k in 0..self.cols {
                if bit(lhs, k) {
                    out.xor_row_from(i, other, k);
                }
            }
        }
        Ok(out)
    }

    /// Computes `self · x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[bool]) -> Result<Vec<bool>, Gf2Error> {
        if x.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                op: "mul_vec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        let packed = Gf2Matrix::row_vector(x);
        let xw = packed.row_words(0);
        Ok((0..self.rows)
            .map(|r| {
                let ones: u32 = self
                    .row_words(r)
                    .iter()
                    .zip(xw)
                    .map(|(a, b)| (a & b).count_ones())
                    .sum();
                ones % 2 == 1
            })
            .collect())
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut out = Gf2Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            let words = self.row_words(r);
            for c in 0..self.cols {
                if bit(words, c) {
                    out.set(c, r, true);
                }
            }
        }
        out
    }

    /// Stacks blocks vertically. All blocks must share `cols`.
    pub fn vstack(cols: usize, blocks: &[&Gf2Matrix]) -> Result<Gf2Matrix, Gf2Error> {
        let total: usize = blocks.iter().map(|b| b.rows).sum();
        let mut out = Gf2Matrix::zeros(total, cols);
        let mut at = 0;
        for b in blocks {
            if b.cols != cols {
                return Err(Gf2Error::DimensionMismatch {
                    op: "vstack",
                    left: (at, cols),
                    right: b.shape(),
                });
            }
            out.data[at * out.stride..(at + b.rows) * out.stride].copy_from_slice(&b.data);
            at += b.rows;
        }
        Ok(out)
    }

    /// Copies rows `start..start + len` into a new matrix.
    pub fn row_block(&self, start: usize, len: usize) -> Gf2Matrix {
        assert!(start + len <= self.rows, "row block out of bounds");
        Gf2Matrix {
            rows: len,
            cols: self.cols,
            stride: self.stride,
            data: self.data[start * self.stride..(start + len) * self.stride].to_vec(),
        }
    }

    pub fn select_rows(&self, indices: &[usize]) -> Gf2Matrix {
        let mut out = Gf2Matrix::zeros(indices.len(), self.cols);
        for (i, &r) in indices.iter().enumerate() {
            out.xor_row_from(i, self, r);
        }
        out
    }

    /// Rank over GF(2). Eliminates on a scratch copy; `self` is untouched.
    pub fn rank(&self) -> usize {
        let mut scratch = self.data.clone();
        rank_in_place(&mut scratch, self.rows, self.cols, self.stride)
    }

    /// Indices of the lexicographically first maximal set of linearly
    /// independent rows, scanning top to bottom.
    pub fn independent_rows(&self) -> Vec<usize> {
        let mut basis = RowBasis::new(self.cols);
        (0..self.rows)
            .filter(|&r| basis.insert(self.row_words(r)))
            .collect()
    }

    /// Finds `X` with `X · self = targets`.
    ///
    /// Each row of the result expresses the matching target row as a
    /// combination of this matrix's rows. When the rows of `self` are
    /// dependent the combination is taken over the first independent subset,
    /// with zeros on the remaining rows.
    pub fn solve_rows(&self, targets: &Gf2Matrix) -> Result<Gf2Matrix, Gf2Error> {
        if self.cols != targets.cols {
            return Err(Gf2Error::DimensionMismatch {
                op: "solve_rows",
                left: self.shape(),
                right: targets.shape(),
            });
        }
        let mut basis = TaggedBasis::new(self.rows);
        for r in 0..self.rows {
            basis.insert(self.row_words(r), r);
        }
        let mut out = Gf2Matrix::zeros(targets.rows, self.rows);
        for t in 0..targets.rows {
            let combo = basis
                .express(targets.row_words(t))
                .ok_or(Gf2Error::Unsolvable { row: t })?;
            out.row_words_mut(t).copy_from_slice(&combo);
        }
        Ok(out)
    }
}

/// Forward elimination over a flat row-major buffer; returns the rank.
pub(crate) fn rank_in_place(data: &mut [u64], rows: usize, cols: usize, stride: usize) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let w = c / WORD_BITS;
        let mask = 1u64 << (c % WORD_BITS);
        let Some(p) = (rank..rows).find(|&r| data[r * stride + w] & mask != 0) else {
            continue;
        };
        if p != rank {
            for k in 0..stride {
                data.swap(p * stride + k, rank * stride + k);
            }
        }
        let (head, tail) = data.split_at_mut((rank + 1) * stride);
        let pivot = &head[rank * stride..];
        for row in tail.chunks_exact_mut(stride) {
            if row[w] & mask != 0 {
                // Words before `w` are zero in the pivot row.
                xor_into(&mut row[w..], &pivot[w..]);
            }
        }
        rank += 1;
    }
    rank
}

/// Incrementally built echelon basis of a row space.
///
/// Each stored row has a distinct pivot (its lowest set bit) and is zero at the
/// pivots of all rows inserted before it, so reduction in insertion order is a
/// single pass.
#[derive(Debug, Clone)]
pub struct RowBasis {
    cols: usize,
    pivots: Vec<(usize, Vec<u64>)>,
}

impl RowBasis {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            pivots: Vec::new(),
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn reduce(&self, row: &mut [u64]) {
        for (c, p) in &self.pivots {
            if bit(row, *c) {
                xor_into(row, p);
            }
        }
    }

    /// Adds a packed row; returns `true` if it enlarged the span.
    pub(crate) fn insert(&mut self, row: &[u64]) -> bool {
        let mut v = row.to_vec();
        self.reduce(&mut v);
        match lowest_set_bit(&v) {
            Some(c) => {
                self.pivots.push((c, v));
                true
            }
            None => false,
        }
    }

    pub(crate) fn contains(&self, row: &[u64]) -> bool {
        let mut v = row.to_vec();
        self.reduce(&mut v);
        v.iter().all(|w| *w == 0)
    }

    /// Inserts row `r` of `m`.
    pub fn insert_row(&mut self, m: &Gf2Matrix, r: usize) -> bool {
        assert_eq!(m.cols, self.cols, "row width mismatch");
        self.insert(m.row_words(r))
    }

    pub fn contains_row(&self, m: &Gf2Matrix, r: usize) -> bool {
        assert_eq!(m.cols, self.cols, "row width mismatch");
        self.contains(m.row_words(r))
    }

    /// True when every row of `m` lies in the span.
    pub fn spans(&self, m: &Gf2Matrix) -> bool {
        (0..m.rows).all(|r| self.contains_row(m, r))
    }
}

/// Echelon basis that also tracks, for each stored row, which original rows
/// were summed to produce it.
struct TaggedBasis {
    tag_words: usize,
    pivots: Vec<(usize, Vec<u64>, Vec<u64>)>,
}

impl TaggedBasis {
    fn new(tags: usize) -> Self {
        Self {
            tag_words: words_for(tags),
            pivots: Vec::new(),
        }
    }

    fn insert(&mut self, row: &[u64], tag: usize) {
        let mut v = row.to_vec();
        let mut t = vec![0u64; self.tag_words];
        t[tag / WORD_BITS] |= 1u64 << (tag % WORD_BITS);
        for (c, p, pt) in &self.pivots {
            if bit(&v, *c) {
                xor_into(&mut v, p);
                xor_into(&mut t, pt);
            }
        }
        if let Some(c) = lowest_set_bit(&v) {
            self.pivots.push((c, v, t));
        }
    }

    fn express(&self, row: &[u64]) -> Option<Vec<u64>> {
        let mut v = row.to_vec();
        let mut t = vec![0u64; self.tag_words];
        for (c, p, pt) in &self.pivots {
            if bit(&v, *c) {
                xor_into(&mut v, p);
                xor_into(&mut t, pt);
            }
        }
        v.iter().all(|w| *w == 0).then_some(t)
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            f.write_str("  ")?;
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            f.write_str("\n")?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            if r > 0 {
                f.write_str("\n")?;
            }
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(cols: usize, rows: &[&[u8]]) -> Gf2Matrix {
        Gf2Matrix::from_rows(cols, rows).unwrap()
    }

    #[test]
    fn from_rows_identity_and_empty() {
        assert_eq!(m(2, &[&[1, 0], &[0, 1]]), Gf2Matrix::identity(2));
        let empty = Gf2Matrix::from_rows::<&[u8]>(5, &[]).unwrap();
        assert_eq!(empty.shape(), (0, 5));
        assert_eq!(empty.rank(), 0);
        assert!(empty.independent_rows().is_empty());
    }

    #[test]
    fn from_rows_coded_side_info_row() {
        // x_2 + x_5
        let s1 = m(5, &[&[0, 1, 0, 0, 1]]);
        assert_eq!(s1.shape(), (1, 5));
        assert!(s1.get(0, 1) && s1.get(0, 4));
        assert_eq!(s1.count_ones(), 2);
    }

    #[test]
    fn from_rows_rejects_ragged_and_non_binary() {
        let err = Gf2Matrix::from_rows(3, &[vec![1, 0, 1], vec![1, 0]]).unwrap_err();
        assert_eq!(
            err,
            Gf2Error::RaggedRow {
                row: 1,
                expected: 3,
                found: 2
            }
        );
        let err = Gf2Matrix::from_rows(2, &[vec![0, 2]]).unwrap_err();
        assert_eq!(
            err,
            Gf2Error::InvalidBit {
                row: 0,
                col: 1,
                value: 2
            }
        );
    }

    #[test]
    fn ones_keeps_padding_clear() {
        let j = Gf2Matrix::ones(3, 70);
        assert_eq!(j.count_ones(), 210);
        assert_eq!(j.rank(), 1);
    }

    #[test]
    fn add_is_xor() {
        let i2 = Gf2Matrix::identity(2);
        assert!(i2.add(&i2).unwrap().is_zero());
        let j3 = Gf2Matrix::ones(3, 3);
        let i3 = Gf2Matrix::identity(3);
        assert_eq!(j3.add(&i3).unwrap().add(&i3).unwrap(), j3);
        assert!(matches!(
            i2.add(&i3),
            Err(Gf2Error::DimensionMismatch { op: "add", .. })
        ));
    }

    #[test]
    fn mul_caching_delivery() {
        // x = [a1, a2, b1, b2]; the code sends b1 then a2.
        let c = m(4, &[&[0, 0, 1, 0], &[0, 1, 0, 0]]);
        let x = [true, false, true, true];
        assert_eq!(c.mul_vec(&x).unwrap(), [true, false]);
        let xcol = Gf2Matrix::row_vector(&x).transpose();
        assert_eq!(c.mul(&xcol).unwrap(), m(1, &[&[1], &[0]]));
        assert!(c.mul(&c).is_err());
    }

    #[test]
    fn mul_identity_and_empty_inner() {
        let a = m(3, &[&[1, 1, 0], &[0, 1, 1]]);
        assert_eq!(Gf2Matrix::identity(2).mul(&a).unwrap(), a);
        let p = Gf2Matrix::zeros(3, 0).mul(&Gf2Matrix::zeros(0, 4)).unwrap();
        assert_eq!(p, Gf2Matrix::zeros(3, 4));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Gf2Matrix::identity(3).rank(), 3);
        let caching = m(4, &[&[0, 0, 1, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 1, 0, 0]]);
        assert_eq!(caching.rank(), 2);
        assert_eq!(caching.independent_rows(), [0, 1]);
        let coded = m(
            5,
            &[
                &[1, 1, 0, 0, 1],
                &[1, 1, 0, 0, 1],
                &[0, 1, 1, 1, 0],
                &[0, 1, 1, 1, 0],
                &[1, 0, 1, 1, 1],
            ],
        );
        let before = coded.clone();
        assert_eq!(coded.rank(), 2);
        assert_eq!(coded, before);
        assert_eq!(coded.independent_rows(), [0, 2]);
    }

    #[test]
    fn solve_rows_examples() {
        let i4 = Gf2Matrix::identity(4);
        let t = m(4, &[&[1, 0, 1, 1], &[0, 1, 1, 0]]);
        assert_eq!(i4.solve_rows(&t).unwrap(), t);

        let basis = m(4, &[&[0, 0, 1, 0], &[0, 1, 0, 0]]);
        let x = basis.solve_rows(&m(4, &[&[0, 1, 1, 0]])).unwrap();
        assert_eq!(x, m(2, &[&[1, 1]]));

        let err = basis
            .solve_rows(&m(4, &[&[0, 1, 0, 0], &[1, 0, 0, 0]]))
            .unwrap_err();
        assert_eq!(err, Gf2Error::Unsolvable { row: 1 });
    }

    #[test]
    fn solve_rows_dependent_basis_uses_first_independent_rows() {
        let basis = m(3, &[&[1, 1, 0], &[1, 1, 0], &[0, 1, 1]]);
        let x = basis.solve_rows(&m(3, &[&[1, 0, 1]])).unwrap();
        assert_eq!(x, m(3, &[&[1, 0, 1]]));
        assert_eq!(x.mul(&basis).unwrap(), m(3, &[&[1, 0, 1]]));
    }

    #[test]
    fn vstack_and_blocks() {
        let a = m(2, &[&[1, 0]]);
        let b = m(2, &[&[0, 1], &[1, 1]]);
        let s = Gf2Matrix::vstack(2, &[&a, &b]).unwrap();
        assert_eq!(s, m(2, &[&[1, 0], &[0, 1], &[1, 1]]));
        assert_eq!(s.row_block(1, 2), b);
        assert_eq!(s.select_rows(&[2, 0]), m(2, &[&[1, 1], &[1, 0]]));
        assert!(Gf2Matrix::vstack(3, &[&a]).is_err());
    }

    #[test]
    fn display_renders_bits() {
        let a = m(3, &[&[1, 0, 1], &[0, 1, 0]]);
        assert_eq!(alloc::format!("{a}"), "101\n010");
    }
}

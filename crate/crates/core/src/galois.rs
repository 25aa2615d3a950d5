// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

//! Prime-field arithmetic and exact dense linear algebra over GF(p).
//!
//! Elements carry their modulus so they can use the ordinary arithmetic
//! operators. Matrices store reduced residues as `u64` and share one [`Field`].
//! Every elimination in this module picks the leftmost usable pivot, so rank
//! profiles and pivot column sets are reproducible.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// A prime field GF(p).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    p: u64,
}

impl Field {
    /// Creates GF(p), rejecting composite moduli.
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::CompositeModulus(p));
        }
        Ok(Field { p })
    }

    pub fn modulus(self) -> u64 {
        self.p
    }

    /// Reduces `value` into the field.
    pub fn elem(self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.p,
            modulus: self.p,
        }
    }

    pub fn from_i64(self, value: i64) -> FieldElement {
        self.elem((value as i128).rem_euclid(self.p as i128) as u64)
    }

    pub fn zero(self) -> FieldElement {
        self.elem(0)
    }

    pub fn one(self) -> FieldElement {
        self.elem(1)
    }

    /// `(-1)^k` as a field element.
    pub fn sign(self, k: usize) -> FieldElement {
        if k.is_multiple_of(2) {
            self.one()
        } else {
            self.elem(self.p - 1)
        }
    }

    /// Bytes needed to store one element: `ceil(bits(p) / 8)`.
    pub fn element_bytes(self) -> usize {
        let bits = 64 - self.p.leading_zeros() as usize;
        bits.div_ceil(8)
    }

    #[inline]
    pub(crate) fn add_raw(self, a: u64, b: u64) -> u64 {
        let (s, overflow) = a.overflowing_add(b);
        if overflow || s >= self.p {
            s.wrapping_sub(self.p)
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn sub_raw(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - (b - a)
        }
    }

    #[inline]
    pub(crate) fn neg_raw(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub(crate) fn mul_raw(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub(crate) fn pow_raw(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            exp >>= 1;
        }
        acc
    }

    pub(crate) fn inv_raw(self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::DivideByZero);
        }
        // Fermat: a^(p-2)
        Ok(self.pow_raw(a, self.p - 2))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.p)
    }
}

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let field = Field { p: n };
    'witness: for &a in &SMALL {
        let mut x = field.pow_raw(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = field.mul_raw(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime `>= lower`.
pub fn next_prime(lower: u64) -> u64 {
    let mut candidate = lower.max(2);
    while !is_prime(candidate) {
        candidate += 1;
    }
    candidate
}

/// An element of GF(p), stored as its canonical representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: u64,
}

impl FieldElement {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn field(self) -> Field {
        Field { p: self.modulus }
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Result<Self> {
        let v = self.field().inv_raw(self.value)?;
        Ok(self.with(v))
    }

    pub fn pow(self, exp: u64) -> Self {
        self.with(self.field().pow_raw(self.value, exp))
    }

    fn with(self, value: u64) -> Self {
        FieldElement {
            value,
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.modulus, rhs.modulus);
        self.with(self.field().add_raw(self.value, rhs.value))
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.modulus, rhs.modulus);
        self.with(self.field().sub_raw(self.value, rhs.value))
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.modulus, rhs.modulus);
        self.with(self.field().mul_raw(self.value, rhs.value))
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> Self {
        self.with(self.field().neg_raw(self.value))
    }
}

impl AddAssign for FieldElement {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for FieldElement {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for FieldElement {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

/// Result of column-pivot analysis: the leftmost maximal independent column
/// set, and for every other column its coefficients over those pivots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotColumns {
    pub cols: usize,
    pub pivots: Vec<usize>,
    /// non-pivot column index -> coefficients, aligned with `pivots`
    pub expansion: BTreeMap<usize, Vec<FieldElement>>,
}

impl PivotColumns {
    /// Picks the pivot entries out of a full row vector `x·A`.
    pub fn compress(&self, full: &[FieldElement]) -> Vec<FieldElement> {
        self.pivots.iter().map(|&j| full[j]).collect()
    }

    /// Rebuilds the full row vector `x·A` from its pivot entries.
    pub fn expand(&self, kept: &[FieldElement], field: Field) -> Result<Vec<FieldElement>> {
        if kept.len() != self.pivots.len() {
            return Err(Error::WrongLength {
                expected: self.pivots.len(),
                got: kept.len(),
            });
        }
        let mut out = vec![field.zero(); self.cols];
        for (&j, &v) in self.pivots.iter().zip(kept) {
            out[j] = v;
        }
        for (&j, coeffs) in &self.expansion {
            out[j] = coeffs
                .iter()
                .zip(kept)
                .fold(field.zero(), |acc, (&c, &v)| acc + c * v);
        }
        Ok(out)
    }
}

/// Dense row-major matrix over GF(p).
#[derive(Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "FieldMatrix {}x{} over {}",
            self.rows, self.cols, self.field
        )?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        Ok(())
    }
}

impl FieldMatrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % field.p;
        }
        m
    }

    /// Builds a matrix from integer rows, reducing every entry mod p.
    pub fn from_rows<R: AsRef<[u64]>>(field: Field, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "ragged rows: {} vs {}",
                    row.len(),
                    cols
                )));
            }
            data.extend(row.iter().map(|v| v % field.p));
        }
        Ok(FieldMatrix {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(
        field: Field,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> FieldElement,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let e = f(r, c);
                debug_assert_eq!(e.modulus, field.p);
                data.push(e.value);
            }
        }
        FieldMatrix {
            field,
            rows,
            cols,
            data,
        }
    }

    /// Stacks row vectors (all of equal length) into a matrix.
    pub fn from_row_vectors(field: Field, rows: &[Vec<FieldElement>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged row vectors".into()));
        }
        Ok(Self::from_fn(field, rows.len(), cols, |r, c| rows[r][c]))
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        FieldElement {
            value: self.data[r * self.cols + c],
            modulus: self.field.p,
        }
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        debug_assert_eq!(v.modulus, self.field.p);
        self.data[r * self.cols + c] = v.value;
    }

    pub fn row(&self, r: usize) -> Vec<FieldElement> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn column(&self, c: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.field, idx.len(), self.cols);
        for (i, &r) in idx.iter().enumerate() {
            out.data[i * self.cols..(i + 1) * self.cols]
                .copy_from_slice(&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        out
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.field, self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                out.data[r * idx.len() + j] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// Horizontal concatenation `[A | B | ...]`.
    pub fn hconcat(blocks: &[&FieldMatrix]) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::DimensionMismatch("no blocks to concatenate".into()))?;
        let rows = first.rows;
        let field = first.field;
        if blocks.iter().any(|b| b.rows != rows || b.field != field) {
            return Err(Error::DimensionMismatch(
                "blocks differ in row count or field".into(),
            ));
        }
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(field, rows, cols);
        for r in 0..rows {
            let mut offset = 0;
            for b in blocks {
                out.data[r * cols + offset..r * cols + offset + b.cols]
                    .copy_from_slice(&b.data[r * b.cols..(r + 1) * b.cols]);
                offset += b.cols;
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        if self.cols != other.rows || self.field != other.field {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.data[k * other.cols + c];
                    if b != 0 {
                        let idx = r * other.cols + c;
                        out.data[idx] = f.add_raw(out.data[idx], f.mul_raw(a, b));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `x · A`.
    pub fn left_mul_vector(&self, x: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} times {}x{}",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        let f = self.field;
        let mut acc = vec![0u64; self.cols];
        for (r, xr) in x.iter().enumerate() {
            debug_assert_eq!(xr.modulus, f.p);
            if xr.value == 0 {
                continue;
            }
            for (c, slot) in acc.iter_mut().enumerate() {
                let a = self.data[r * self.cols + c];
                if a != 0 {
                    *slot = f.add_raw(*slot, f.mul_raw(xr.value, a));
                }
            }
        }
        Ok(acc.into_iter().map(|v| f.elem(v)).collect())
    }

    /// Matrix times column vector: `A · x`.
    pub fn mul_vector(&self, x: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let f = self.field;
        Ok((0..self.rows)
            .map(|r| {
                let v = (0..self.cols).fold(0u64, |acc, c| {
                    f.add_raw(acc, f.mul_raw(self.data[r * self.cols + c], x[c].value))
                });
                f.elem(v)
            })
            .collect())
    }

    /// Reduced row-echelon form with leftmost pivots; returns the pivot columns.
    pub fn rref(&self) -> (FieldMatrix, Vec<usize>) {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(sel) = (row..m.rows).find(|&r| m.data[r * m.cols + col] != 0) else {
                continue;
            };
            m.swap_rows(sel, row);
            let inv = f
                .inv_raw(m.data[row * m.cols + col])
                .expect("pivot is nonzero");
            m.scale_row(row, inv);
            for r in 0..m.rows {
                if r != row {
                    let factor = m.data[r * m.cols + col];
                    if factor != 0 {
                        m.sub_scaled_row(r, row, factor);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Leftmost maximal independent column set plus exact expansions of the
    /// remaining columns over it.
    pub fn pivot_columns(&self) -> PivotColumns {
        let (r, pivots) = self.rref();
        let expansion = (0..self.cols)
            .filter(|c| !pivots.contains(c))
            .map(|c| {
                let coeffs = (0..pivots.len()).map(|k| r.get(k, c)).collect();
                (c, coeffs)
            })
            .collect();
        PivotColumns {
            cols: self.cols,
            pivots,
            expansion,
        }
    }

    /// Gauss-Jordan inverse of a square matrix.
    pub fn inverse(&self) -> Result<FieldMatrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "inverse of non-square {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let aug = FieldMatrix::hconcat(&[self, &FieldMatrix::identity(self.field, n)])?;
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        let right: Vec<usize> = (n..2 * n).collect();
        Ok(r.select_columns(&right))
    }

    /// Determinant by elimination.
    pub fn determinant(&self) -> Result<FieldElement> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "determinant of non-square {}x{}",
                self.rows, self.cols
            )));
        }
        let f = self.field;
        let n = self.rows;
        let mut m = self.clone();
        let mut det = 1 % f.p;
        for col in 0..n {
            let Some(sel) = (col..n).find(|&r| m.data[r * n + col] != 0) else {
                return Ok(f.zero());
            };
            if sel != col {
                m.swap_rows(sel, col);
                det = f.neg_raw(det);
            }
            let pivot = m.data[col * n + col];
            det = f.mul_raw(det, pivot);
            let inv = f.inv_raw(pivot)?;
            for r in col + 1..n {
                let factor = f.mul_raw(m.data[r * n + col], inv);
                if factor != 0 {
                    m.sub_scaled_row(r, col, factor);
                }
            }
        }
        Ok(f.elem(det))
    }

    /// Basis of the right kernel `{x : A·x = 0}`, one vector per free column.
    pub fn null_space(&self) -> Vec<Vec<FieldElement>> {
        let f = self.field;
        let pc = self.pivot_columns();
        pc.expansion
            .iter()
            .map(|(&free, coeffs)| {
                let mut v = vec![f.zero(); self.cols];
                v[free] = f.one();
                for (&p, &c) in pc.pivots.iter().zip(coeffs) {
                    v[p] = -c;
                }
                v
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, k: u64) {
        let f = self.field;
        for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *v = f.mul_raw(*v, k);
        }
    }

    // row[target] -= factor * row[source]
    fn sub_scaled_row(&mut self, target: usize, source: usize, factor: u64) {
        let f = self.field;
        for c in 0..self.cols {
            let s = self.data[source * self.cols + c];
            if s != 0 {
                let idx = target * self.cols + c;
                self.data[idx] = f.sub_raw(self.data[idx], f.mul_raw(factor, s));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf13() -> Field {
        Field::new(13).unwrap()
    }

    #[test]
    fn field_construction() {
        assert_eq!(Field::new(13).unwrap().modulus(), 13);
        assert_eq!(Field::new(2).unwrap().modulus(), 2);
        assert_eq!(Field::new(12), Err(Error::CompositeModulus(12)));
        assert!(Field::new(0).is_err());
        assert!(Field::new(1).is_err());
        assert!(Field::new(257).is_ok());
        assert!(Field::new(18446744073709551557).is_ok());
        assert!(Field::new(3215031751).is_err()); // strong pseudoprime to 2,3,5,7
    }

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| {
            n >= 2
                && (2..n)
                    .take_while(|k| k * k <= n)
                    .all(|k| !n.is_multiple_of(k))
        };
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
        assert_eq!(next_prime(22), 23);
        assert_eq!(next_prime(257), 257);
    }

    #[test]
    fn element_ops_gf13() {
        let f = gf13();
        assert_eq!((f.elem(8) * f.elem(5)).value(), 1);
        assert_eq!(f.elem(8).inv().unwrap().value(), 5);
        assert_eq!((-f.elem(1)).value(), 12);
        assert_eq!((f.elem(9) + f.elem(6)).value(), 2);
        assert_eq!((f.elem(3) - f.elem(7)).value(), 9);
        assert_eq!(f.zero().inv(), Err(Error::DivideByZero));
        assert_eq!(f.from_i64(-1).value(), 12);
        assert_eq!(f.sign(3).value(), 12);
        assert_eq!(f.sign(4).value(), 1);
    }

    #[test]
    fn inverse_exhaustive_gf13() {
        let f = gf13();
        for a in 1..13 {
            let x = f.elem(a);
            assert_eq!(x * x.inv().unwrap(), f.one());
        }
    }

    #[test]
    fn element_width() {
        assert_eq!(gf13().element_bytes(), 1);
        assert_eq!(Field::new(251).unwrap().element_bytes(), 1);
        assert_eq!(Field::new(257).unwrap().element_bytes(), 2);
        assert_eq!(Field::new(2).unwrap().element_bytes(), 1);
    }

    #[test]
    fn identity_and_zero_products() {
        let f = gf13();
        let b = FieldMatrix::from_rows(f, &[[1u64, 2, 3], [4, 5, 6], [7, 8, 9]]).unwrap();
        assert_eq!(FieldMatrix::identity(f, 3).mul(&b).unwrap(), b);
        assert!(b.mul(&FieldMatrix::zeros(f, 3, 2)).unwrap().is_zero());
        assert!(matches!(
            b.mul(&FieldMatrix::zeros(f, 2, 2)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn inverse_cases() {
        let f = gf13();
        let i4 = FieldMatrix::identity(f, 4);
        assert_eq!(i4.inverse().unwrap(), i4);
        let vander = FieldMatrix::from_fn(f, 4, 4, |r, c| f.elem(r as u64 + 1).pow(c as u64));
        let inv = vander.inverse().unwrap();
        assert_eq!(vander.mul(&inv).unwrap(), i4);
        let repeated = FieldMatrix::from_rows(f, &[[1u64, 2, 3], [1, 2, 3], [0, 1, 1]]).unwrap();
        assert_eq!(repeated.inverse(), Err(Error::Singular));
        assert_eq!(FieldMatrix::zeros(f, 3, 3).rank(), 0);
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        fn cofactor(m: &FieldMatrix) -> FieldElement {
            let f = m.field();
            let n = m.rows();
            if n == 1 {
                return m.get(0, 0);
            }
            let mut acc = f.zero();
            for c in 0..n {
                let rows: Vec<usize> = (1..n).collect();
                let cols: Vec<usize> = (0..n).filter(|&k| k != c).collect();
                let minor = m.select_rows(&rows).select_columns(&cols);
                acc += f.sign(c) * m.get(0, c) * cofactor(&minor);
            }
            acc
        }
        let f = gf13();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=5 {
            for _ in 0..50 {
                let m = FieldMatrix::from_fn(f, n, n, |_, _| f.elem(rng.gen_range(0..13)));
                assert_eq!(m.determinant().unwrap(), cofactor(&m));
            }
        }
    }

    #[test]
    fn random_inverses_gf13() {
        let f = gf13();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 1000 {
            let n = rng.gen_range(1..=8);
            let m = FieldMatrix::from_fn(f, n, n, |_, _| f.elem(rng.gen_range(0..13)));
            match m.inverse() {
                Ok(inv) => {
                    assert_eq!(m.mul(&inv).unwrap(), FieldMatrix::identity(f, n));
                    assert_eq!(inv.mul(&m).unwrap(), FieldMatrix::identity(f, n));
                    checked += 1;
                }
                Err(Error::Singular) => assert!(m.determinant().unwrap().is_zero()),
                Err(e) => panic!("unexpected {e}"),
            }
        }
    }

    #[test]
    fn pivot_columns_leftmost() {
        let f = gf13();
        // col1 = 2*col0, col3 = col0 + col2
        let m = FieldMatrix::from_rows(f, &[[1u64, 2, 0, 1], [3, 6, 1, 4], [0, 0, 5, 5]]).unwrap();
        let pc = m.pivot_columns();
        assert_eq!(pc.pivots, vec![0, 2]);
        assert_eq!(pc.expansion[&1], vec![f.elem(2), f.zero()]);
        assert_eq!(pc.expansion[&3], vec![f.one(), f.one()]);
        for v in m.null_space() {
            assert!(m.mul_vector(&v).unwrap().iter().all(|x| x.is_zero()));
        }
    }

    fn arb_matrix() -> impl Strategy<Value = FieldMatrix> {
        (1usize..7, 1usize..9).prop_flat_map(|(r, c)| {
            proptest::collection::vec(0u64..13, r * c).prop_map(move |vals| {
                let f = Field::new(13).unwrap();
                FieldMatrix::from_fn(f, r, c, |i, j| f.elem(vals[i * c + j]))
            })
        })
    }

    proptest! {
        #[test]
        fn expansion_reconstructs_columns(m in arb_matrix()) {
            let pc = m.pivot_columns();
            for (&j, coeffs) in &pc.expansion {
                for r in 0..m.rows() {
                    let rebuilt = pc.pivots.iter().zip(coeffs)
                        .fold(m.field().zero(), |acc, (&p, &c)| acc + c * m.get(r, p));
                    prop_assert_eq!(rebuilt, m.get(r, j));
                }
            }
        }

        #[test]
        fn row_rank_equals_column_rank(m in arb_matrix()) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn compress_expand_round_trip(m in arb_matrix(), seed in any::<u64>()) {
            let f = m.field();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<_> = (0..m.rows()).map(|_| f.elem(rng.gen_range(0..13))).collect();
            let full = m.left_mul_vector(&x).unwrap();
            let pc = m.pivot_columns();
            prop_assert_eq!(pc.expand(&pc.compress(&full), f).unwrap(), full);
        }
    }
}

// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-failure, helper-independent exact repair.
//!
//! A helper `h` multiplies its content `Ψ_h·D` by the public repair-encoder
//! matrix `Ξ^{f,m}` (rows: `m`-subsets, columns: `(m-1)`-subsets) and
//! transmits only the entries at the pivot columns of `Ξ^{f,m}`. The failed
//! node expands every payload back to the full vector, inverts `Ψ[H, :]` to
//! obtain the repair space `R = D·Ξ^{f,m}`, and reads off each of its symbols
//! as `[Ψ_f·D]_I = Σ_{x ∈ I} (-1)^{ind(I, x)} R[x, I \ {x}]`.

use crate::codec::EncoderMatrix;
use crate::combin::{SubsetIndexer, SubsetLabel};
use crate::error::{Error, Result};
use crate::galois::{Field, FieldElement, FieldMatrix, PivotColumns};

/// `Ξ^{f,m}` together with its row and column labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairMatrix {
    failed: usize,
    m: usize,
    matrix: FieldMatrix,
    rows: SubsetIndexer,
    cols: SubsetIndexer,
}

/// Builds `Ξ^{f,m}`: entry `(I, J)` is `(-1)^{ind(I, x)} ψ[f, x]` when
/// `I = J ∪ {x}`, zero otherwise.
pub fn repair_matrix(f: usize, m: usize, encoder: &EncoderMatrix) -> Result<RepairMatrix> {
    encoder.check_ids(&[f])?;
    let d = encoder.d();
    if m == 0 || m > d {
        return Err(Error::BadMode { d, m });
    }
    let field = encoder.field();
    let rows = SubsetIndexer::new(d, m)?;
    let cols = SubsetIndexer::new(d, m - 1)?;
    let mut matrix = FieldMatrix::zeros(field, rows.len(), cols.len());
    for (c, j) in cols.iter().enumerate() {
        for x in (1..=d).filter(|&x| !j.contains(x)) {
            let i = j.with(x);
            let r = rows.rank_members(i.members());
            matrix.set(r, c, field.sign(i.ind(x)) * encoder.psi(f, x));
        }
    }
    Ok(RepairMatrix {
        failed: f,
        m,
        matrix,
        rows,
        cols,
    })
}

impl RepairMatrix {
    pub fn failed(&self) -> usize {
        self.failed
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }
    pub fn row_labels(&self) -> &SubsetIndexer {
        &self.rows
    }
    pub fn column_labels(&self) -> &SubsetIndexer {
        &self.cols
    }

    /// Entry at row label `I` and column label `J`.
    pub fn entry(&self, i: &SubsetLabel, j: &SubsetLabel) -> Result<FieldElement> {
        Ok(self.matrix.get(self.rows.rank(i)?, self.cols.rank(j)?))
    }
}

/// Coefficients `c[J ∪ {y}] = (-1)^{ind(J ∪ {y}, y)} ψ[f, y]` for `y ∉ J`
/// (zero elsewhere) of a column relation `Ξ^{f,m} · c = 0`, where `J` is an
/// `(m-2)`-subset.
pub fn column_dependency(
    j: &SubsetLabel,
    f: usize,
    m: usize,
    encoder: &EncoderMatrix,
) -> Result<Vec<FieldElement>> {
    let d = encoder.d();
    if m < 2 || m > d || j.len() != m - 2 {
        return Err(Error::OutOfRange(format!(
            "column dependency needs m >= 2 and |J| = m - 2 (m={m}, J={j})"
        )));
    }
    encoder.check_ids(&[f])?;
    let field = encoder.field();
    let cols = SubsetIndexer::new(d, m - 1)?;
    let mut coeffs = vec![field.zero(); cols.len()];
    for y in (1..=d).filter(|&y| !j.contains(y)) {
        let jy = j.with(y);
        coeffs[cols.rank(&jy)?] = field.sign(jy.ind(y)) * encoder.psi(f, y);
    }
    Ok(coeffs)
}

/// Compressed repair data from one helper for one failed node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairPayload {
    pub failed: usize,
    pub helper: usize,
    pub m: usize,
    pub pivots: Vec<usize>,
    pub symbols: Vec<FieldElement>,
}

impl RepairPayload {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `f: u16, h: u16, m: u8, count: u8`, then `count` ascending `u16`
    /// pivots, then `count` fixed-width little-endian field elements.
    pub fn to_bytes(&self, field: Field) -> Result<Vec<u8>> {
        let count = u8::try_from(self.symbols.len())
            .map_err(|_| Error::Format(format!("{} symbols exceed u8 count", self.len())))?;
        let mut out = Vec::new();
        out.extend_from_slice(&to_u16(self.failed)?.to_le_bytes());
        out.extend_from_slice(&to_u16(self.helper)?.to_le_bytes());
        out.push(u8::try_from(self.m).map_err(|_| Error::Format("m exceeds u8".into()))?);
        out.push(count);
        write_pivots_and_symbols(&mut out, &self.pivots, &self.symbols, field)?;
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], field: Field) -> Result<Self> {
        let mut rd = Reader::new(bytes);
        let failed = rd.u16()? as usize;
        let helper = rd.u16()? as usize;
        let m = rd.u8()? as usize;
        let count = rd.u8()? as usize;
        let (pivots, symbols) = rd.pivots_and_symbols(count, field)?;
        rd.finish()?;
        Ok(RepairPayload {
            failed,
            helper,
            m,
            pivots,
            symbols,
        })
    }
}

/// `R = D·Ξ^{f,m}` as recovered at the failed node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairSpace {
    pub failed: usize,
    pub matrix: FieldMatrix,
}

/// Public per-failure repair state: `Ξ^{f,m}`, its pivot columns, and the
/// index map of the repair equation. Everything here depends only on
/// `(f, m, Ψ)`, never on helper data or the helper set.
#[derive(Clone, Debug)]
pub struct RepairCodec {
    xi: RepairMatrix,
    pivots: PivotColumns,
    // per output symbol I: (row x - 1, column rank of I \ {x}, ind(I, x))
    terms: Vec<Vec<(usize, usize, usize)>>,
}

impl RepairCodec {
    pub fn new(f: usize, m: usize, encoder: &EncoderMatrix) -> Result<Self> {
        let xi = repair_matrix(f, m, encoder)?;
        let pivots = xi.matrix.pivot_columns();
        let terms = xi
            .rows
            .iter()
            .map(|i| {
                i.members()
                    .iter()
                    .map(|&x| {
                        (
                            x - 1,
                            xi.cols.rank_members(i.without(x).members()),
                            i.ind(x),
                        )
                    })
                    .collect()
            })
            .collect();
        Ok(RepairCodec { xi, pivots, terms })
    }

    pub fn repair_matrix(&self) -> &RepairMatrix {
        &self.xi
    }

    pub fn pivots(&self) -> &PivotColumns {
        &self.pivots
    }

    pub fn failed(&self) -> usize {
        self.xi.failed
    }

    /// Full, uncompressed `Ψ_h·D·Ξ^{f,m}`.
    pub fn full_vector(&self, content: &[FieldElement]) -> Result<Vec<FieldElement>> {
        self.xi.matrix.left_mul_vector(content)
    }

    pub fn payload(&self, helper: usize, content: &[FieldElement]) -> Result<RepairPayload> {
        let full = self.full_vector(content)?;
        Ok(RepairPayload {
            failed: self.xi.failed,
            helper,
            m: self.xi.m,
            pivots: self.pivots.pivots.clone(),
            symbols: self.pivots.compress(&full),
        })
    }

    pub fn decompress(&self, payload: &RepairPayload) -> Result<Vec<FieldElement>> {
        if payload.failed != self.xi.failed {
            return Err(Error::WrongTarget {
                expected: self.xi.failed,
                got: payload.failed,
            });
        }
        if payload.pivots != self.pivots.pivots || payload.m != self.xi.m {
            return Err(Error::Format(format!(
                "payload from helper {} does not match the pivot layout of node {}",
                payload.helper, self.xi.failed
            )));
        }
        self.pivots.expand(&payload.symbols, self.xi.matrix.field())
    }

    /// Solves for the repair space given full helper vectors and `Ψ[H, :]⁻¹`.
    pub fn repair_space(
        &self,
        full_vectors: &[Vec<FieldElement>],
        helper_inverse: &FieldMatrix,
    ) -> Result<RepairSpace> {
        let field = self.xi.matrix.field();
        let stacked = FieldMatrix::from_row_vectors(field, full_vectors)?;
        Ok(RepairSpace {
            failed: self.xi.failed,
            matrix: helper_inverse.mul(&stacked)?,
        })
    }

    /// Applies the repair equation to a repair space.
    pub fn regenerate(&self, space: &RepairSpace) -> Vec<FieldElement> {
        let field = space.matrix.field();
        self.terms
            .iter()
            .map(|terms| {
                terms.iter().fold(field.zero(), |acc, &(r, c, k)| {
                    acc + field.sign(k) * space.matrix.get(r, c)
                })
            })
            .collect()
    }

    /// Full vectors from `helpers` (in order) to the regenerated node content.
    pub fn decode_full(
        &self,
        full_vectors: &[Vec<FieldElement>],
        helpers: &[usize],
        encoder: &EncoderMatrix,
    ) -> Result<Vec<FieldElement>> {
        let inverse = helper_inverse(helpers, self.xi.failed, encoder)?;
        Ok(self.regenerate(&self.repair_space(full_vectors, &inverse)?))
    }
}

/// `Ψ[H, :]⁻¹` after checking `|H| = d`, distinctness and `f ∉ H`.
pub fn helper_inverse(
    helpers: &[usize],
    failed: usize,
    encoder: &EncoderMatrix,
) -> Result<FieldMatrix> {
    let d = encoder.d();
    if helpers.len() != d {
        return Err(Error::NotEnoughHelpers {
            need: d,
            have: helpers.len(),
        });
    }
    if helpers.contains(&failed) {
        return Err(Error::OverlapError(failed));
    }
    crate::codec::recovery_inverse(helpers, encoder)
}

/// Repair payload helper `helper` sends for failed node `f`.
pub fn helper_payload(
    helper: usize,
    content: &[FieldElement],
    f: usize,
    encoder: &EncoderMatrix,
    m: usize,
) -> Result<RepairPayload> {
    RepairCodec::new(f, m, encoder)?.payload(helper, content)
}

/// Regenerates `Ψ_f·D` from one payload per helper, aligned with `helpers`.
pub fn decode_failed_node(
    payloads: &[RepairPayload],
    helpers: &[usize],
    encoder: &EncoderMatrix,
    f: usize,
    m: usize,
) -> Result<Vec<FieldElement>> {
    if payloads.len() != helpers.len() {
        return Err(Error::NotEnoughHelpers {
            need: helpers.len(),
            have: payloads.len(),
        });
    }
    let codec = RepairCodec::new(f, m, encoder)?;
    let mut full = Vec::with_capacity(payloads.len());
    for (p, &h) in payloads.iter().zip(helpers) {
        if p.helper != h {
            return Err(Error::Format(format!(
                "payload from helper {} listed as helper {h}",
                p.helper
            )));
        }
        full.push(codec.decompress(p)?);
    }
    codec.decode_full(&full, helpers, encoder)
}

pub(crate) fn to_u16(v: usize) -> Result<u16> {
    u16::try_from(v).map_err(|_| Error::Format(format!("{v} does not fit in u16")))
}

pub(crate) fn write_element(out: &mut Vec<u8>, v: FieldElement, width: usize) {
    out.extend_from_slice(&v.value().to_le_bytes()[..width]);
}

pub(crate) fn write_pivots_and_symbols(
    out: &mut Vec<u8>,
    pivots: &[usize],
    symbols: &[FieldElement],
    field: Field,
) -> Result<()> {
    if pivots.len() != symbols.len() {
        return Err(Error::WrongLength {
            expected: pivots.len(),
            got: symbols.len(),
        });
    }
    for &p in pivots {
        out.extend_from_slice(&to_u16(p)?.to_le_bytes());
    }
    let width = field.element_bytes();
    for &s in symbols {
        write_element(out, s, width);
    }
    Ok(())
}

/// Little-endian cursor over a byte slice.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format(format!("truncated input at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(
            self.take(2)?.try_into().expect("2 bytes"),
        ))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    pub(crate) fn element(&mut self, field: Field) -> Result<FieldElement> {
        let width = field.element_bytes();
        let mut buf = [0u8; 8];
        buf[..width].copy_from_slice(self.take(width)?);
        let v = u64::from_le_bytes(buf);
        if v >= field.modulus() {
            return Err(Error::Format(format!(
                "element {v} not reduced mod {}",
                field.modulus()
            )));
        }
        Ok(field.elem(v))
    }

    pub(crate) fn pivots_and_symbols(
        &mut self,
        count: usize,
        field: Field,
    ) -> Result<(Vec<usize>, Vec<FieldElement>)> {
        let pivots = (0..count)
            .map(|_| self.u16().map(usize::from))
            .collect::<Result<Vec<_>>>()?;
        if pivots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format(
                "pivot indices must be strictly ascending".into(),
            ));
        }
        let symbols = (0..count)
            .map(|_| self.element(field))
            .collect::<Result<Vec<_>>>()?;
        Ok((pivots, symbols))
    }

    pub(crate) fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::Format(format!(
                "{} trailing bytes",
                self.remaining()
            )));
        }
        Ok(())
    }
}

// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

//! Code parameters, the MDS encoder, the message matrix with its parity
//! completion, node encoding and data recovery.
//!
//! The message matrix `D` is `d × C(d, m)`. Its columns are the `m`-subsets of
//! `[d]` in lexicographic order. Entry `(x, I)` holds `v[x, I]` when `x ∈ I`
//! and `w[x, I ∪ {x}]` otherwise. For every `(m+1)`-subset `J` the `w`-symbols
//! satisfy `Σ_{y ∈ J} (-1)^{ind(J, y)} w[y, J] = 0`; the symbol at `max J` is
//! the parity that closes the equation.
//!
//! Source symbols are laid out as all `v`-symbols (subsets in lexicographic
//! order, `x` ascending within a subset) followed by all free `w`-symbols
//! (`(m+1)`-subsets in lexicographic order, `x` ascending, skipping `max J`).

use std::sync::Arc;

use num_rational::Ratio;
use rand::seq::index::sample;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::combin::{binom, subsets_of, SubsetIndexer, SubsetLabel};
use crate::error::{Error, Result};
use crate::galois::{Field, FieldElement, FieldMatrix};

/// Per-node storage `α`, per-helper repair bandwidth `β`, and file size `F`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeParams {
    pub alpha: usize,
    pub beta: usize,
    pub file_size: usize,
}

/// `(α, β, F) = (C(d,m), C(d-1,m-1), m·C(d+1,m+1))`.
pub fn derive_params(d: usize, m: usize) -> Result<CodeParams> {
    if m == 0 || m > d {
        return Err(Error::BadMode { d, m });
    }
    let (d, m) = (d as i64, m as i64);
    Ok(CodeParams {
        alpha: binom(d, m) as usize,
        beta: binom(d - 1, m - 1) as usize,
        file_size: (m as u64 * binom(d + 1, m + 1)) as usize,
    })
}

/// Lower bound on `F` for linear exact-repair `(n, k=d, d)` codes:
/// `(d+1)/(ℓ+2) · (ℓ·α + d·β/(ℓ+1))`, usually evaluated at `ℓ = ⌊dβ/α⌋`.
pub fn tradeoff_bound(d: u64, ell: u64, alpha: u64, beta: u64) -> Ratio<u64> {
    Ratio::new(d + 1, ell + 2) * (Ratio::from_integer(ell * alpha) + Ratio::new(d * beta, ell + 1))
}

/// The bound with `ℓ = ⌊dβ/α⌋` filled in.
pub fn tradeoff_bound_at(d: u64, alpha: u64, beta: u64) -> Ratio<u64> {
    tradeoff_bound(d, (d * beta) / alpha, alpha, beta)
}

/// Normalized corner point `(α/F, β/F) = ((m+1)/(m(d+1)), (m+1)/(d(d+1)))`.
pub fn corner_point(d: usize, m: usize) -> Result<(Ratio<u64>, Ratio<u64>)> {
    let p = derive_params(d, m)?;
    let f = p.file_size as u64;
    Ok((Ratio::new(p.alpha as u64, f), Ratio::new(p.beta as u64, f)))
}

/// Validated `(n, d, m, p)`; the single source of parameter truth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeConfig {
    n: usize,
    d: usize,
    m: usize,
    field: Field,
    params: CodeParams,
}

impl CodeConfig {
    pub fn new(n: usize, d: usize, m: usize, p: u64) -> Result<Self> {
        let field = Field::new(p)?;
        Self::with_field(n, d, m, field)
    }

    pub fn with_field(n: usize, d: usize, m: usize, field: Field) -> Result<Self> {
        let params = derive_params(d, m)?;
        if d >= n {
            return Err(Error::InvalidConfig(format!(
                "need d < n, got d={d}, n={n}"
            )));
        }
        if field.modulus() < n as u64 + 1 {
            return Err(Error::FieldTooSmall {
                p: field.modulus(),
                n,
            });
        }
        if n > u16::MAX as usize {
            return Err(Error::InvalidConfig(format!("n={n} exceeds u16 node ids")));
        }
        Ok(CodeConfig {
            n,
            d,
            m,
            field,
            params,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn k(&self) -> usize {
        self.d
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn field(&self) -> Field {
        self.field
    }
    pub fn params(&self) -> CodeParams {
        self.params
    }
    pub fn alpha(&self) -> usize {
        self.params.alpha
    }
    pub fn beta(&self) -> usize {
        self.params.beta
    }
    pub fn file_size(&self) -> usize {
        self.params.file_size
    }
}

/// The `n × d` encoder `Ψ`. Node ids are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncoderMatrix {
    matrix: FieldMatrix,
    systematic: bool,
}

/// Vandermonde encoder on generators `1..=n`, optionally made systematic by
/// right-multiplying with the inverse of its top `d × d` block.
pub fn build_encoder(n: usize, d: usize, field: Field, systematic: bool) -> Result<EncoderMatrix> {
    if field.modulus() < n as u64 + 1 {
        return Err(Error::FieldTooSmall {
            p: field.modulus(),
            n,
        });
    }
    if d == 0 || d > n {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= d <= n, got d={d}, n={n}"
        )));
    }
    let raw = FieldMatrix::from_fn(field, n, d, |r, c| field.elem(r as u64 + 1).pow(c as u64));
    let matrix = if systematic {
        let top: Vec<usize> = (0..d).collect();
        raw.mul(&raw.select_rows(&top).inverse()?)?
    } else {
        raw
    };
    let enc = EncoderMatrix { matrix, systematic };
    enc.verify_mds()?;
    Ok(enc)
}

impl EncoderMatrix {
    /// Wraps an arbitrary matrix after checking the MDS property.
    pub fn from_matrix(matrix: FieldMatrix) -> Result<Self> {
        let d = matrix.cols();
        let top: Vec<usize> = (0..d.min(matrix.rows())).collect();
        let systematic = matrix.rows() >= d
            && matrix.select_rows(&top) == FieldMatrix::identity(matrix.field(), d);
        let enc = EncoderMatrix { matrix, systematic };
        enc.verify_mds()?;
        Ok(enc)
    }

    /// Every `d × d` row block invertible: exhaustive for `n <= 10`, otherwise
    /// 100 seeded random blocks.
    fn verify_mds(&self) -> Result<()> {
        let (n, d) = (self.n(), self.d());
        let check = |rows: &[usize]| -> Result<()> {
            if self.matrix.select_rows(rows).determinant()?.is_zero() {
                Err(Error::Singular)
            } else {
                Ok(())
            }
        };
        if n <= 10 {
            let all: Vec<usize> = (0..n).collect();
            for s in subsets_of(&all, d, n) {
                check(s.members())?;
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x4d44_5300);
            for _ in 0..100 {
                let mut rows = sample(&mut rng, n, d).into_vec();
                rows.sort_unstable();
                check(&rows)?;
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }
    pub fn is_systematic(&self) -> bool {
        self.systematic
    }
    pub fn n(&self) -> usize {
        self.matrix.rows()
    }
    pub fn d(&self) -> usize {
        self.matrix.cols()
    }
    pub fn field(&self) -> Field {
        self.matrix.field()
    }

    /// `ψ[f, x]`, both 1-based.
    pub fn psi(&self, f: usize, x: usize) -> FieldElement {
        self.matrix.get(f - 1, x - 1)
    }

    /// Row `Ψ_f`.
    pub fn row(&self, f: usize) -> Vec<FieldElement> {
        self.matrix.row(f - 1)
    }

    /// `Ψ[ids, :]`.
    pub fn rows_of(&self, ids: &[usize]) -> Result<FieldMatrix> {
        self.check_ids(ids)?;
        let idx: Vec<usize> = ids.iter().map(|&i| i - 1).collect();
        Ok(self.matrix.select_rows(&idx))
    }

    pub(crate) fn check_ids(&self, ids: &[usize]) -> Result<()> {
        for &i in ids {
            if i == 0 || i > self.n() {
                return Err(Error::OutOfRange(format!(
                    "node id {i} not in [1, {}]",
                    self.n()
                )));
            }
        }
        Ok(())
    }
}

/// Which family a message-matrix entry belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolClass {
    V,
    WSource,
    WParity,
}

/// Where a message-matrix entry comes from: its class and its index, either
/// into the source sequence (`V`, `WSource`) or into the parity list
/// (`WParity`, indexed by the lexicographic rank of the `(m+1)`-subset).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymbolSlot {
    pub class: SymbolClass,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct ParityGroup {
    subset: SubsetLabel,
    // (row, col, ind(J, y)) for every y in J, ascending y; last is the parity cell
    cells: Vec<(usize, usize, usize)>,
}

/// Shape of the message matrix for a given `(d, m)`: column labels, the
/// symbol directory and the parity groups. Shared by every stripe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageLayout {
    d: usize,
    m: usize,
    columns: SubsetIndexer,
    directory: Vec<SymbolSlot>,
    source_cells: Vec<(usize, usize)>,
    parity: Vec<ParityGroup>,
    v_count: usize,
}

impl MessageLayout {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        let params = derive_params(d, m)?;
        let columns = SubsetIndexer::new(d, m)?;
        let alpha = params.alpha;
        let placeholder = SymbolSlot {
            class: SymbolClass::V,
            position: usize::MAX,
        };
        let mut directory = vec![placeholder; d * alpha];
        let mut source_cells = Vec::with_capacity(params.file_size);

        for (col, set) in columns.iter().enumerate() {
            for &x in set.members() {
                directory[(x - 1) * alpha + col] = SymbolSlot {
                    class: SymbolClass::V,
                    position: source_cells.len(),
                };
                source_cells.push((x - 1, col));
            }
        }
        let v_count = source_cells.len();

        let all: Vec<usize> = (1..=d).collect();
        let mut parity = Vec::new();
        for (pi, j) in subsets_of(&all, m + 1, d).into_iter().enumerate() {
            let top = j.max_member().expect("m + 1 >= 2 members");
            let mut cells = Vec::with_capacity(m + 1);
            for &y in j.members() {
                let col = columns.rank_members(j.without(y).members());
                let row = y - 1;
                cells.push((row, col, j.ind(y)));
                directory[row * alpha + col] = if y == top {
                    SymbolSlot {
                        class: SymbolClass::WParity,
                        position: pi,
                    }
                } else {
                    let slot = SymbolSlot {
                        class: SymbolClass::WSource,
                        position: source_cells.len(),
                    };
                    source_cells.push((row, col));
                    slot
                };
            }
            parity.push(ParityGroup { subset: j, cells });
        }
        debug_assert_eq!(source_cells.len(), params.file_size);
        debug_assert!(directory.iter().all(|s| s.position != usize::MAX));

        Ok(MessageLayout {
            d,
            m,
            columns,
            directory,
            source_cells,
            parity,
            v_count,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn alpha(&self) -> usize {
        self.columns.len()
    }
    pub fn file_size(&self) -> usize {
        self.source_cells.len()
    }
    pub fn v_count(&self) -> usize {
        self.v_count
    }
    pub fn w_count(&self) -> usize {
        self.source_cells.len() - self.v_count
    }
    pub fn parity_count(&self) -> usize {
        self.parity.len()
    }
    pub fn columns(&self) -> &SubsetIndexer {
        &self.columns
    }

    /// Directory entry for row `x` (1-based) and column `col` (0-based).
    pub fn slot(&self, x: usize, col: usize) -> SymbolSlot {
        self.directory[(x - 1) * self.alpha() + col]
    }

    /// Lays `source` into `D` and fills the parity cells.
    pub fn build(self: &Arc<Self>, source: &[FieldElement], field: Field) -> Result<MessageMatrix> {
        if source.len() != self.file_size() {
            return Err(Error::WrongLength {
                expected: self.file_size(),
                got: source.len(),
            });
        }
        let mut matrix = FieldMatrix::zeros(field, self.d, self.alpha());
        for (&(r, c), &s) in self.source_cells.iter().zip(source) {
            if s.modulus() != field.modulus() {
                return Err(Error::InvalidConfig(format!(
                    "source symbol over GF({}) given for {field}",
                    s.modulus()
                )));
            }
            matrix.set(r, c, s);
        }
        let sign_m = field.sign(self.m);
        for group in &self.parity {
            let (last, rest) = group.cells.split_last().expect("nonempty group");
            let acc = rest.iter().fold(field.zero(), |acc, &(r, c, k)| {
                acc + field.sign(k) * matrix.get(r, c)
            });
            matrix.set(last.0, last.1, sign_m * acc);
        }
        Ok(MessageMatrix {
            layout: Arc::clone(self),
            matrix,
        })
    }

    /// Wraps an existing `d × α` matrix, checking every parity equation.
    pub fn wrap(self: &Arc<Self>, matrix: FieldMatrix) -> Result<MessageMatrix> {
        if matrix.rows() != self.d || matrix.cols() != self.alpha() {
            return Err(Error::DimensionMismatch(format!(
                "message matrix must be {}x{}, got {}x{}",
                self.d,
                self.alpha(),
                matrix.rows(),
                matrix.cols()
            )));
        }
        let mm = MessageMatrix {
            layout: Arc::clone(self),
            matrix,
        };
        mm.check_parity()?;
        Ok(mm)
    }
}

/// The `d × α` message matrix `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageMatrix {
    layout: Arc<MessageLayout>,
    matrix: FieldMatrix,
}

/// Places `source` (length `F`) into a fresh message matrix for `(d, m)`.
pub fn build_message_matrix(
    source: &[FieldElement],
    d: usize,
    m: usize,
    field: Field,
) -> Result<MessageMatrix> {
    Arc::new(MessageLayout::new(d, m)?).build(source, field)
}

/// Reads the `F` source symbols back out of `D`, verifying parity.
pub fn extract_symbols(message: &MessageMatrix) -> Result<Vec<FieldElement>> {
    message.extract_symbols()
}

impl MessageMatrix {
    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }
    pub fn layout(&self) -> &Arc<MessageLayout> {
        &self.layout
    }
    pub fn column_labels(&self) -> &[SubsetLabel] {
        self.layout.columns.ordering()
    }

    /// `D[x, I]` with 1-based `x`.
    pub fn entry(&self, x: usize, set: &SubsetLabel) -> Result<FieldElement> {
        let col = self.layout.columns.rank(set)?;
        Ok(self.matrix.get(x - 1, col))
    }

    /// `v[x, I]` for `x ∈ I`, `|I| = m`.
    pub fn v(&self, x: usize, set: &SubsetLabel) -> Result<FieldElement> {
        if !set.contains(x) {
            return Err(Error::OutOfRange(format!(
                "v[{x}, {set}] needs {x} in the subset"
            )));
        }
        self.entry(x, set)
    }

    /// `w[x, J]` for `x ∈ J`, `|J| = m + 1`.
    pub fn w(&self, x: usize, set: &SubsetLabel) -> Result<FieldElement> {
        if !set.contains(x) || set.len() != self.layout.m + 1 {
            return Err(Error::OutOfRange(format!(
                "w[{x}, {set}] is not a w-symbol"
            )));
        }
        self.entry(x, &set.without(x))
    }

    pub fn check_parity(&self) -> Result<()> {
        let f = self.matrix.field();
        for group in &self.layout.parity {
            let sum = group.cells.iter().fold(f.zero(), |acc, &(r, c, k)| {
                acc + f.sign(k) * self.matrix.get(r, c)
            });
            if !sum.is_zero() {
                return Err(Error::ParityViolation(group.subset.members().to_vec()));
            }
        }
        Ok(())
    }

    pub fn extract_symbols(&self) -> Result<Vec<FieldElement>> {
        self.check_parity()?;
        Ok(self
            .layout
            .source_cells
            .iter()
            .map(|&(r, c)| self.matrix.get(r, c))
            .collect())
    }
}

/// Node contents `Ψ_i · D` for `i = 1..=n`, each of length `α`.
pub fn encode(encoder: &EncoderMatrix, message: &MessageMatrix) -> Result<Vec<Vec<FieldElement>>> {
    let product = encoder.matrix.mul(&message.matrix)?;
    Ok((0..product.rows()).map(|r| product.row(r)).collect())
}

/// Recovers `D` from the contents of `d` distinct nodes.
pub fn recover_data(
    contents: &[Vec<FieldElement>],
    ids: &[usize],
    encoder: &EncoderMatrix,
    m: usize,
) -> Result<MessageMatrix> {
    let layout = Arc::new(MessageLayout::new(encoder.d(), m)?);
    let inverse = recovery_inverse(ids, encoder)?;
    recover_with_inverse(&layout, &inverse, contents)
}

/// `Ψ[ids, :]⁻¹` after validating the node set.
pub fn recovery_inverse(ids: &[usize], encoder: &EncoderMatrix) -> Result<FieldMatrix> {
    let d = encoder.d();
    if ids.len() != d {
        return Err(Error::NotEnoughHelpers {
            need: d,
            have: ids.len(),
        });
    }
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != ids.len() {
        return Err(Error::InvalidConfig(format!(
            "node ids must be distinct: {ids:?}"
        )));
    }
    encoder.rows_of(ids)?.inverse()
}

/// `D = Ψ[ids, :]⁻¹ · C[ids]` with a precomputed inverse.
pub fn recover_with_inverse(
    layout: &Arc<MessageLayout>,
    inverse: &FieldMatrix,
    contents: &[Vec<FieldElement>],
) -> Result<MessageMatrix> {
    if contents.len() != inverse.cols() || contents.iter().any(|c| c.len() != layout.alpha()) {
        return Err(Error::DimensionMismatch(format!(
            "need {} node contents of length {}",
            inverse.cols(),
            layout.alpha()
        )));
    }
    let stacked = FieldMatrix::from_row_vectors(inverse.field(), contents)?;
    layout.wrap(inverse.mul(&stacked)?)
}

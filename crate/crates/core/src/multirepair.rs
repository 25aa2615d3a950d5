// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

//! Simultaneous repair of several failed nodes.
//!
//! Joint repair: each helper multiplies its content by `Ξ^{E,m}`, the
//! horizontal concatenation of the single-failure matrices, and transmits only
//! the pivot-column entries (at most `β_e` of them). Centralized repair: the
//! failed nodes are restored one after another, and every restored node joins
//! the helper set of the next one at no bandwidth cost.

use num_rational::Ratio;

use crate::codec::EncoderMatrix;
use crate::combin::{binom, subsets_of, SubsetIndexer, SubsetLabel};
use crate::error::{Error, Result};
use crate::galois::{Field, FieldElement, FieldMatrix, PivotColumns};
use crate::ledger::{RepairEvent, RepairMode};
use crate::repair::{helper_inverse, to_u16, write_pivots_and_symbols, Reader, RepairCodec};

/// Contents of several nodes, one `α`-vector each.
pub type NodeContents = Vec<Vec<FieldElement>>;

/// `C(d, m) - C(d - e, m)`.
pub fn beta_e(d: usize, m: usize, e: usize) -> u64 {
    let (d, m) = (d as i64, m as i64);
    binom(d, m) - binom(d - e as i64, m)
}

/// `(m / d) [C(d + 1, m + 1) - C(d - e + 1, m + 1)]`.
pub fn beta_bar_e(d: usize, m: usize, e: usize) -> Ratio<u64> {
    Ratio::new(centralized_total(d, m, e), d as u64)
}

/// `m [C(d + 1, m + 1) - C(d - e + 1, m + 1)]`, the centralized download.
pub fn centralized_total(d: usize, m: usize, e: usize) -> u64 {
    let (d, m) = (d as i64, m as i64);
    m as u64 * (binom(d + 1, m + 1) - binom(d - e as i64 + 1, m + 1))
}

/// `min(e β, α)`: independent single repairs, or shipping whole contents.
pub fn naive_bandwidth(d: usize, m: usize, e: usize) -> u64 {
    let (di, mi) = (d as i64, m as i64);
    (e as u64 * binom(di - 1, mi - 1)).min(binom(di, mi))
}

fn check_failed(failed: &[usize], encoder: &EncoderMatrix) -> Result<()> {
    if failed.is_empty() {
        return Err(Error::InvalidConfig("empty failed set".into()));
    }
    encoder.check_ids(failed)?;
    let mut sorted = failed.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidConfig(format!(
            "failed ids must be distinct: {failed:?}"
        )));
    }
    Ok(())
}

/// `Ξ^{E,m} = [Ξ^{f_1,m} | ... | Ξ^{f_e,m}]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiRepairMatrix {
    failed: Vec<usize>,
    m: usize,
    segment: usize,
    matrix: FieldMatrix,
}

impl MultiRepairMatrix {
    pub fn failed(&self) -> &[usize] {
        &self.failed
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }
    /// Columns per failed node, `C(d, m - 1)`.
    pub fn segment_width(&self) -> usize {
        self.segment
    }
}

pub fn multi_repair_matrix(
    failed: &[usize],
    m: usize,
    encoder: &EncoderMatrix,
) -> Result<MultiRepairMatrix> {
    let codecs = failed
        .iter()
        .map(|&f| RepairCodec::new(f, m, encoder))
        .collect::<Result<Vec<_>>>()?;
    assemble(failed, m, &codecs, encoder)
}

fn assemble(
    failed: &[usize],
    m: usize,
    codecs: &[RepairCodec],
    encoder: &EncoderMatrix,
) -> Result<MultiRepairMatrix> {
    check_failed(failed, encoder)?;
    let blocks: Vec<&FieldMatrix> = codecs.iter().map(|c| c.repair_matrix().matrix()).collect();
    Ok(MultiRepairMatrix {
        failed: failed.to_vec(),
        m,
        segment: blocks[0].cols(),
        matrix: FieldMatrix::hconcat(&blocks)?,
    })
}

/// Left null-space certificate `∇^{E,m}` with `∇ · Ξ^{E,m} = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NullSpaceMatrix {
    failed: Vec<usize>,
    m: usize,
    anchor: SubsetLabel,
    rows: Vec<SubsetLabel>,
    cols: SubsetIndexer,
    matrix: FieldMatrix,
}

impl NullSpaceMatrix {
    pub fn failed(&self) -> &[usize] {
        &self.failed
    }
    pub fn m(&self) -> usize {
        self.m
    }
    /// The set `Q` with `det Ψ[E, Q] != 0`.
    pub fn anchor(&self) -> &SubsetLabel {
        &self.anchor
    }
    /// `m`-subsets of `[d] \ Q`, in lexicographic order.
    pub fn row_labels(&self) -> &[SubsetLabel] {
        &self.rows
    }
    pub fn column_labels(&self) -> &SubsetIndexer {
        &self.cols
    }
    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }
}

fn minor(psi_e: &FieldMatrix, cols: &SubsetLabel) -> Result<FieldElement> {
    let idx: Vec<usize> = cols.members().iter().map(|x| x - 1).collect();
    psi_e.select_columns(&idx).determinant()
}

/// Builds `∇^{E,m}`, anchored at the lexicographically first `e`-subset `Q`
/// of `[d]` with a nonzero minor `det Ψ[E, Q]`.
pub fn null_space_matrix(
    failed: &[usize],
    m: usize,
    encoder: &EncoderMatrix,
) -> Result<NullSpaceMatrix> {
    let d = encoder.d();
    let e = failed.len();
    if e > d {
        return Err(Error::TooManyFailures { e, d });
    }
    if m == 0 || m > d {
        return Err(Error::BadMode { d, m });
    }
    check_failed(failed, encoder)?;
    let psi_e = encoder.rows_of(failed)?;
    let all: Vec<usize> = (1..=d).collect();
    let mut anchor = None;
    for q in subsets_of(&all, e, d) {
        if !minor(&psi_e, &q)?.is_zero() {
            anchor = Some(q);
            break;
        }
    }
    let anchor = anchor.ok_or(Error::Singular)?;
    let rest = anchor.complement();
    let rows = subsets_of(rest.members(), m, d);
    let cols = SubsetIndexer::new(d, m)?;
    let field = encoder.field();
    let mut matrix = FieldMatrix::zeros(field, rows.len(), cols.len());
    for (r, i) in rows.iter().enumerate() {
        let iq = i.union(&anchor);
        for l in subsets_of(iq.members(), m, d) {
            let exponent: usize = l.members().iter().map(|&j| iq.ind(j)).sum();
            let value = field.sign(exponent) * minor(&psi_e, &iq.difference(&l))?;
            matrix.set(r, cols.rank(&l)?, value);
        }
    }
    Ok(NullSpaceMatrix {
        failed: failed.to_vec(),
        m,
        anchor,
        rows,
        cols,
        matrix,
    })
}

/// Compressed joint repair data from one helper. The helper identity is not
/// part of the wire form; callers keep it alongside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointRepairPayload {
    pub failed: Vec<usize>,
    pub m: usize,
    /// indices into the concatenated column space of `Ξ^{E,m}`
    pub pivots: Vec<usize>,
    pub symbols: Vec<FieldElement>,
}

impl JointRepairPayload {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `e: u8`, `e` failed ids as `u16`, `m: u8`, `count: u16`, then
    /// `count` ascending `u16` pivots and `count` field elements.
    pub fn to_bytes(&self, field: Field) -> Result<Vec<u8>> {
        let e =
            u8::try_from(self.failed.len()).map_err(|_| Error::Format("e exceeds u8".into()))?;
        let mut out = vec![e];
        for &f in &self.failed {
            out.extend_from_slice(&to_u16(f)?.to_le_bytes());
        }
        out.push(u8::try_from(self.m).map_err(|_| Error::Format("m exceeds u8".into()))?);
        out.extend_from_slice(&to_u16(self.symbols.len())?.to_le_bytes());
        write_pivots_and_symbols(&mut out, &self.pivots, &self.symbols, field)?;
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], field: Field) -> Result<Self> {
        let mut rd = Reader::new(bytes);
        let e = rd.u8()? as usize;
        let failed = (0..e)
            .map(|_| rd.u16().map(usize::from))
            .collect::<Result<Vec<_>>>()?;
        let m = rd.u8()? as usize;
        let count = rd.u16()? as usize;
        let (pivots, symbols) = rd.pivots_and_symbols(count, field)?;
        rd.finish()?;
        Ok(JointRepairPayload {
            failed,
            m,
            pivots,
            symbols,
        })
    }
}

/// Public joint repair state for one ordered failed set.
#[derive(Clone, Debug)]
pub struct JointRepairCodec {
    xi: MultiRepairMatrix,
    pivots: PivotColumns,
    segments: Vec<RepairCodec>,
}

impl JointRepairCodec {
    pub fn new(failed: &[usize], m: usize, encoder: &EncoderMatrix) -> Result<Self> {
        let segments = failed
            .iter()
            .map(|&f| RepairCodec::new(f, m, encoder))
            .collect::<Result<Vec<_>>>()?;
        Self::from_segments(failed, m, segments, encoder)
    }

    fn from_segments(
        failed: &[usize],
        m: usize,
        segments: Vec<RepairCodec>,
        encoder: &EncoderMatrix,
    ) -> Result<Self> {
        let xi = assemble(failed, m, &segments, encoder)?;
        let pivots = xi.matrix.pivot_columns();
        Ok(JointRepairCodec {
            xi,
            pivots,
            segments,
        })
    }

    pub fn failed(&self) -> &[usize] {
        &self.xi.failed
    }

    pub fn repair_matrix(&self) -> &MultiRepairMatrix {
        &self.xi
    }

    pub fn pivots(&self) -> &PivotColumns {
        &self.pivots
    }

    /// Single-failure codec for the `i`-th failed node.
    pub fn segment(&self, i: usize) -> &RepairCodec {
        &self.segments[i]
    }

    pub fn payload(&self, content: &[FieldElement]) -> Result<JointRepairPayload> {
        let full = self.xi.matrix.left_mul_vector(content)?;
        Ok(JointRepairPayload {
            failed: self.xi.failed.clone(),
            m: self.xi.m,
            pivots: self.pivots.pivots.clone(),
            symbols: self.pivots.compress(&full),
        })
    }

    /// Expands a payload and splits it into one full vector per failed node.
    pub fn decompress(&self, payload: &JointRepairPayload) -> Result<Vec<Vec<FieldElement>>> {
        if payload.failed != self.xi.failed
            || payload.m != self.xi.m
            || payload.pivots != self.pivots.pivots
        {
            return Err(Error::Format(format!(
                "joint payload for {:?} does not match codec for {:?}",
                payload.failed, self.xi.failed
            )));
        }
        let full = self
            .pivots
            .expand(&payload.symbols, self.xi.matrix.field())?;
        Ok(full
            .chunks(self.xi.segment)
            .map(<[FieldElement]>::to_vec)
            .collect())
    }

    /// Restores every failed node from one payload per helper.
    pub fn decode(
        &self,
        payloads: &[JointRepairPayload],
        helpers: &[usize],
        encoder: &EncoderMatrix,
    ) -> Result<Vec<Vec<FieldElement>>> {
        for &f in &self.xi.failed {
            if helpers.contains(&f) {
                return Err(Error::OverlapError(f));
            }
        }
        let inverse = helper_inverse(helpers, self.xi.failed[0], encoder)?;
        self.decode_with_inverse(payloads, &inverse)
    }

    pub fn decode_with_inverse(
        &self,
        payloads: &[JointRepairPayload],
        inverse: &FieldMatrix,
    ) -> Result<Vec<Vec<FieldElement>>> {
        if payloads.len() != inverse.rows() {
            return Err(Error::NotEnoughHelpers {
                need: inverse.rows(),
                have: payloads.len(),
            });
        }
        let split = payloads
            .iter()
            .map(|p| self.decompress(p))
            .collect::<Result<Vec<_>>>()?;
        self.segments
            .iter()
            .enumerate()
            .map(|(i, codec)| {
                let full: Vec<Vec<FieldElement>> = split.iter().map(|s| s[i].clone()).collect();
                Ok(codec.regenerate(&codec.repair_space(&full, inverse)?))
            })
            .collect()
    }
}

pub fn joint_helper_payload(
    content: &[FieldElement],
    failed: &[usize],
    encoder: &EncoderMatrix,
    m: usize,
) -> Result<JointRepairPayload> {
    JointRepairCodec::new(failed, m, encoder)?.payload(content)
}

/// Helper roles of the sequential centralized procedure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentralRepairPlan {
    pub failed: Vec<usize>,
    pub helpers: Vec<usize>,
    pub m: usize,
    /// helper `h_j` serves the failed prefix `f_1 .. f_served[j]`
    pub served: Vec<usize>,
    /// `β_{served[j]}` per helper
    pub bandwidth: Vec<u64>,
}

impl CentralRepairPlan {
    pub fn new(failed: &[usize], helpers: &[usize], d: usize, m: usize) -> Result<Self> {
        let e = failed.len();
        if e == 0 {
            return Err(Error::InvalidConfig("empty failed set".into()));
        }
        if e > d {
            return Err(Error::TooManyFailures { e, d });
        }
        if helpers.len() != d {
            return Err(Error::NotEnoughHelpers {
                need: d,
                have: helpers.len(),
            });
        }
        if let Some(&f) = failed.iter().find(|f| helpers.contains(f)) {
            return Err(Error::OverlapError(f));
        }
        let served: Vec<usize> = (1..=d).map(|j| j.min(e)).collect();
        let bandwidth = served.iter().map(|&s| beta_e(d, m, s)).collect();
        Ok(CentralRepairPlan {
            failed: failed.to_vec(),
            helpers: helpers.to_vec(),
            m,
            served,
            bandwidth,
        })
    }

    pub fn total(&self) -> u64 {
        self.bandwidth.iter().sum()
    }

    /// Helper set used for `f_{i+1}`: `{f_1..f_i} ∪ {h_{i+1}..h_d}`.
    pub fn helpers_for(&self, i: usize) -> Vec<usize> {
        self.failed[..i]
            .iter()
            .chain(&self.helpers[i..])
            .copied()
            .collect()
    }
}

/// Cached state for running one centralized plan over many stripes.
#[derive(Clone, Debug)]
pub struct CentralizedRepairer {
    plan: CentralRepairPlan,
    // prefix codecs: prefixes[j] covers f_1 .. f_{j+1}
    prefixes: Vec<JointRepairCodec>,
    inverses: Vec<FieldMatrix>,
}

impl CentralizedRepairer {
    pub fn new(
        failed: &[usize],
        helpers: &[usize],
        encoder: &EncoderMatrix,
        m: usize,
    ) -> Result<Self> {
        check_failed(failed, encoder)?;
        encoder.check_ids(helpers)?;
        let plan = CentralRepairPlan::new(failed, helpers, encoder.d(), m)?;
        let singles = failed
            .iter()
            .map(|&f| RepairCodec::new(f, m, encoder))
            .collect::<Result<Vec<_>>>()?;
        let prefixes = (1..=failed.len())
            .map(|j| {
                JointRepairCodec::from_segments(&failed[..j], m, singles[..j].to_vec(), encoder)
            })
            .collect::<Result<Vec<_>>>()?;
        let inverses = (0..failed.len())
            .map(|i| helper_inverse(&plan.helpers_for(i), failed[i], encoder))
            .collect::<Result<Vec<_>>>()?;
        Ok(CentralizedRepairer {
            plan,
            prefixes,
            inverses,
        })
    }

    pub fn plan(&self) -> &CentralRepairPlan {
        &self.plan
    }

    /// The payload helper `h_j` (0-based `j`) sends to the repair center.
    pub fn helper_payload(&self, j: usize, content: &[FieldElement]) -> Result<JointRepairPayload> {
        self.prefixes[self.plan.served[j] - 1].payload(content)
    }

    /// Restores all failed nodes of one stripe. `contents` are the helper
    /// contents aligned with the plan's helper list. Returns the restored
    /// contents and the symbols each helper actually transmitted.
    pub fn repair(
        &self,
        contents: &[Vec<FieldElement>],
    ) -> Result<(Vec<Vec<FieldElement>>, Vec<u64>)> {
        let d = self.plan.helpers.len();
        if contents.len() != d {
            return Err(Error::NotEnoughHelpers {
                need: d,
                have: contents.len(),
            });
        }
        let payloads = contents
            .iter()
            .enumerate()
            .map(|(j, c)| self.helper_payload(j, c))
            .collect::<Result<Vec<_>>>()?;
        let sent = payloads.iter().map(|p| p.len() as u64).collect();
        // helper j's segments, indexed by failed position
        let split = payloads
            .iter()
            .enumerate()
            .map(|(j, p)| self.prefixes[self.plan.served[j] - 1].decompress(p))
            .collect::<Result<Vec<_>>>()?;

        let e = self.plan.failed.len();
        let last = &self.prefixes[e - 1];
        let mut restored: Vec<Vec<FieldElement>> = Vec::with_capacity(e);
        for i in 0..e {
            let codec = last.segment(i);
            let mut full = Vec::with_capacity(d);
            // repaired nodes act as helpers inside the center, free of charge
            for r in &restored {
                full.push(codec.full_vector(r)?);
            }
            for s in &split[i..] {
                full.push(s[i].clone());
            }
            let space = codec.repair_space(&full, &self.inverses[i])?;
            restored.push(codec.regenerate(&space));
        }
        Ok((restored, sent))
    }
}

/// Sequential centralized repair of `failed` from `helpers` (contents
/// aligned with `helpers`), with the measured per-helper traffic.
pub fn centralized_repair(
    failed: &[usize],
    helpers: &[usize],
    contents: &[Vec<FieldElement>],
    encoder: &EncoderMatrix,
    m: usize,
) -> Result<(Vec<Vec<FieldElement>>, RepairEvent)> {
    let repairer = CentralizedRepairer::new(failed, helpers, encoder, m)?;
    let (restored, sent) = repairer.repair(contents)?;
    let mut event = RepairEvent::new(RepairMode::Centralized, failed.to_vec(), helpers.to_vec());
    event.add_stripe(&sent)?;
    Ok((restored, event))
}

/// Role assignment of the `d`-fold super-code: helper slot `i` plays role
/// `((i + ℓ - 2) mod d) + 1` of the asymmetric plan in segment `ℓ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupercodeSchedule {
    d: usize,
    e: usize,
    roles: Vec<Vec<usize>>,
}

pub fn supercode_schedule(d: usize, e: usize) -> Result<SupercodeSchedule> {
    if e > d {
        return Err(Error::TooManyFailures { e, d });
    }
    let roles = (1..=d)
        .map(|l| (1..=d).map(|i| (i + l - 2) % d + 1).collect())
        .collect();
    Ok(SupercodeSchedule { d, e, roles })
}

impl SupercodeSchedule {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn e(&self) -> usize {
        self.e
    }

    /// 1-based role of 1-based helper slot `i` in 1-based segment `l`.
    pub fn role(&self, l: usize, i: usize) -> usize {
        self.roles[l - 1][i - 1]
    }

    /// Helper list for segment `l`: position `r - 1` holds the slot playing role `r`.
    pub fn helper_order(&self, l: usize, helpers: &[usize]) -> Vec<usize> {
        let mut order = vec![0; self.d];
        for (i, &r) in self.roles[l - 1].iter().enumerate() {
            order[r - 1] = helpers[i];
        }
        order
    }

    /// Planned symbols per helper slot, summed over all `d` segments.
    pub fn per_helper_totals(&self, m: usize) -> Vec<u64> {
        (1..=self.d)
            .map(|i| {
                (1..=self.d)
                    .map(|l| beta_e(self.d, m, self.role(l, i).min(self.e)))
                    .sum()
            })
            .collect()
    }
}

/// Repairs all `d` segments of the super-code. `segments[l][i]` is helper
/// `helpers[i]`'s content for segment `l + 1`. Returns the restored contents
/// per segment and each helper's measured total.
pub fn supercode_repair(
    failed: &[usize],
    helpers: &[usize],
    segments: &[NodeContents],
    encoder: &EncoderMatrix,
    m: usize,
) -> Result<(Vec<NodeContents>, Vec<u64>)> {
    let d = encoder.d();
    let schedule = supercode_schedule(d, failed.len())?;
    if segments.len() != d {
        return Err(Error::WrongLength {
            expected: d,
            got: segments.len(),
        });
    }
    let mut totals = vec![0u64; helpers.len()];
    let mut restored = Vec::with_capacity(d);
    for (l, seg) in segments.iter().enumerate() {
        let order = schedule.helper_order(l + 1, helpers);
        let contents: Vec<Vec<FieldElement>> = order
            .iter()
            .map(|h| seg[helpers.iter().position(|x| x == h).expect("helper in list")].clone())
            .collect();
        let (out, event) = centralized_repair(failed, &order, &contents, encoder, m)?;
        for (i, &h) in helpers.iter().enumerate() {
            totals[i] += event.sent_by(h).expect("helper in event");
        }
        restored.push(out);
    }
    Ok((restored, totals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{build_encoder, build_message_matrix, encode, MessageMatrix};
    use crate::repair::{decode_failed_node, helper_payload};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf13() -> Field {
        Field::new(13).unwrap()
    }

    fn example(seed: u64) -> (EncoderMatrix, MessageMatrix, Vec<Vec<FieldElement>>) {
        let f = gf13();
        let enc = build_encoder(8, 4, f, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src: Vec<_> = (0..20).map(|_| f.elem(rng.gen_range(0..13))).collect();
        let dm = build_message_matrix(&src, 4, 2, f).unwrap();
        let nodes = encode(&enc, &dm).unwrap();
        (enc, dm, nodes)
    }

    fn set(m: &[usize]) -> SubsetLabel {
        SubsetLabel::new(m.to_vec(), 4).unwrap()
    }

    #[test]
    fn bandwidth_examples() {
        assert_eq!(beta_e(10, 3, 1), 36);
        assert_eq!(beta_e(10, 3, 2), 64);
        assert_eq!(beta_e(10, 3, 8), 120);
        assert_eq!(beta_e(4, 2, 2), 5);
        assert_eq!(beta_bar_e(10, 3, 2), Ratio::new(306, 5));
        assert_eq!(beta_bar_e(10, 3, 8), Ratio::from_integer(99));
        assert_eq!(centralized_total(10, 3, 2), 612);
        assert_eq!(naive_bandwidth(10, 3, 3), 108);
        assert_eq!(naive_bandwidth(10, 3, 4), 120);
    }

    #[test]
    fn single_failure_reductions() {
        for d in 1..=12usize {
            for m in 1..=d {
                let beta = binom(d as i64 - 1, m as i64 - 1);
                assert_eq!(beta_e(d, m, 1), beta);
                assert_eq!(beta_bar_e(d, m, 1), Ratio::from_integer(beta));
            }
        }
    }

    #[test]
    fn telescoping_identity() {
        for d in 1..=12usize {
            for m in 1..=d {
                for e in 1..=d {
                    let lhs: u64 = (1..=e).map(|j| beta_e(d, m, j)).sum::<u64>()
                        + (d - e) as u64 * beta_e(d, m, e);
                    assert_eq!(lhs, centralized_total(d, m, e), "d={d} m={m} e={e}");
                }
            }
        }
    }

    #[test]
    fn monotone_and_capped() {
        for d in 1..=12usize {
            for m in 1..=d {
                let alpha = binom(d as i64, m as i64);
                let cap = Ratio::new((m * (d + 1)) as u64, (d * (m + 1)) as u64);
                let mut prev = 0;
                for e in 1..=d + 2 {
                    let b = beta_e(d, m, e);
                    assert!(b >= prev && b <= alpha);
                    prev = b;
                    assert!(beta_bar_e(d, m, e.min(d)) / alpha <= cap);
                }
                assert_eq!(beta_bar_e(d, m, d) / alpha, cap);
            }
        }
    }

    #[test]
    fn two_failure_matrix() {
        let (enc, _, _) = example(0);
        let xi = multi_repair_matrix(&[5, 6], 2, &enc).unwrap();
        assert_eq!((xi.matrix().rows(), xi.matrix().cols()), (6, 8));
        assert_eq!(xi.matrix().rank(), 5);
        let psi = |f, x| enc.psi(f, x);
        // row {2,4}: 0, ψ_{f1,4}, 0, -ψ_{f1,2} | 0, ψ_{f2,4}, 0, -ψ_{f2,2}
        let z = gf13().zero();
        assert_eq!(
            xi.matrix().row(4),
            vec![z, psi(5, 4), z, -psi(5, 2), z, psi(6, 4), z, -psi(6, 2)]
        );
        let single = repair_matrix_of(5, &enc);
        assert_eq!(
            multi_repair_matrix(&[5], 2, &enc).unwrap().matrix(),
            &single
        );
        assert!(multi_repair_matrix(&[5, 5], 2, &enc).is_err());
    }

    fn repair_matrix_of(f: usize, enc: &EncoderMatrix) -> FieldMatrix {
        crate::repair::repair_matrix(f, 2, enc)
            .unwrap()
            .matrix()
            .clone()
    }

    #[test]
    fn null_space_example_entry() {
        let (enc, _, _) = example(0);
        let ns = null_space_matrix(&[5, 6], 2, &enc).unwrap();
        assert_eq!(ns.anchor(), &set(&[1, 2]));
        assert_eq!(ns.row_labels(), &[set(&[3, 4])]);
        let psi = |f, x| enc.psi(f, x);
        let row = ns.matrix().row(0);
        assert_eq!(row[0], psi(5, 4) * psi(6, 3) - psi(5, 3) * psi(6, 4));
        assert_eq!(row[1], psi(5, 2) * psi(6, 4) - psi(5, 4) * psi(6, 2));
        assert_eq!(row[2], psi(5, 3) * psi(6, 2) - psi(5, 2) * psi(6, 3));
        assert_eq!(row[3], psi(5, 4) * psi(6, 1) - psi(5, 1) * psi(6, 4));
        assert_eq!(row[4], psi(5, 1) * psi(6, 3) - psi(5, 3) * psi(6, 1));
        assert_eq!(row[5], psi(5, 2) * psi(6, 1) - psi(5, 1) * psi(6, 2));

        // column {3} of the second segment, via a 3x3 determinant with a repeated row
        let xi = multi_repair_matrix(&[5, 6], 2, &enc).unwrap();
        let col = xi.matrix().column(6);
        let dot = row
            .iter()
            .zip(&col)
            .fold(gf13().zero(), |a, (&x, &y)| a + x * y);
        assert!(dot.is_zero());
        let rep = FieldMatrix::from_fn(gf13(), 3, 3, |r, c| {
            let f = [6, 5, 6][r];
            psi(f, [1, 2, 4][c])
        });
        assert!(rep.determinant().unwrap().is_zero());
        let expanded = -(psi(6, 1) * (psi(5, 2) * psi(6, 4) - psi(5, 4) * psi(6, 2)))
            + psi(6, 2) * (psi(5, 1) * psi(6, 4) - psi(5, 4) * psi(6, 1))
            - psi(6, 4) * (psi(5, 1) * psi(6, 2) - psi(5, 2) * psi(6, 1));
        assert!(expanded.is_zero());
    }

    #[test]
    fn certificates_exhaustive_d4() {
        let enc = build_encoder(8, 4, gf13(), true).unwrap();
        let non_systematic = [5usize, 6, 7, 8];
        for m in 1..=4 {
            for e in 1..=4 {
                for ee in subsets_of(&non_systematic, e, 8) {
                    let failed = ee.members();
                    let xi = multi_repair_matrix(failed, m, &enc).unwrap();
                    let ns = null_space_matrix(failed, m, &enc).unwrap();
                    assert_eq!(ns.matrix().rows() as u64, binom(4 - e as i64, m as i64));
                    if ns.matrix().rows() > 0 {
                        assert!(ns.matrix().mul(xi.matrix()).unwrap().is_zero());
                        assert_eq!(ns.matrix().rank() as u64, binom(4 - e as i64, m as i64));
                    }
                    assert!(xi.matrix().rank() as u64 <= beta_e(4, m, e));
                }
            }
        }
        assert_eq!(
            null_space_matrix(&[1, 2, 3, 4, 5], 2, &enc),
            Err(Error::TooManyFailures { e: 5, d: 4 })
        );
    }

    #[test]
    fn certificates_d6() {
        let enc = build_encoder(12, 6, Field::new(13).unwrap(), true).unwrap();
        for failed in [vec![7], vec![8, 11], vec![7, 9, 12], vec![1, 10, 12]] {
            let xi = multi_repair_matrix(&failed, 3, &enc).unwrap();
            let ns = null_space_matrix(&failed, 3, &enc).unwrap();
            assert!(ns.matrix().mul(xi.matrix()).unwrap().is_zero());
            assert_eq!(ns.matrix().rank() as u64, binom(6 - failed.len() as i64, 3));
            assert!(xi.matrix().rank() as u64 <= beta_e(6, 3, failed.len()));
        }
    }

    #[test]
    fn helper_one_joint_symbols() {
        let (enc, dm, nodes) = example(9);
        let (w, v) = (
            |s: &[usize]| dm.w(1, &set(s)).unwrap(),
            |s: &[usize]| dm.v(1, &set(s)).unwrap(),
        );
        let (f1, f2) = (5, 6);
        let codec = JointRepairCodec::new(&[f1, f2], 2, &enc).unwrap();
        let p = codec.payload(&nodes[0]).unwrap();
        assert_eq!(p.len(), 5);
        let full: Vec<FieldElement> = codec.decompress(&p).unwrap().concat();
        let psi = |f, x| enc.psi(f, x);
        let mut hand = Vec::new();
        for f in [f1, f2] {
            hand.push(psi(f, 2) * v(&[1, 2]) + psi(f, 3) * v(&[1, 3]) + psi(f, 4) * v(&[1, 4]));
            hand.push(
                -(psi(f, 1) * v(&[1, 2])) + psi(f, 3) * w(&[1, 2, 3]) + psi(f, 4) * w(&[1, 2, 4]),
            );
            hand.push(
                -(psi(f, 1) * v(&[1, 3])) - psi(f, 2) * w(&[1, 2, 3]) + psi(f, 4) * w(&[1, 3, 4]),
            );
            hand.push(
                -(psi(f, 1) * v(&[1, 4])) - psi(f, 2) * w(&[1, 2, 4]) - psi(f, 3) * w(&[1, 3, 4]),
            );
        }
        assert_eq!(full, hand);

        // the hand-picked subset {2,3,4,6,7} is also a basis
        let cols = codec
            .repair_matrix()
            .matrix()
            .select_columns(&[1, 2, 3, 5, 6]);
        assert_eq!(cols.rank(), 5);
        let s = |i: usize| hand[i - 1];
        let r = |a: FieldElement, b: FieldElement| a * b.inv().unwrap();
        let sym1 = -(r(psi(f1, 2), psi(f1, 1)) * s(2))
            - r(psi(f1, 3), psi(f1, 1)) * s(3)
            - r(psi(f1, 4), psi(f1, 1)) * s(4);
        assert_eq!(sym1, s(1));
        let sym5 = -(r(psi(f2, 2), psi(f2, 1)) * s(6))
            - r(psi(f2, 3), psi(f2, 1)) * s(7)
            - r(psi(f2, 4), psi(f2, 1)) * s(8);
        assert_eq!(sym5, s(5));
        let a = |x: usize| psi(f1, 1) * psi(f2, x) - psi(f1, x) * psi(f2, 1);
        let den = psi(f1, 1) * a(4);
        let sym8 = r(psi(f2, 1) * a(2), den) * s(2)
            + r(psi(f2, 1) * a(3), den) * s(3)
            + r(psi(f2, 1), psi(f1, 1)) * s(4)
            + r(a(2), -a(4)) * s(6)
            + r(a(3), -a(4)) * s(7);
        assert_eq!(sym8, s(8));
    }

    #[test]
    fn joint_equals_single_when_e_is_one() {
        let (enc, _, nodes) = example(5);
        for f in 5..=8 {
            let single = helper_payload(2, &nodes[1], f, &enc, 2).unwrap();
            let joint = joint_helper_payload(&nodes[1], &[f], &enc, 2).unwrap();
            assert_eq!(
                (single.pivots, single.symbols),
                (joint.pivots, joint.symbols)
            );
        }
    }

    #[test]
    fn joint_decode_matches_single_repairs() {
        let (enc, _, nodes) = example(6);
        let all: Vec<usize> = (1..=8).collect();
        for e in 2..=3 {
            for ee in subsets_of(&all, e, 8) {
                let failed = ee.members();
                let codec = JointRepairCodec::new(failed, 2, &enc).unwrap();
                let alive: Vec<usize> = all
                    .iter()
                    .copied()
                    .filter(|x| !failed.contains(x))
                    .collect();
                for hh in subsets_of(&alive, 4, 8) {
                    let helpers = hh.members();
                    let payloads: Vec<_> = helpers
                        .iter()
                        .map(|&h| codec.payload(&nodes[h - 1]).unwrap())
                        .collect();
                    assert!(payloads.iter().all(|p| p.len() as u64 <= beta_e(4, 2, e)));
                    let out = codec.decode(&payloads, helpers, &enc).unwrap();
                    for (i, &f) in failed.iter().enumerate() {
                        assert_eq!(out[i], nodes[f - 1]);
                        let singles: Vec<_> = helpers
                            .iter()
                            .map(|&h| helper_payload(h, &nodes[h - 1], f, &enc, 2).unwrap())
                            .collect();
                        assert_eq!(
                            decode_failed_node(&singles, helpers, &enc, f, 2).unwrap(),
                            out[i]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn joint_wire_format() {
        let (enc, _, nodes) = example(8);
        let p = joint_helper_payload(&nodes[2], &[5, 8], &enc, 2).unwrap();
        let bytes = p.to_bytes(gf13()).unwrap();
        assert_eq!(&bytes[..8], &[2, 5, 0, 8, 0, 2, 5, 0]);
        assert_eq!(bytes.len(), 8 + 2 * 5 + 5);
        assert_eq!(JointRepairPayload::from_bytes(&bytes, gf13()).unwrap(), p);
        assert!(JointRepairPayload::from_bytes(&bytes[..7], gf13()).is_err());
    }

    #[test]
    fn centralized_exhaustive_n8() {
        let (enc, _, nodes) = example(7);
        let all: Vec<usize> = (1..=8).collect();
        for e in 2..=3 {
            for ee in subsets_of(&all, e, 8) {
                let failed = ee.members();
                let alive: Vec<usize> = all
                    .iter()
                    .copied()
                    .filter(|x| !failed.contains(x))
                    .collect();
                for hh in subsets_of(&alive, 4, 8) {
                    let helpers = hh.members();
                    let contents: Vec<_> = helpers.iter().map(|&h| nodes[h - 1].clone()).collect();
                    let (out, event) =
                        centralized_repair(failed, helpers, &contents, &enc, 2).unwrap();
                    for (i, &f) in failed.iter().enumerate() {
                        assert_eq!(out[i], nodes[f - 1]);
                    }
                    assert_eq!(event.total(), centralized_total(4, 2, e));
                    assert!(event.within_bounds(4, 2));
                }
            }
        }
    }

    #[test]
    fn centralized_errors() {
        let (enc, _, nodes) = example(7);
        let contents: Vec<_> = nodes[..4].to_vec();
        assert_eq!(
            centralized_repair(&[5, 2], &[1, 2, 3, 4], &contents, &enc, 2).unwrap_err(),
            Error::OverlapError(2)
        );
        assert!(matches!(
            centralized_repair(&[5], &[1, 2, 3], &contents[..3], &enc, 2),
            Err(Error::NotEnoughHelpers { .. })
        ));
    }

    #[test]
    fn plan_helper_sets() {
        let plan = CentralRepairPlan::new(&[11, 12, 13], &[1, 2, 3, 4, 5], 5, 2).unwrap();
        assert_eq!(plan.served, vec![1, 2, 3, 3, 3]);
        assert_eq!(plan.helpers_for(0), vec![1, 2, 3, 4, 5]);
        assert_eq!(plan.helpers_for(2), vec![11, 12, 3, 4, 5]);
        assert_eq!(plan.total(), centralized_total(5, 2, 3));
    }

    #[test]
    fn schedule_rotation() {
        let s = supercode_schedule(4, 2).unwrap();
        assert_eq!(
            (1..=4).map(|i| s.role(1, i)).collect::<Vec<_>>(),
            vec![1, 2, 3, 4]
        );
        assert_eq!(
            (1..=4).map(|i| s.role(2, i)).collect::<Vec<_>>(),
            vec![2, 3, 4, 1]
        );
        assert_eq!(s.helper_order(2, &[10, 20, 30, 40]), vec![40, 10, 20, 30]);
        for l in 1..=4 {
            let mut roles: Vec<_> = (1..=4).map(|i| s.role(l, i)).collect();
            roles.sort_unstable();
            assert_eq!(roles, vec![1, 2, 3, 4]);
        }
        let t = supercode_schedule(10, 2).unwrap().per_helper_totals(3);
        assert!(t.iter().all(|&x| x == 612));
        assert!(supercode_schedule(10, 1)
            .unwrap()
            .per_helper_totals(3)
            .iter()
            .all(|&x| x == 360));
        assert!(supercode_schedule(3, 4).is_err());
    }

    #[test]
    fn supercode_data_plane() {
        let f = gf13();
        let enc = build_encoder(8, 4, f, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let nodes: Vec<Vec<Vec<FieldElement>>> = (0..4)
            .map(|_| {
                let src: Vec<_> = (0..20).map(|_| f.elem(rng.gen_range(0..13))).collect();
                encode(&enc, &build_message_matrix(&src, 4, 2, f).unwrap()).unwrap()
            })
            .collect();
        let (failed, helpers) = ([6usize, 2], [1usize, 8, 3, 5]);
        let segments: Vec<Vec<Vec<FieldElement>>> = nodes
            .iter()
            .map(|seg| helpers.iter().map(|&h| seg[h - 1].clone()).collect())
            .collect();
        let (restored, totals) = supercode_repair(&failed, &helpers, &segments, &enc, 2).unwrap();
        for (l, seg) in restored.iter().enumerate() {
            assert_eq!(seg[0], nodes[l][5]);
            assert_eq!(seg[1], nodes[l][1]);
        }
        assert!(totals.iter().all(|&t| t == centralized_total(4, 2, 2)));
    }
}

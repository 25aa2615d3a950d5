// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

//! In-process storage cluster: byte ingestion, failure injection, repair
//! orchestration and bandwidth accounting.
//!
//! A file is cut into stripes of `F` bytes (the last one zero-padded), each
//! byte becoming one element of GF(p) with `p >= 257`. Every stripe is an
//! independent message matrix; node `i` stores `Ψ_i·D_s` for every stripe `s`.
//! The encoder is always the systematic one, so shards only need to record
//! `(p, n, d, m)`.

mod shard;
mod tables;

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

pub use crate::ledger::{BandwidthLedger, RepairEvent, RepairMode};
pub use shard::{shard_file_name, ShardFile, FORMAT_VERSION, HEADER_LEN, MAGIC};
pub use tables::{
    bandwidth_csv, bandwidth_table, capacity_csv, capacity_curve, format_ratio, BandwidthCurve,
    BandwidthRow, CapacityRow,
};

use crate::codec::{
    build_encoder, encode, recover_with_inverse, CodeConfig, EncoderMatrix, MessageLayout,
    MessageMatrix,
};
use crate::error::{Error, Result};
use crate::galois::{FieldElement, FieldMatrix};
use crate::multirepair::{CentralizedRepairer, JointRepairCodec, JointRepairPayload};
use crate::repair::{helper_inverse, RepairCodec, RepairPayload};

type Stripes = Vec<Vec<FieldElement>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeState {
    Alive(Stripes),
    Failed,
}

impl NodeState {
    pub fn is_alive(&self) -> bool {
        matches!(self, NodeState::Alive(_))
    }
}

/// Splits `bytes` into zero-padded stripes of `F` symbols, one message
/// matrix per stripe.
pub fn ingest_file(bytes: &[u8], config: &CodeConfig) -> Result<Vec<MessageMatrix>> {
    let field = config.field();
    if field.modulus() < 257 {
        return Err(Error::FieldTooSmallForBytes(field.modulus()));
    }
    let layout = Arc::new(MessageLayout::new(config.d(), config.m())?);
    let f = config.file_size();
    bytes
        .chunks(f)
        .map(|chunk| {
            let mut source: Vec<FieldElement> =
                chunk.iter().map(|&b| field.elem(b as u64)).collect();
            source.resize(f, field.zero());
            layout.build(&source, field)
        })
        .collect()
}

#[derive(Default, Clone, Debug)]
struct CodecCache {
    single: HashMap<usize, Arc<RepairCodec>>,
    joint: HashMap<Vec<usize>, Arc<JointRepairCodec>>,
    central: HashMap<(Vec<usize>, Vec<usize>), Arc<CentralizedRepairer>>,
    inverses: HashMap<Vec<usize>, Arc<FieldMatrix>>,
}

#[derive(Clone, Debug)]
pub struct Cluster {
    config: CodeConfig,
    encoder: EncoderMatrix,
    layout: Arc<MessageLayout>,
    nodes: Vec<NodeState>,
    stripes: usize,
    original_len: u64,
    ledger: BandwidthLedger,
    cache: CodecCache,
}

impl Cluster {
    /// Stores `bytes` on a fresh cluster with every node alive.
    pub fn from_bytes(config: CodeConfig, bytes: &[u8]) -> Result<Self> {
        let messages = ingest_file(bytes, &config)?;
        let encoder = build_encoder(config.n(), config.d(), config.field(), true)?;
        let mut nodes = vec![Vec::with_capacity(messages.len()); config.n()];
        for msg in &messages {
            for (node, row) in nodes.iter_mut().zip(encode(&encoder, msg)?) {
                node.push(row);
            }
        }
        Ok(Cluster {
            layout: Arc::new(MessageLayout::new(config.d(), config.m())?),
            config,
            encoder,
            nodes: nodes.into_iter().map(NodeState::Alive).collect(),
            stripes: messages.len(),
            original_len: bytes.len() as u64,
            ledger: BandwidthLedger::new(),
            cache: CodecCache::default(),
        })
    }

    /// Rebuilds a cluster from shards; nodes without a shard are failed.
    pub fn from_shards(shards: Vec<ShardFile>) -> Result<Self> {
        let first = shards
            .first()
            .ok_or_else(|| Error::InvalidConfig("no shards given".into()))?;
        let (config, original_len, stripes) =
            (first.config, first.original_len, first.stripes.len());
        let mut nodes = vec![NodeState::Failed; config.n()];
        for s in shards {
            if s.config != config || s.original_len != original_len || s.stripes.len() != stripes {
                return Err(Error::Format(format!(
                    "shard for node {} disagrees with the others",
                    s.node
                )));
            }
            if nodes[s.node - 1].is_alive() {
                return Err(Error::Format(format!(
                    "duplicate shard for node {}",
                    s.node
                )));
            }
            nodes[s.node - 1] = NodeState::Alive(s.stripes);
        }
        Ok(Cluster {
            encoder: build_encoder(config.n(), config.d(), config.field(), true)?,
            layout: Arc::new(MessageLayout::new(config.d(), config.m())?),
            config,
            nodes,
            stripes,
            original_len,
            ledger: BandwidthLedger::new(),
            cache: CodecCache::default(),
        })
    }

    pub fn config(&self) -> &CodeConfig {
        &self.config
    }

    pub fn encoder(&self) -> &EncoderMatrix {
        &self.encoder
    }

    pub fn stripes(&self) -> usize {
        self.stripes
    }

    pub fn original_len(&self) -> u64 {
        self.original_len
    }

    pub fn ledger(&self) -> &BandwidthLedger {
        &self.ledger
    }

    pub fn node_state(&self, id: usize) -> Result<&NodeState> {
        self.encoder.check_ids(&[id])?;
        Ok(&self.nodes[id - 1])
    }

    pub fn alive(&self) -> Vec<usize> {
        (1..=self.config.n())
            .filter(|&i| self.nodes[i - 1].is_alive())
            .collect()
    }

    pub fn failed(&self) -> Vec<usize> {
        (1..=self.config.n())
            .filter(|&i| !self.nodes[i - 1].is_alive())
            .collect()
    }

    pub fn content(&self, id: usize) -> Result<&[Vec<FieldElement>]> {
        match self.node_state(id)? {
            NodeState::Alive(s) => Ok(s),
            NodeState::Failed => Err(Error::NodeUnavailable(id)),
        }
    }

    pub fn shard(&self, id: usize) -> Result<ShardFile> {
        Ok(ShardFile {
            config: self.config,
            node: id,
            original_len: self.original_len,
            stripes: self.content(id)?.to_vec(),
        })
    }

    /// Writes one shard file per alive node.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for id in self.alive() {
            self.shard(id)?.write_to_dir(dir)?;
        }
        Ok(())
    }

    /// Loads every `node_<id>.detc` in `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let mut shards = Vec::new();
        let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<Vec<_>>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if name.starts_with("node_") && name.ends_with(".detc") {
                shards.push(ShardFile::read(&entry.path())?);
            }
        }
        Self::from_shards(shards)
    }

    pub fn fail_nodes(&mut self, ids: &[usize]) -> Result<()> {
        self.encoder.check_ids(ids)?;
        for &id in ids {
            self.nodes[id - 1] = NodeState::Failed;
        }
        Ok(())
    }

    fn default_helpers(&self, failed: &[usize]) -> Result<Vec<usize>> {
        let d = self.config.d();
        let candidates: Vec<usize> = self
            .alive()
            .into_iter()
            .filter(|h| !failed.contains(h))
            .collect();
        if candidates.len() < d {
            return Err(Error::NotEnoughHelpers {
                need: d,
                have: candidates.len(),
            });
        }
        Ok(candidates[..d].to_vec())
    }

    fn check_request(&self, mode: RepairMode, failed: &[usize], helpers: &[usize]) -> Result<()> {
        let (n, d) = (self.config.n(), self.config.d());
        let e = failed.len();
        if e == 0 {
            return Err(Error::InvalidConfig("nothing to repair".into()));
        }
        if mode == RepairMode::Single && e != 1 {
            return Err(Error::InvalidConfig(format!(
                "single repair takes one node, got {e}"
            )));
        }
        self.encoder.check_ids(failed)?;
        self.encoder.check_ids(helpers)?;
        let mut sorted = failed.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != e {
            return Err(Error::InvalidConfig(format!(
                "failed ids must be distinct: {failed:?}"
            )));
        }
        if e > n - d {
            return Err(Error::NotEnoughHelpers {
                need: d,
                have: n - e,
            });
        }
        if let Some(&f) = failed.iter().find(|f| helpers.contains(f)) {
            return Err(Error::OverlapError(f));
        }
        if helpers.len() != d {
            return Err(Error::NotEnoughHelpers {
                need: d,
                have: helpers.len(),
            });
        }
        let mut hs = helpers.to_vec();
        hs.sort_unstable();
        hs.dedup();
        if hs.len() != d {
            return Err(Error::InvalidConfig(format!(
                "helper ids must be distinct: {helpers:?}"
            )));
        }
        if let Some(&h) = helpers.iter().find(|&&h| !self.nodes[h - 1].is_alive()) {
            return Err(Error::NodeUnavailable(h));
        }
        Ok(())
    }

    /// Restores `failed` from `helpers` (default: the first `d` alive nodes
    /// outside `failed`) and records the measured traffic.
    pub fn repair(
        &mut self,
        mode: RepairMode,
        failed: &[usize],
        helpers: Option<&[usize]>,
    ) -> Result<&RepairEvent> {
        let helpers = match helpers {
            Some(h) => h.to_vec(),
            None => self.default_helpers(failed)?,
        };
        self.check_request(mode, failed, &helpers)?;
        let mut event = RepairEvent::new(mode, failed.to_vec(), helpers.clone());
        let mut restored: Vec<Stripes> = vec![Vec::with_capacity(self.stripes); failed.len()];
        for s in 0..self.stripes {
            let contents = helpers
                .iter()
                .map(|&h| self.content(h).map(|c| c[s].clone()))
                .collect::<Result<Vec<_>>>()?;
            let (out, sent) = match mode {
                RepairMode::Single => self.single_stripe(failed[0], &helpers, &contents)?,
                RepairMode::Naive => self.naive_stripe(failed, &helpers, &contents)?,
                RepairMode::Joint => self.joint_stripe(failed, &helpers, &contents)?,
                RepairMode::Centralized => self.central_stripe(failed, &helpers, &contents)?,
            };
            event.add_stripe(&sent)?;
            for (acc, v) in restored.iter_mut().zip(out) {
                acc.push(v);
            }
        }
        for (&f, content) in failed.iter().zip(restored) {
            self.nodes[f - 1] = NodeState::Alive(content);
        }
        self.ledger.record(event);
        Ok(self.ledger.last().expect("just recorded"))
    }

    fn single_codec(&mut self, f: usize) -> Result<Arc<RepairCodec>> {
        if let Some(c) = self.cache.single.get(&f) {
            return Ok(Arc::clone(c));
        }
        let c = Arc::new(RepairCodec::new(f, self.config.m(), &self.encoder)?);
        self.cache.single.insert(f, Arc::clone(&c));
        Ok(c)
    }

    fn inverse(&mut self, helpers: &[usize], failed: usize) -> Result<Arc<FieldMatrix>> {
        if let Some(inv) = self.cache.inverses.get(helpers) {
            return Ok(Arc::clone(inv));
        }
        let inv = Arc::new(helper_inverse(helpers, failed, &self.encoder)?);
        self.cache
            .inverses
            .insert(helpers.to_vec(), Arc::clone(&inv));
        Ok(inv)
    }

    fn single_stripe(
        &mut self,
        f: usize,
        helpers: &[usize],
        contents: &[Vec<FieldElement>],
    ) -> Result<(Vec<Vec<FieldElement>>, Vec<u64>)> {
        let codec = self.single_codec(f)?;
        let inverse = self.inverse(helpers, f)?;
        let field = self.config.field();
        let mut full = Vec::with_capacity(helpers.len());
        let mut sent = Vec::with_capacity(helpers.len());
        for (&h, c) in helpers.iter().zip(contents) {
            let wire = codec.payload(h, c)?.to_bytes(field)?;
            let received = RepairPayload::from_bytes(&wire, field)?;
            sent.push(received.len() as u64);
            full.push(codec.decompress(&received)?);
        }
        let space = codec.repair_space(&full, &inverse)?;
        Ok((vec![codec.regenerate(&space)], sent))
    }

    fn naive_stripe(
        &mut self,
        failed: &[usize],
        helpers: &[usize],
        contents: &[Vec<FieldElement>],
    ) -> Result<(Vec<Vec<FieldElement>>, Vec<u64>)> {
        let (alpha, beta) = (self.config.alpha(), self.config.beta());
        if failed.len() * beta < alpha {
            let mut out = Vec::with_capacity(failed.len());
            let mut sent = vec![0u64; helpers.len()];
            for &f in failed {
                let (node, s) = self.single_stripe(f, helpers, contents)?;
                out.extend(node);
                for (a, b) in sent.iter_mut().zip(s) {
                    *a += b;
                }
            }
            return Ok((out, sent));
        }
        // whole contents are no more expensive: rebuild D and re-encode
        let inverse = self.inverse(helpers, failed[0])?;
        let message = recover_with_inverse(&self.layout, &inverse, contents)?;
        let psi_f = self.encoder.rows_of(failed)?;
        let product = psi_f.mul(message.matrix())?;
        let out = (0..failed.len()).map(|r| product.row(r)).collect();
        Ok((out, vec![alpha as u64; helpers.len()]))
    }

    fn joint_stripe(
        &mut self,
        failed: &[usize],
        helpers: &[usize],
        contents: &[Vec<FieldElement>],
    ) -> Result<(Vec<Vec<FieldElement>>, Vec<u64>)> {
        let codec = match self.cache.joint.get(failed) {
            Some(c) => Arc::clone(c),
            None => {
                let c = Arc::new(JointRepairCodec::new(
                    failed,
                    self.config.m(),
                    &self.encoder,
                )?);
                self.cache.joint.insert(failed.to_vec(), Arc::clone(&c));
                c
            }
        };
        let inverse = self.inverse(helpers, failed[0])?;
        let field = self.config.field();
        let mut payloads = Vec::with_capacity(helpers.len());
        for c in contents {
            let wire = codec.payload(c)?.to_bytes(field)?;
            payloads.push(JointRepairPayload::from_bytes(&wire, field)?);
        }
        let sent = payloads.iter().map(|p| p.len() as u64).collect();
        Ok((codec.decode_with_inverse(&payloads, &inverse)?, sent))
    }

    fn central_stripe(
        &mut self,
        failed: &[usize],
        helpers: &[usize],
        contents: &[Vec<FieldElement>],
    ) -> Result<(Vec<Vec<FieldElement>>, Vec<u64>)> {
        let key = (failed.to_vec(), helpers.to_vec());
        let repairer = match self.cache.central.get(&key) {
            Some(r) => Arc::clone(r),
            None => {
                let r = Arc::new(CentralizedRepairer::new(
                    failed,
                    helpers,
                    &self.encoder,
                    self.config.m(),
                )?);
                self.cache.central.insert(key, Arc::clone(&r));
                r
            }
        };
        repairer.repair(contents)
    }

    /// Rebuilds the stored message matrices from `nodes` (default: the first
    /// `d` alive nodes).
    pub fn recover_messages(&self, nodes: Option<&[usize]>) -> Result<Vec<MessageMatrix>> {
        let d = self.config.d();
        let ids = match nodes {
            Some(ids) => ids.to_vec(),
            None => {
                let alive = self.alive();
                if alive.len() < d {
                    return Err(Error::NotEnoughHelpers {
                        need: d,
                        have: alive.len(),
                    });
                }
                alive[..d].to_vec()
            }
        };
        let inverse = crate::codec::recovery_inverse(&ids, &self.encoder)?;
        let contents = ids
            .iter()
            .map(|&i| self.content(i))
            .collect::<Result<Vec<_>>>()?;
        (0..self.stripes)
            .map(|s| {
                let stripe: Vec<_> = contents.iter().map(|c| c[s].clone()).collect();
                recover_with_inverse(&self.layout, &inverse, &stripe)
            })
            .collect()
    }

    /// Reassembles the original bytes from `nodes` (default: any `d` alive).
    pub fn recover_file(&self, nodes: Option<&[usize]>) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.stripes * self.config.file_size());
        for msg in self.recover_messages(nodes)? {
            for v in msg.extract_symbols()? {
                let byte = u8::try_from(v.value())
                    .map_err(|_| Error::Format(format!("symbol {} is not a byte", v.value())))?;
                out.push(byte);
            }
        }
        let len = usize::try_from(self.original_len)
            .map_err(|_| Error::Format("length overflow".into()))?;
        if len > out.len() {
            return Err(Error::Format(format!(
                "original length {len} exceeds decoded {}",
                out.len()
            )));
        }
        out.truncate(len);
        Ok(out)
    }

    /// Checks every alive node against the message recovered from the first
    /// `d` alive nodes. Returns the ids that disagree.
    pub fn verify(&self) -> Result<Vec<usize>> {
        let messages = self.recover_messages(None)?;
        let expected = messages
            .iter()
            .map(|m| encode(&self.encoder, m))
            .collect::<Result<Vec<_>>>()?;
        let mut bad = Vec::new();
        for id in self.alive() {
            let content = self.content(id)?;
            if (0..self.stripes).any(|s| content[s] != expected[s][id - 1]) {
                bad.push(id);
            }
        }
        Ok(bad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::index::sample;
    use rand::{Rng, RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bytes(len: usize, seed: u64) -> Vec<u8> {
        let mut v = vec![0u8; len];
        ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut v);
        v
    }

    fn cfg() -> CodeConfig {
        CodeConfig::new(8, 4, 2, 257).unwrap()
    }

    #[test]
    fn ingest_framing() {
        assert!(ingest_file(&[], &cfg()).unwrap().is_empty());
        assert_eq!(ingest_file(&bytes(20, 1), &cfg()).unwrap().len(), 1);
        let msgs = ingest_file(&bytes(21, 1), &cfg()).unwrap();
        assert_eq!(msgs.len(), 2);
        assert!(msgs[1].extract_symbols().unwrap()[1..]
            .iter()
            .all(|v| v.is_zero()));
        assert_eq!(
            ingest_file(&[1], &CodeConfig::new(8, 4, 2, 13).unwrap()).unwrap_err(),
            Error::FieldTooSmallForBytes(13)
        );
        let empty = Cluster::from_bytes(cfg(), &[]).unwrap();
        assert_eq!(empty.stripes(), 0);
        assert_eq!(empty.recover_file(None).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn round_trip_10k() {
        for seed in 0..3 {
            let data = bytes(10 * 1024, seed);
            let cluster = Cluster::from_bytes(cfg(), &data).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ids: Vec<usize> = sample(&mut rng, 8, 4).into_iter().map(|i| i + 1).collect();
            ids.sort_unstable();
            assert_eq!(cluster.recover_file(Some(&ids)).unwrap(), data);
        }
    }

    #[test]
    fn single_repair_bandwidth() {
        let data = bytes(100, 3);
        let mut c = Cluster::from_bytes(cfg(), &data).unwrap();
        let before = c.content(5).unwrap().to_vec();
        c.fail_nodes(&[5]).unwrap();
        assert_eq!(c.content(5).unwrap_err(), Error::NodeUnavailable(5));
        let ev = c
            .repair(RepairMode::Single, &[5], Some(&[1, 2, 3, 4]))
            .unwrap()
            .clone();
        assert_eq!(ev.stripes, 5);
        assert_eq!(ev.sent, vec![15; 4]);
        assert_eq!(c.content(5).unwrap(), before.as_slice());
        assert!(c.verify().unwrap().is_empty());
    }

    #[test]
    fn joint_repair_bandwidth() {
        let data = bytes(60, 4);
        let mut c = Cluster::from_bytes(cfg(), &data).unwrap();
        let expected: Vec<_> = [5, 6]
            .iter()
            .map(|&i| c.content(i).unwrap().to_vec())
            .collect();
        c.fail_nodes(&[5, 6]).unwrap();
        let ev = c
            .repair(RepairMode::Joint, &[5, 6], Some(&[1, 2, 3, 4]))
            .unwrap()
            .clone();
        assert_eq!(ev.sent, vec![15; 4]);
        assert_eq!(c.content(5).unwrap(), expected[0].as_slice());
        assert_eq!(c.content(6).unwrap(), expected[1].as_slice());
        assert!(c.ledger().within_bounds(4, 2));
    }

    #[test]
    fn naive_and_centralized_modes() {
        let data = bytes(200, 5);
        let reference = Cluster::from_bytes(cfg(), &data).unwrap();
        for (mode, failed, per_stripe) in [
            (RepairMode::Naive, vec![2, 7], vec![6u64; 4]),
            (RepairMode::Naive, vec![2, 7, 8], vec![6u64; 4]),
            (RepairMode::Centralized, vec![8, 1, 5], vec![3, 5, 6, 6]),
        ] {
            let mut c = reference.clone();
            c.fail_nodes(&failed).unwrap();
            let ev = c.repair(mode, &failed, None).unwrap().clone();
            let stripes = reference.stripes() as u64;
            assert_eq!(
                ev.sent,
                per_stripe.iter().map(|s| s * stripes).collect::<Vec<_>>()
            );
            for &f in &failed {
                assert_eq!(c.content(f).unwrap(), reference.content(f).unwrap());
            }
            assert!(c.ledger().within_bounds(4, 2));
        }
    }

    #[test]
    fn request_errors() {
        let mut c = Cluster::from_bytes(cfg(), &bytes(40, 6)).unwrap();
        c.fail_nodes(&[1, 2, 3, 4, 5]).unwrap();
        assert_eq!(
            c.repair(RepairMode::Joint, &[1, 2, 3, 4, 5], None)
                .unwrap_err(),
            Error::NotEnoughHelpers { need: 4, have: 3 }
        );
        let mut c = Cluster::from_bytes(cfg(), &bytes(40, 6)).unwrap();
        c.fail_nodes(&[5, 6]).unwrap();
        assert_eq!(
            c.repair(RepairMode::Centralized, &[5, 6], Some(&[1, 2, 3, 6]))
                .unwrap_err(),
            Error::OverlapError(6)
        );
        assert_eq!(
            c.repair(RepairMode::Joint, &[5], Some(&[1, 2, 3, 6]))
                .unwrap_err(),
            Error::NodeUnavailable(6)
        );
        assert!(c.repair(RepairMode::Single, &[5, 6], None).is_err());
        assert!(c.repair(RepairMode::Joint, &[5, 5], None).is_err());
        assert!(c.repair(RepairMode::Single, &[9], None).is_err());
        assert!(c
            .repair(RepairMode::Single, &[5], Some(&[1, 2, 3]))
            .is_err());
    }

    #[test]
    fn shard_persistence() {
        let data = bytes(333, 7);
        let mut c = Cluster::from_bytes(cfg(), &data).unwrap();
        let dir = tempfile::tempdir().unwrap();
        c.save(dir.path()).unwrap();
        let again = Cluster::load(dir.path()).unwrap();
        assert_eq!(again.alive(), (1..=8).collect::<Vec<_>>());
        assert_eq!(again.recover_file(Some(&[2, 4, 6, 8])).unwrap(), data);

        c.fail_nodes(&[3]).unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        c.save(dir2.path()).unwrap();
        let mut partial = Cluster::load(dir2.path()).unwrap();
        assert_eq!(partial.failed(), vec![3]);
        partial.repair(RepairMode::Single, &[3], None).unwrap();
        assert_eq!(
            partial.shard(3).unwrap().to_bytes().unwrap(),
            again.shard(3).unwrap().to_bytes().unwrap()
        );
    }

    #[test]
    fn deterministic_ledgers_and_shards() {
        let run = || {
            let mut c = Cluster::from_bytes(cfg(), &bytes(500, 8)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            for _ in 0..20 {
                let e = rng.gen_range(1..=3);
                let mut failed: Vec<usize> =
                    sample(&mut rng, 8, e).into_iter().map(|i| i + 1).collect();
                failed.sort_unstable();
                c.fail_nodes(&failed).unwrap();
                let mode = if e == 1 {
                    RepairMode::Single
                } else {
                    RepairMode::Joint
                };
                c.repair(mode, &failed, None).unwrap();
            }
            let shards: Vec<_> = (1..=8)
                .map(|i| c.shard(i).unwrap().to_bytes().unwrap())
                .collect();
            (shards, c.ledger().to_csv())
        };
        assert_eq!(run(), run());
    }
}

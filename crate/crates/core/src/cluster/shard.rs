// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

//! Per-node shard files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "DETC" | version u8 | p u64 | n u16 | d u16 | m u8 | node u16
//!        | stripes u64 | original length u64 | stripes × α elements
//! ```
//!
//! Elements are `ceil(bits(p) / 8)` bytes wide.

use std::fs;
use std::path::{Path, PathBuf};

use crate::codec::CodeConfig;
use crate::error::{Error, Result};
use crate::galois::{Field, FieldElement};
use crate::repair::{to_u16, write_element, Reader};

pub const MAGIC: &[u8; 4] = b"DETC";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 4 + 1 + 8 + 2 + 2 + 1 + 2 + 8 + 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShardFile {
    pub config: CodeConfig,
    pub node: usize,
    pub original_len: u64,
    pub stripes: Vec<Vec<FieldElement>>,
}

pub fn shard_file_name(node: usize) -> String {
    format!("node_{node}.detc")
}

impl ShardFile {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let cfg = &self.config;
        let field = cfg.field();
        let width = field.element_bytes();
        let mut out = Vec::with_capacity(HEADER_LEN + self.stripes.len() * cfg.alpha() * width);
        out.extend_from_slice(MAGIC);
        out.push(FORMAT_VERSION);
        out.extend_from_slice(&field.modulus().to_le_bytes());
        out.extend_from_slice(&to_u16(cfg.n())?.to_le_bytes());
        out.extend_from_slice(&to_u16(cfg.d())?.to_le_bytes());
        out.push(u8::try_from(cfg.m()).map_err(|_| Error::Format("m exceeds u8".into()))?);
        out.extend_from_slice(&to_u16(self.node)?.to_le_bytes());
        out.extend_from_slice(&(self.stripes.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.original_len.to_le_bytes());
        for stripe in &self.stripes {
            if stripe.len() != cfg.alpha() {
                return Err(Error::WrongLength {
                    expected: cfg.alpha(),
                    got: stripe.len(),
                });
            }
            for &v in stripe {
                write_element(&mut out, v, width);
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut rd = Reader::new(bytes);
        if rd.take(4)? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = rd.u8()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {version}"
            )));
        }
        let p = rd.u64()?;
        let n = rd.u16()? as usize;
        let d = rd.u16()? as usize;
        let m = rd.u8()? as usize;
        let node = rd.u16()? as usize;
        let stripe_count = rd.u64()?;
        let original_len = rd.u64()?;
        let config = CodeConfig::new(n, d, m, p)?;
        if node == 0 || node > n {
            return Err(Error::Format(format!("node id {node} outside [1, {n}]")));
        }
        let field = config.field();
        let expected =
            (stripe_count as u128) * (config.alpha() as u128) * (field.element_bytes() as u128);
        if rd.remaining() as u128 != expected {
            return Err(Error::Format(format!(
                "payload is {} bytes, header implies {expected}",
                rd.remaining()
            )));
        }
        let stripes = (0..stripe_count)
            .map(|_| (0..config.alpha()).map(|_| rd.element(field)).collect())
            .collect::<Result<Vec<_>>>()?;
        if original_len > stripe_count * config.file_size() as u64 {
            return Err(Error::Format(format!(
                "original length {original_len} exceeds {stripe_count} stripes of {}",
                config.file_size()
            )));
        }
        Ok(ShardFile {
            config,
            node,
            original_len,
            stripes,
        })
    }

    pub fn field(&self) -> Field {
        self.config.field()
    }

    pub fn write_to_dir(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(shard_file_name(self.node));
        fs::write(&path, self.to_bytes()?)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

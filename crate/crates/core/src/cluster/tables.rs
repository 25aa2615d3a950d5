// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

//! Bandwidth curves and storage-capacity sweeps, with CSV rendering.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{
    build_encoder, build_message_matrix, derive_params, encode, recover_data, CodeConfig,
};
use crate::error::{Error, Result};
use crate::galois::Field;
use crate::multirepair::{beta_bar_e, beta_e, naive_bandwidth};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BandwidthCurve {
    /// `min(e β, α)`
    Naive,
    /// `β_e`
    Joint,
    /// `β̄_e`
    Centralized,
}

impl BandwidthCurve {
    pub const ALL: [BandwidthCurve; 3] = [
        BandwidthCurve::Naive,
        BandwidthCurve::Joint,
        BandwidthCurve::Centralized,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            BandwidthCurve::Naive => "naive",
            BandwidthCurve::Joint => "joint",
            BandwidthCurve::Centralized => "centralized",
        }
    }
}

impl fmt::Display for BandwidthCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BandwidthCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BandwidthCurve::ALL
            .into_iter()
            .find(|c| c.tag() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown bandwidth curve {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BandwidthRow {
    pub curve: BandwidthCurve,
    pub e: usize,
    /// per-helper symbols
    pub symbols: Ratio<u64>,
    /// `symbols / α`
    pub normalized: Ratio<u64>,
}

/// Per-helper repair bandwidth for `e = 1..=e_max`.
pub fn bandwidth_table(
    d: usize,
    m: usize,
    e_max: usize,
    curve: BandwidthCurve,
) -> Result<Vec<BandwidthRow>> {
    let alpha = derive_params(d, m)?.alpha as u64;
    Ok((1..=e_max)
        .map(|e| {
            let symbols = match curve {
                BandwidthCurve::Naive => Ratio::from_integer(naive_bandwidth(d, m, e)),
                BandwidthCurve::Joint => Ratio::from_integer(beta_e(d, m, e)),
                // the sequential procedure never uses more than d failed nodes
                BandwidthCurve::Centralized => beta_bar_e(d, m, e.min(d)),
            };
            BandwidthRow {
                curve,
                e,
                symbols,
                normalized: symbols / alpha,
            }
        })
        .collect())
}

/// `num/den`, always with an explicit denominator.
pub fn format_ratio(r: Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn decimal(r: Ratio<u64>) -> String {
    format!("{:.6}", *r.numer() as f64 / *r.denom() as f64)
}

pub fn bandwidth_csv(rows: &[BandwidthRow]) -> String {
    let mut out = String::from("mode,e,bandwidth,normalized,normalized_decimal\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.curve,
            r.e,
            format_ratio(r.symbols),
            format_ratio(r.normalized),
            decimal(r.normalized)
        ));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CapacityRow {
    pub n: usize,
    pub file_size: usize,
}

/// Builds the code for every `n`, stores a random source, and checks that a
/// random `d`-subset of nodes returns all `F` symbols.
pub fn capacity_curve(
    d: usize,
    m: usize,
    n_range: RangeInclusive<usize>,
    field: Field,
    seed: u64,
) -> Result<Vec<CapacityRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = field.modulus();
    let mut rows = Vec::new();
    for n in n_range {
        let config = CodeConfig::with_field(n, d, m, field)?;
        let encoder = build_encoder(n, d, field, true)?;
        let source: Vec<_> = (0..config.file_size())
            .map(|_| field.elem(rng.gen_range(0..p)))
            .collect();
        let message = build_message_matrix(&source, d, m, field)?;
        let nodes = encode(&encoder, &message)?;
        let mut ids: Vec<usize> = sample(&mut rng, n, d).into_iter().map(|i| i + 1).collect();
        ids.sort_unstable();
        let contents: Vec<_> = ids.iter().map(|&i| nodes[i - 1].clone()).collect();
        let recovered = recover_data(&contents, &ids, &encoder, m)?.extract_symbols()?;
        if recovered != source {
            return Err(Error::InvalidConfig(format!(
                "recovery failed at n={n} from nodes {ids:?}"
            )));
        }
        rows.push(CapacityRow {
            n,
            file_size: recovered.len(),
        });
    }
    Ok(rows)
}

pub fn capacity_csv(rows: &[CapacityRow]) -> String {
    let mut out = String::from("n,file_size\n");
    for r in rows {
        out.push_str(&format!("{},{}\n", r.n, r.file_size));
    }
    out
}

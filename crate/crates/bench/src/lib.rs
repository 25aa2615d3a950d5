// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use detcode_core::codec::{
    build_encoder, build_message_matrix, encode, EncoderMatrix, MessageMatrix,
};
use detcode_core::{CodeConfig, FieldElement};

pub struct Fixture {
    pub config: CodeConfig,
    pub encoder: EncoderMatrix,
    pub source: Vec<FieldElement>,
    pub message: MessageMatrix,
    pub nodes: Vec<Vec<FieldElement>>,
}

/// One stripe of random data, encoded with the systematic encoder.
pub fn fixture(n: usize, d: usize, m: usize, p: u64, seed: u64) -> Fixture {
    let config = CodeConfig::new(n, d, m, p).expect("valid parameters");
    let field = config.field();
    let encoder = build_encoder(n, d, field, true).expect("encoder");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let source: Vec<_> = (0..config.file_size())
        .map(|_| field.elem(rng.gen_range(0..p)))
        .collect();
    let message = build_message_matrix(&source, d, m, field).expect("message matrix");
    let nodes = encode(&encoder, &message).expect("encode");
    Fixture {
        config,
        encoder,
        source,
        message,
        nodes,
    }
}

/// Deterministic pseudo-random bytes.
pub fn random_bytes(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen()).collect()
}

// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use proptest::sample::subsequence;

use detcode_core::codec::{
    build_encoder, build_message_matrix, encode, recover_data, EncoderMatrix,
};
use detcode_core::multirepair::{
    beta_e, centralized_repair, centralized_total, JointRepairCodec, JointRepairPayload,
};
use detcode_core::repair::{decode_failed_node, helper_payload, RepairPayload};
use detcode_core::{Field, FieldElement};

const N: usize = 11;
const D: usize = 6;

fn nodes(enc: &EncoderMatrix, m: usize, seed: &[u64]) -> Vec<Vec<FieldElement>> {
    let f = enc.field();
    let size = detcode_core::codec::derive_params(D, m).unwrap().file_size;
    let src: Vec<_> = (0..size)
        .map(|i| f.elem(seed[i % seed.len()].wrapping_mul(i as u64 + 1) % f.modulus()))
        .collect();
    encode(enc, &build_message_matrix(&src, D, m, f).unwrap()).unwrap()
}

fn split(perm: &[usize], e: usize) -> (Vec<usize>, Vec<usize>) {
    (perm[..e].to_vec(), perm[e..e + D].to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_repair_any_helpers(
        m in 1..=D,
        seed in proptest::collection::vec(any::<u64>(), 1..8),
        perm in Just((1..=N).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let field = Field::new(13).unwrap();
        let enc = build_encoder(N, D, field, true).unwrap();
        let nodes = nodes(&enc, m, &seed);
        let (failed, helpers) = split(&perm, 1);
        let f = failed[0];
        let payloads: Vec<_> = helpers
            .iter()
            .map(|&h| {
                let p = helper_payload(h, &nodes[h - 1], f, &enc, m).unwrap();
                RepairPayload::from_bytes(&p.to_bytes(field).unwrap(), field).unwrap()
            })
            .collect();
        prop_assert!(payloads.iter().all(|p| p.len() as u64 <= beta_e(D, m, 1)));
        prop_assert_eq!(decode_failed_node(&payloads, &helpers, &enc, f, m).unwrap(), nodes[f - 1].clone());
    }

    #[test]
    fn joint_and_centralized_agree(
        m in 1..=D,
        e in 1..=(N - D),
        seed in proptest::collection::vec(any::<u64>(), 1..8),
        perm in Just((1..=N).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let field = Field::new(257).unwrap();
        let enc = build_encoder(N, D, field, true).unwrap();
        let nodes = nodes(&enc, m, &seed);
        let (failed, helpers) = split(&perm, e);
        let codec = JointRepairCodec::new(&failed, m, &enc).unwrap();
        let payloads: Vec<_> = helpers
            .iter()
            .map(|&h| {
                let p = codec.payload(&nodes[h - 1]).unwrap();
                JointRepairPayload::from_bytes(&p.to_bytes(field).unwrap(), field).unwrap()
            })
            .collect();
        prop_assert!(payloads.iter().all(|p| p.len() as u64 <= beta_e(D, m, e)));
        let joint = codec.decode(&payloads, &helpers, &enc).unwrap();
        let contents: Vec<_> = helpers.iter().map(|&h| nodes[h - 1].clone()).collect();
        let (central, event) = centralized_repair(&failed, &helpers, &contents, &enc, m).unwrap();
        prop_assert!(event.total() <= centralized_total(D, m, e));
        for (i, &f) in failed.iter().enumerate() {
            prop_assert_eq!(&joint[i], &nodes[f - 1]);
            prop_assert_eq!(&central[i], &nodes[f - 1]);
        }
    }

    #[test]
    fn any_d_nodes_recover(
        m in 1..=D,
        seed in proptest::collection::vec(any::<u64>(), 1..8),
        ids in subsequence((1..=N).collect::<Vec<_>>(), D),
    ) {
        let field = Field::new(13).unwrap();
        let enc = build_encoder(N, D, field, false).unwrap();
        let nodes = nodes(&enc, m, &seed);
        let contents: Vec<_> = ids.iter().map(|&i| nodes[i - 1].clone()).collect();
        let msg = recover_data(&contents, &ids, &enc, m).unwrap();
        prop_assert_eq!(encode(&enc, &msg).unwrap(), nodes);
    }
}

// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

pub mod cluster;
pub mod codec;
pub mod combin;
pub mod error;
pub mod galois;
pub mod ledger;
pub mod multirepair;
pub mod repair;

pub use cluster::{Cluster, NodeState, ShardFile};
pub use codec::{CodeConfig, CodeParams, EncoderMatrix, MessageMatrix};
pub use combin::{SubsetIndexer, SubsetLabel};
pub use error::{Error, Result};
pub use galois::{Field, FieldElement, FieldMatrix};
pub use ledger::{BandwidthLedger, RepairEvent, RepairMode};
pub use multirepair::{JointRepairPayload, MultiRepairMatrix, NullSpaceMatrix};
pub use repair::{RepairMatrix, RepairPayload};

// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

//! Measured repair traffic.

use std::fmt;
use std::str::FromStr;

use crate::combin::binom;
use crate::error::{Error, Result};
use crate::multirepair::{beta_e, centralized_total, naive_bandwidth};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RepairMode {
    Single,
    Naive,
    Joint,
    Centralized,
}

impl RepairMode {
    pub fn tag(self) -> &'static str {
        match self {
            RepairMode::Single => "single",
            RepairMode::Naive => "naive",
            RepairMode::Joint => "joint",
            RepairMode::Centralized => "centralized",
        }
    }
}

impl fmt::Display for RepairMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for RepairMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(RepairMode::Single),
            "naive" => Ok(RepairMode::Naive),
            "joint" => Ok(RepairMode::Joint),
            "centralized" => Ok(RepairMode::Centralized),
            other => Err(Error::InvalidConfig(format!(
                "unknown repair mode {other:?}"
            ))),
        }
    }
}

/// One repair event: symbols sent by each helper, summed over `stripes`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairEvent {
    pub mode: RepairMode,
    pub failed: Vec<usize>,
    pub helpers: Vec<usize>,
    pub stripes: u64,
    /// aligned with `helpers`
    pub sent: Vec<u64>,
}

impl RepairEvent {
    pub fn new(mode: RepairMode, failed: Vec<usize>, helpers: Vec<usize>) -> Self {
        let sent = vec![0; helpers.len()];
        RepairEvent {
            mode,
            failed,
            helpers,
            stripes: 0,
            sent,
        }
    }

    pub fn e(&self) -> usize {
        self.failed.len()
    }

    pub fn total(&self) -> u64 {
        self.sent.iter().sum()
    }

    pub fn sent_by(&self, helper: usize) -> Option<u64> {
        self.helpers
            .iter()
            .position(|&h| h == helper)
            .map(|i| self.sent[i])
    }

    /// Adds one stripe's per-helper counts.
    pub fn add_stripe(&mut self, counts: &[u64]) -> Result<()> {
        if counts.len() != self.sent.len() {
            return Err(Error::WrongLength {
                expected: self.sent.len(),
                got: counts.len(),
            });
        }
        for (s, c) in self.sent.iter_mut().zip(counts) {
            *s += c;
        }
        self.stripes += 1;
        Ok(())
    }

    /// Per-stripe cap on any single helper.
    pub fn per_helper_bound(&self, d: usize, m: usize) -> u64 {
        let e = self.e();
        match self.mode {
            RepairMode::Single => binom(d as i64 - 1, m as i64 - 1),
            RepairMode::Naive => naive_bandwidth(d, m, e),
            RepairMode::Joint | RepairMode::Centralized => beta_e(d, m, e),
        }
    }

    /// Per-stripe cap on the event total.
    pub fn total_bound(&self, d: usize, m: usize) -> u64 {
        match self.mode {
            RepairMode::Centralized => centralized_total(d, m, self.e()),
            _ => self.per_helper_bound(d, m) * self.helpers.len() as u64,
        }
    }

    pub fn within_bounds(&self, d: usize, m: usize) -> bool {
        let cap = self.per_helper_bound(d, m) * self.stripes;
        self.sent.iter().all(|&s| s <= cap) && self.total() <= self.total_bound(d, m) * self.stripes
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BandwidthLedger {
    events: Vec<RepairEvent>,
}

impl BandwidthLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, event: RepairEvent) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[RepairEvent] {
        &self.events
    }

    pub fn last(&self) -> Option<&RepairEvent> {
        self.events.last()
    }

    pub fn total(&self) -> u64 {
        self.events.iter().map(RepairEvent::total).sum()
    }

    pub fn within_bounds(&self, d: usize, m: usize) -> bool {
        self.events.iter().all(|ev| ev.within_bounds(d, m))
    }

    /// `event,mode,failed,helper,stripes,symbols`, one line per helper.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("event,mode,failed,helper,stripes,symbols\n");
        for (i, ev) in self.events.iter().enumerate() {
            let failed = ev
                .failed
                .iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            for (h, s) in ev.helpers.iter().zip(&ev.sent) {
                out.push_str(&format!(
                    "{i},{},{failed},{h},{},{s}\n",
                    ev.mode, ev.stripes
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_tags_round_trip() {
        for mode in [
            RepairMode::Single,
            RepairMode::Naive,
            RepairMode::Joint,
            RepairMode::Centralized,
        ] {
            assert_eq!(mode.tag().parse::<RepairMode>().unwrap(), mode);
        }
        assert!("lazy".parse::<RepairMode>().is_err());
    }

    #[test]
    fn bounds() {
        let mut ev = RepairEvent::new(RepairMode::Single, vec![5], vec![1, 2, 3, 4]);
        ev.add_stripe(&[3, 3, 3, 3]).unwrap();
        ev.add_stripe(&[3, 2, 3, 3]).unwrap();
        assert!(ev.within_bounds(4, 2));
        assert_eq!(ev.total(), 23);
        assert_eq!(ev.sent_by(2), Some(5));
        ev.add_stripe(&[4, 0, 0, 0]).unwrap();
        assert!(!ev.within_bounds(4, 2));
        assert!(ev.add_stripe(&[1]).is_err());

        let mut joint = RepairEvent::new(RepairMode::Joint, vec![5, 6], vec![1, 2, 3, 4]);
        joint.add_stripe(&[5, 5, 5, 5]).unwrap();
        assert!(joint.within_bounds(4, 2));
        let mut central = RepairEvent::new(RepairMode::Centralized, vec![5, 6], vec![1, 2, 3, 4]);
        central.add_stripe(&[3, 5, 5, 5]).unwrap();
        assert_eq!(central.total_bound(4, 2), 18);
        assert!(central.within_bounds(4, 2));
        central.add_stripe(&[4, 5, 5, 5]).unwrap();
        assert!(!central.within_bounds(4, 2));
    }

    #[test]
    fn csv_lines() {
        let mut ledger = BandwidthLedger::new();
        let mut ev = RepairEvent::new(RepairMode::Joint, vec![5, 6], vec![1, 2]);
        ev.add_stripe(&[5, 4]).unwrap();
        ledger.record(ev);
        assert_eq!(
            ledger.to_csv(),
            "event,mode,failed,helper,stripes,symbols\n0,joint,5 6,1,1,5\n0,joint,5 6,2,1,4\n"
        );
        assert_eq!(ledger.total(), 9);
    }
}

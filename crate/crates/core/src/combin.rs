// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

//! Subset labels and their canonical lexicographic enumeration.
//!
//! Elements are 1-based (`[d] = {1, ..., d}`); ranks are 0-based positions in
//! the lexicographic list of sorted member sequences.

use std::fmt;

use crate::error::{Error, Result};

/// A subset of `[d]`, stored as a strictly increasing member list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetLabel {
    members: Vec<usize>,
    universe: usize,
}

impl SubsetLabel {
    pub fn new(mut members: Vec<usize>, universe: usize) -> Result<Self> {
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::OutOfRange(format!("repeated member in {members:?}")));
        }
        if members.iter().any(|&x| x == 0 || x > universe) {
            return Err(Error::OutOfRange(format!(
                "{members:?} not within [1, {universe}]"
            )));
        }
        Ok(SubsetLabel { members, universe })
    }

    pub fn empty(universe: usize) -> Self {
        SubsetLabel {
            members: Vec::new(),
            universe,
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn max_member(&self) -> Option<usize> {
        self.members.last().copied()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    /// Number of members `<= x`.
    pub fn ind(&self, x: usize) -> usize {
        self.members.partition_point(|&y| y <= x)
    }

    pub fn is_subset_of(&self, other: &SubsetLabel) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }

    /// `self ∪ {x}`.
    pub fn with(&self, x: usize) -> SubsetLabel {
        let mut members = self.members.clone();
        if let Err(pos) = members.binary_search(&x) {
            members.insert(pos, x);
        }
        SubsetLabel {
            members,
            universe: self.universe,
        }
    }

    /// `self \ {x}`.
    pub fn without(&self, x: usize) -> SubsetLabel {
        SubsetLabel {
            members: self.members.iter().copied().filter(|&y| y != x).collect(),
            universe: self.universe,
        }
    }

    pub fn union(&self, other: &SubsetLabel) -> SubsetLabel {
        let mut members: Vec<usize> = self.members.iter().chain(&other.members).copied().collect();
        members.sort_unstable();
        members.dedup();
        SubsetLabel {
            members,
            universe: self.universe.max(other.universe),
        }
    }

    pub fn difference(&self, other: &SubsetLabel) -> SubsetLabel {
        SubsetLabel {
            members: self
                .members
                .iter()
                .copied()
                .filter(|&x| !other.contains(x))
                .collect(),
            universe: self.universe,
        }
    }

    /// `[d] \ self`.
    pub fn complement(&self) -> SubsetLabel {
        SubsetLabel {
            members: (1..=self.universe).filter(|&x| !self.contains(x)).collect(),
            universe: self.universe,
        }
    }
}

impl fmt::Display for SubsetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// `|{y ∈ set : y <= x}|`.
pub fn ind(set: &SubsetLabel, x: usize) -> usize {
    set.ind(x)
}

/// Binomial coefficient with `C(a, b) = 0` whenever `b < 0`, `a < 0` or `b > a`.
pub fn binom(a: i64, b: i64) -> u64 {
    if a < 0 || b < 0 || b > a {
        return 0;
    }
    let b = b.min(a - b) as u128;
    let a = a as u128;
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc * (a - i) / (i + 1);
    }
    u64::try_from(acc).expect("binomial coefficient overflows u64")
}

/// All `k`-subsets of `items` (ascending) in lexicographic order.
pub fn subsets_of(items: &[usize], k: usize, universe: usize) -> Vec<SubsetLabel> {
    let mut out = Vec::new();
    if k > items.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(SubsetLabel {
            members: idx.iter().map(|&i| items[i]).collect(),
            universe,
        });
        // advance the rightmost index that still has room
        let Some(pos) = (0..k).rev().find(|&i| idx[i] < items.len() - k + i) else {
            return out;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Lexicographic indexer for the `m`-subsets of `[d]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetIndexer {
    d: usize,
    m: usize,
    ordering: Vec<SubsetLabel>,
}

impl SubsetIndexer {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        if m > d {
            return Err(Error::OutOfRange(format!("subset size {m} exceeds d={d}")));
        }
        let items: Vec<usize> = (1..=d).collect();
        Ok(SubsetIndexer {
            d,
            m,
            ordering: subsets_of(&items, m, d),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.ordering.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordering.is_empty()
    }

    pub fn ordering(&self) -> &[SubsetLabel] {
        &self.ordering
    }

    pub fn iter(&self) -> impl Iterator<Item = &SubsetLabel> {
        self.ordering.iter()
    }

    /// 0-based lexicographic position of `set`.
    pub fn rank(&self, set: &SubsetLabel) -> Result<usize> {
        if set.len() != self.m || set.members.iter().any(|&x| x == 0 || x > self.d) {
            return Err(Error::OutOfRange(format!(
                "{set} is not a {}-subset of [{}]",
                self.m, self.d
            )));
        }
        Ok(self.rank_members(&set.members))
    }

    pub(crate) fn rank_members(&self, members: &[usize]) -> usize {
        let (d, k) = (self.d as i64, self.m as i64);
        let mut rank = 0u64;
        let mut prev = 0usize;
        for (i, &a) in members.iter().enumerate() {
            for v in prev + 1..a {
                rank += binom(d - v as i64, k - i as i64 - 1);
            }
            prev = a;
        }
        rank as usize
    }

    pub fn unrank(&self, i: usize) -> Result<&SubsetLabel> {
        self.ordering
            .get(i)
            .ok_or_else(|| Error::OutOfRange(format!("index {i} >= C({}, {})", self.d, self.m)))
    }
}

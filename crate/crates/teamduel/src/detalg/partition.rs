//! Ordered blocks of players with every cross-block relation proven.

use std::fmt;

use serde::Serialize;

use crate::model::{Player, PlayerSet};

use super::DetAlgError;

/// Blocks `T_1 ▷ T_2 ▷ … ▷ T_ℓ`, best first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeakOrderPartition {
    blocks: Vec<PlayerSet>,
}

impl WeakOrderPartition {
    /// A single block holding `players`.
    pub fn new(players: PlayerSet) -> Self {
        Self { blocks: if players.is_empty() { Vec::new() } else { vec![players] } }
    }

    /// Blocks in order; rejects empty or overlapping blocks.
    pub fn from_blocks(blocks: Vec<PlayerSet>) -> Result<Self, DetAlgError> {
        let mut seen = PlayerSet::EMPTY;
        for b in &blocks {
            if b.is_empty() || !b.is_disjoint(seen) {
                return Err(DetAlgError::InvalidInput(format!("bad partition block {b}")));
            }
            seen = seen | *b;
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[PlayerSet] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, i: usize) -> PlayerSet {
        self.blocks[i]
    }

    pub fn players(&self) -> PlayerSet {
        self.union(0..self.blocks.len())
    }

    pub fn block_of(&self, p: Player) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(p))
    }

    /// Union of the blocks with indices in `range`.
    pub fn union(&self, range: std::ops::Range<usize>) -> PlayerSet {
        self.blocks[range].iter().fold(PlayerSet::EMPTY, |acc, &b| acc | b)
    }

    /// Players in blocks strictly before block `i`.
    pub fn before(&self, i: usize) -> PlayerSet {
        self.union(0..i)
    }

    /// Players in blocks up to and including block `i`.
    pub fn up_to(&self, i: usize) -> PlayerSet {
        self.union(0..i + 1)
    }

    /// The union of the first blocks if it has exactly `m` players.
    pub fn exact_prefix(&self, m: usize) -> Option<PlayerSet> {
        let mut acc = PlayerSet::EMPTY;
        for &b in &self.blocks {
            if acc.len() == m {
                return Some(acc);
            }
            acc = acc | b;
        }
        (acc.len() == m).then_some(acc)
    }

    /// Index of the block holding the `m`-th best position, so that
    /// `|T_{<i}| < m ≤ |T_{≤i}|`.
    pub fn boundary(&self, m: usize) -> Option<usize> {
        let mut size = 0;
        for (i, b) in self.blocks.iter().enumerate() {
            size += b.len();
            if size >= m {
                return Some(i);
            }
        }
        None
    }

    /// Players of `set` ordered by block, then by id.
    pub fn block_order(&self, set: PlayerSet) -> Vec<Player> {
        self.blocks.iter().flat_map(|&b| (b & set).iter()).collect()
    }

    /// Splits block `i` into `upper ▷ lower`.
    pub fn refine(&mut self, i: usize, upper: PlayerSet, lower: PlayerSet) -> Result<(), DetAlgError> {
        let block = *self.blocks.get(i).ok_or_else(|| DetAlgError::InvalidInput(format!("no block {i}")))?;
        if upper.is_empty() || lower.is_empty() || !upper.is_disjoint(lower) || (upper | lower) != block {
            return Err(DetAlgError::InvalidInput(format!("{upper} / {lower} does not split {block}")));
        }
        self.blocks[i] = upper;
        self.blocks.insert(i + 1, lower);
        Ok(())
    }
}

impl fmt::Display for WeakOrderPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        write!(f, "{}", parts.join(" > "))
    }
}

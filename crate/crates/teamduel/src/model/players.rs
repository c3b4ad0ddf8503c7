//! Players, player sets and k-subset combinatorics.

use std::fmt;
use std::ops::{BitAnd, BitOr, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest supported number of players. Player sets are stored as 128-bit masks.
pub const MAX_PLAYERS: usize = 128;

/// A player, identified by an id in `1..=n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Player(u8);

impl Player {
    /// Creates a player from a 1-based id.
    ///
    /// # Panics
    /// Panics if `id` is zero or above [`MAX_PLAYERS`].
    pub fn new(id: usize) -> Self {
        Self::try_new(id).unwrap_or_else(|| panic!("player id {id} out of range"))
    }

    pub fn try_new(id: usize) -> Option<Self> {
        (1..=MAX_PLAYERS).contains(&id).then(|| Player((id - 1) as u8))
    }

    /// The 1-based id.
    pub fn id(self) -> usize {
        self.0 as usize + 1
    }

    /// The 0-based index, convenient for indexing per-player arrays.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(index: usize) -> Self {
        Self::new(index + 1)
    }

    fn bit(self) -> u128 {
        1u128 << self.0
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

impl Serialize for Player {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(self.id() as u64)
    }
}

impl<'de> Deserialize<'de> for Player {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let id = usize::deserialize(d)?;
        Player::try_new(id).ok_or_else(|| serde::de::Error::custom(format!("player id {id} out of range")))
    }
}

/// A set of players. Teams are player sets of size k.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PlayerSet(u128);

/// A team: a set of exactly k players. The size is checked where teams enter
/// an oracle or an order, not by the type.
pub type Team = PlayerSet;

impl PlayerSet {
    pub const EMPTY: PlayerSet = PlayerSet(0);

    /// All players `1..=n`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_PLAYERS, "at most {MAX_PLAYERS} players are supported");
        if n == MAX_PLAYERS {
            PlayerSet(u128::MAX)
        } else {
            PlayerSet((1u128 << n) - 1)
        }
    }

    pub fn singleton(p: Player) -> Self {
        PlayerSet(p.bit())
    }

    /// Builds a set from 1-based ids.
    pub fn from_ids<I: IntoIterator<Item = usize>>(ids: I) -> Self {
        ids.into_iter().map(Player::new).collect()
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, p: Player) -> bool {
        self.0 & p.bit() != 0
    }

    pub fn insert(&mut self, p: Player) {
        self.0 |= p.bit();
    }

    pub fn remove(&mut self, p: Player) {
        self.0 &= !p.bit();
    }

    pub fn with(self, p: Player) -> Self {
        PlayerSet(self.0 | p.bit())
    }

    pub fn without(self, p: Player) -> Self {
        PlayerSet(self.0 & !p.bit())
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Exchanges `x` and `y`: whichever of the two is present is replaced by the other.
    pub fn exchange(self, x: Player, y: Player) -> Self {
        match (self.contains(x), self.contains(y)) {
            (true, false) => self.without(x).with(y),
            (false, true) => self.without(y).with(x),
            _ => self,
        }
    }

    /// Smallest id in the set.
    pub fn first(self) -> Option<Player> {
        (self.0 != 0).then(|| Player(self.0.trailing_zeros() as u8))
    }

    /// Members in increasing id order.
    pub fn iter(self) -> Members {
        Members(self.0)
    }

    pub fn to_vec(self) -> Vec<Player> {
        self.iter().collect()
    }

    pub fn ids(self) -> Vec<usize> {
        self.iter().map(Player::id).collect()
    }

    /// The first `m` members in increasing id order.
    pub fn take(self, m: usize) -> Self {
        self.iter().take(m).collect()
    }

    /// Largest id present, or 0 for the empty set.
    pub fn max_id(self) -> usize {
        128 - self.0.leading_zeros() as usize
    }
}

/// Iterator over the members of a [`PlayerSet`].
#[derive(Clone, Debug)]
pub struct Members(u128);

impl Iterator for Members {
    type Item = Player;

    fn next(&mut self) -> Option<Player> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(Player(i as u8))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

impl IntoIterator for PlayerSet {
    type Item = Player;
    type IntoIter = Members;

    fn into_iter(self) -> Members {
        self.iter()
    }
}

impl FromIterator<Player> for PlayerSet {
    fn from_iter<I: IntoIterator<Item = Player>>(iter: I) -> Self {
        let mut s = PlayerSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl<'a> FromIterator<&'a Player> for PlayerSet {
    fn from_iter<I: IntoIterator<Item = &'a Player>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

impl BitOr for PlayerSet {
    type Output = PlayerSet;
    fn bitor(self, rhs: Self) -> Self {
        PlayerSet(self.0 | rhs.0)
    }
}

impl BitAnd for PlayerSet {
    type Output = PlayerSet;
    fn bitand(self, rhs: Self) -> Self {
        PlayerSet(self.0 & rhs.0)
    }
}

impl Sub for PlayerSet {
    type Output = PlayerSet;
    fn sub(self, rhs: Self) -> Self {
        PlayerSet(self.0 & !rhs.0)
    }
}

impl fmt::Debug for PlayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PlayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for PlayerSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for PlayerSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let players = Vec::<Player>::deserialize(d)?;
        Ok(players.into_iter().collect())
    }
}

/// Binomial coefficient, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Lexicographic rank of a k-subset among all k-subsets of `1..=n`.
pub fn subset_rank(n: usize, set: PlayerSet) -> u64 {
    let k = set.len();
    let mut rank = 0u64;
    let mut next = 0usize;
    for (i, p) in set.iter().enumerate() {
        for j in next..p.index() {
            rank += binomial(n - j - 1, k - i - 1);
        }
        next = p.index() + 1;
    }
    rank
}

/// The k-subset of `universe` (taken in the given order) with lexicographic rank `rank`.
pub fn unrank_subset(universe: &[Player], k: usize, mut rank: u64) -> PlayerSet {
    let n = universe.len();
    debug_assert!(rank < binomial(n, k));
    let mut out = PlayerSet::EMPTY;
    let mut c = 0usize;
    for i in 0..k {
        loop {
            let count = binomial(n - c - 1, k - i - 1);
            if rank < count {
                out.insert(universe[c]);
                c += 1;
                break;
            }
            rank -= count;
            c += 1;
        }
    }
    out
}

/// All k-subsets of `universe` in lexicographic order.
pub fn subsets(universe: PlayerSet, k: usize) -> impl Iterator<Item = PlayerSet> {
    use itertools::Itertools;
    universe.to_vec().into_iter().combinations(k).map(|c| c.into_iter().collect())
}

/// All k-subsets of `1..=n` in lexicographic order.
pub fn all_teams(n: usize, k: usize) -> impl Iterator<Item = Team> {
    subsets(PlayerSet::full(n), k)
}

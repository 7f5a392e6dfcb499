//! Coalitions as bitmasks over at most 32 players.

use std::fmt;

/// A set of players, bit `i` set iff player `i` belongs to the coalition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Coalition(pub u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn grand(n: usize) -> Self {
        debug_assert!(n <= 32);
        if n == 32 {
            Coalition(u32::MAX)
        } else {
            Coalition((1u32 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        Coalition(1 << i)
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Self {
        Coalition(members.into_iter().fold(0, |m, i| m | (1 << i)))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        Coalition(self.0 | (1 << i))
    }

    pub fn without(self, i: usize) -> Self {
        Coalition(self.0 & !(1 << i))
    }

    pub fn union(self, other: Self) -> Self {
        Coalition(self.0 | other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing order.
    pub fn members(self) -> Members {
        Members(self.0)
    }

    /// Every non-empty coalition of `n` players, in increasing bitmask order.
    pub fn all_nonempty(n: usize) -> impl Iterator<Item = Coalition> {
        (1..=Coalition::grand(n).0).map(Coalition)
    }

    /// Every non-empty proper coalition of `n` players.
    pub fn all_proper(n: usize) -> impl Iterator<Item = Coalition> {
        (1..Coalition::grand(n).0).map(Coalition)
    }

    /// Non-empty subsets of `self` (including `self`), via the standard
    /// `sub = (sub - 1) & mask` walk.
    pub fn subsets(self) -> Subsets {
        Subsets {
            mask: self.0,
            next: self.0,
            done: self.0 == 0,
        }
    }
}

impl fmt::Display for Coalition {
    /// `{1,3}` style, 1-based as in the tables of the worked example.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.members().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

pub struct Members(u32);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

pub struct Subsets {
    mask: u32,
    next: u32,
    done: bool,
}

impl Iterator for Subsets {
    type Item = Coalition;

    fn next(&mut self) -> Option<Coalition> {
        if self.done {
            return None;
        }
        let current = self.next;
        self.next = current.wrapping_sub(1) & self.mask;
        if self.next == 0 {
            self.done = true;
        }
        Some(Coalition(current))
    }
}

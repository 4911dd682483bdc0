//! Fixed-width bit sets over location indices.
//!
//! A [`Cell`] is the knowledge of Player 1: the set of locations the play may
//! currently be in. Cells of one game share the same width.

use std::cmp::Ordering;
use std::fmt;

const WORD_BITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cell {
    width: usize,
    words: Box<[u64]>,
}

impl Cell {
    pub fn empty(width: usize) -> Self {
        Cell {
            width,
            words: vec![0; width.div_ceil(WORD_BITS)].into_boxed_slice(),
        }
    }

    pub fn full(width: usize) -> Self {
        let mut cell = Cell::empty(width);
        for (i, word) in cell.words.iter_mut().enumerate() {
            let lo = i * WORD_BITS;
            let bits = (width - lo).min(WORD_BITS);
            *word = if bits == WORD_BITS { !0 } else { (1u64 << bits) - 1 };
        }
        cell
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(width: usize, indices: I) -> Self {
        let mut cell = Cell::empty(width);
        for i in indices {
            cell.insert(i);
        }
        cell
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.width, "location {i} out of range for width {}", self.width);
        self.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.width, "location {i} out of range for width {}", self.width);
        self.words[i / WORD_BITS] &= !(1 << (i % WORD_BITS));
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.width && self.words[i / WORD_BITS] & (1 << (i % WORD_BITS)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &Cell) -> bool {
        debug_assert_eq!(self.width, other.width);
        self.words.iter().zip(other.words.iter()).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &Cell) -> bool {
        debug_assert_eq!(self.width, other.width);
        self.words.iter().zip(other.words.iter()).any(|(a, b)| a & b != 0)
    }

    pub fn intersection(&self, other: &Cell) -> Cell {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &Cell) -> Cell {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &Cell) -> Cell {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn union_with(&mut self, other: &Cell) {
        debug_assert_eq!(self.width, other.width);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &Cell) {
        debug_assert_eq!(self.width, other.width);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= b;
        }
    }

    fn zip_with(&self, other: &Cell, f: impl Fn(u64, u64) -> u64) -> Cell {
        debug_assert_eq!(self.width, other.width);
        Cell {
            width: self.width,
            words: self
                .words
                .iter()
                .zip(other.words.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Returns a copy of this cell re-embedded at a larger width.
    pub fn widened(&self, width: usize) -> Cell {
        assert!(width >= self.width);
        Cell::from_indices(width, self.iter())
    }

    /// Location indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + bit)
            })
        })
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }
}

/// Canonical order: larger cells first, then by the smallest location index
/// on which the two cells differ (the cell containing it comes first).
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .len()
            .cmp(&self.len())
            .then_with(|| {
                for (a, b) in self.words.iter().zip(other.words.iter()) {
                    let diff = a ^ b;
                    if diff != 0 {
                        let bit = diff & diff.wrapping_neg();
                        return if a & bit != 0 {
                            Ordering::Less
                        } else {
                            Ordering::Greater
                        };
                    }
                }
                Ordering::Equal
            })
            .then_with(|| self.width.cmp(&other.width))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

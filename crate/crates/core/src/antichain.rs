//! Antichains of cells as representations of downward-closed families.
//!
//! An [`Antichain`] stands for the family of all cells contained in one of
//! its elements. The empty cell is never stored: an empty antichain means
//! "no (non-empty) cell", which is what the solver needs.

use crate::cell::Cell;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Antichain {
    width: usize,
    cells: Vec<Cell>,
}

impl Antichain {
    pub fn empty(width: usize) -> Self {
        Antichain { width, cells: Vec::new() }
    }

    /// The antichain `{L}`, whose downward closure is every cell.
    pub fn top(width: usize) -> Self {
        Antichain::reduce(width, [Cell::full(width)])
    }

    /// Keeps the inclusion-maximal non-empty cells, deduplicated and in
    /// canonical order.
    pub fn reduce<I: IntoIterator<Item = Cell>>(width: usize, cells: I) -> Self {
        let mut cells: Vec<Cell> = cells.into_iter().filter(|c| !c.is_empty()).collect();
        for c in &cells {
            assert_eq!(c.width(), width, "cell width mismatch");
        }
        // Canonical order is by decreasing size, so a cell can only be
        // subsumed by one placed before it.
        cells.sort_unstable();
        cells.dedup();
        let mut kept: Vec<Cell> = Vec::with_capacity(cells.len());
        for c in cells {
            if !kept.iter().any(|k| c.is_subset(k)) {
                kept.push(c);
            }
        }
        Antichain { width, cells: kept }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Cell> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Membership in the downward closure. The empty cell is a member of
    /// every non-empty antichain.
    pub fn contains(&self, cell: &Cell) -> bool {
        debug_assert_eq!(cell.width(), self.width);
        self.cells.iter().any(|c| cell.is_subset(c))
    }

    pub fn union(&self, other: &Antichain) -> Antichain {
        assert_eq!(self.width, other.width);
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        Antichain::reduce(
            self.width,
            self.cells.iter().chain(other.cells.iter()).cloned(),
        )
    }

    pub fn intersect(&self, other: &Antichain) -> Antichain {
        assert_eq!(self.width, other.width);
        let mut out: Vec<Cell> = Vec::new();
        for a in &self.cells {
            // Cells already below the other antichain pass through unchanged.
            if other.contains(a) {
                out.push(a.clone());
                continue;
            }
            for b in &other.cells {
                if b.is_subset(a) {
                    out.push(b.clone());
                } else {
                    let c = a.intersection(b);
                    if !c.is_empty() {
                        out.push(c);
                    }
                }
            }
        }
        Antichain::reduce(self.width, out)
    }

    /// Inclusion of downward closures.
    pub fn leq(&self, other: &Antichain) -> bool {
        self.cells.iter().all(|c| other.contains(c))
    }

    pub fn into_cells(self) -> Vec<Cell> {
        self.cells
    }
}

impl<'a> IntoIterator for &'a Antichain {
    type Item = &'a Cell;
    type IntoIter = std::slice::Iter<'a, Cell>;

    fn into_iter(self) -> Self::IntoIter {
        self.cells.iter()
    }
}

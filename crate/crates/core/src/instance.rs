//! Explicit bipartite functions `f: A × B → {0,1}` over index domains.

use crate::bits::Mask;
use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Default bound on `rows * cols` for any enumerated domain.
pub const DEFAULT_MAX_CELLS: usize = 4096;

/// Largest witness universe for which pattern families are enumerated.
pub const MAX_UNIVERSE: usize = 16;

/// The cell guard, overridable through `COMMPROTO_MAX_CELLS`.
pub fn max_cells() -> usize {
    static CELLS: OnceLock<usize> = OnceLock::new();
    *CELLS.get_or_init(|| {
        std::env::var("COMMPROTO_MAX_CELLS").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MAX_CELLS)
    })
}

pub(crate) fn check_cells(cells: usize) -> Result<()> {
    let cap = max_cells();
    if cells > cap {
        return Err(Error::Resource(format!(
            "{cells} cells exceeds the desk-scale guard of {cap} (set COMMPROTO_MAX_CELLS to raise it)"
        )));
    }
    Ok(())
}

pub(crate) fn check_universe(m: usize) -> Result<()> {
    if m > MAX_UNIVERSE {
        return Err(Error::Resource(format!(
            "witness universe of {m} exceeds the pattern-family guard of {MAX_UNIVERSE}"
        )));
    }
    Ok(())
}

/// A total function on `{0..rows-1} × {0..cols-1}`, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BipartiteInstance {
    rows: usize,
    cols: usize,
    table: Mask,
}

impl BipartiteInstance {
    pub fn new(rows: usize, cols: usize, table: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::input(format!("empty domain {rows}x{cols}")));
        }
        if table.len() != rows * cols {
            return Err(Error::input(format!("table has {} entries, expected {}", table.len(), rows * cols)));
        }
        Ok(BipartiteInstance { rows, cols, table: Mask::from_bools(table) })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let table = (0..rows).flat_map(|x| (0..cols).map(move |y| (x, y))).map(|(x, y)| f(x, y));
        Self::new(rows, cols, table.collect())
    }

    /// Equality on `n`-bit strings: `{0..2^n-1}²`.
    pub fn equality(bits: u32) -> Self {
        let n = 1usize << bits;
        Self::from_fn(n, n, |x, y| x == y).expect("non-empty")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    pub fn value(&self, x: usize, y: usize) -> bool {
        debug_assert!(x < self.rows && y < self.cols);
        self.table.get(x * self.cols + y)
    }

    pub fn check_cell(&self, x: usize, y: usize) -> Result<()> {
        if x >= self.rows || y >= self.cols {
            return Err(Error::input(format!("cell ({x},{y}) outside the {}x{} domain", self.rows, self.cols)));
        }
        Ok(())
    }

    pub fn negated(&self) -> Self {
        BipartiteInstance { rows: self.rows, cols: self.cols, table: self.table.not() }
    }

    pub fn is_constant(&self) -> bool {
        self.table.none() || self.table.count_ones() == self.cells()
    }

    pub fn count_true(&self) -> usize {
        self.table.count_ones()
    }

    /// Row `x` as a mask over columns.
    pub fn row(&self, x: usize) -> Mask {
        Mask::from_bools((0..self.cols).map(|y| self.value(x, y)))
    }

    /// Column `y` as a mask over rows.
    pub fn col(&self, y: usize) -> Mask {
        Mask::from_bools((0..self.rows).map(|x| self.value(x, y)))
    }

    pub fn cells_iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |x| (0..self.cols).map(move |y| (x, y)))
    }
}

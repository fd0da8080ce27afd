//! Ground truth by direct lookup, independent of every protocol.

use super::format::{InstanceBundle, Payload};
use crate::bits::Pattern;
use crate::error::{Error, Result};
use crate::patterns::Decomposition;
use crate::rect::RectangleCover;
use crate::threeparty::TripartiteInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleValue {
    Bool(bool),
    /// `{i : f_i(x, y) = ⊤}`
    Set(Pattern),
}

/// The stored truth table.
pub fn oracle_cover(cover: &RectangleCover, x: usize, y: usize) -> Result<bool> {
    cover.instance().check_cell(x, y)?;
    Ok(cover.instance().value(x, y))
}

/// Scans each part's leaves for the one holding `(x, y)`.
pub fn oracle_decomposition(d: &Decomposition, x: usize, y: usize) -> Result<Pattern> {
    if x >= d.rows() || y >= d.cols() {
        return Err(Error::input(format!("cell ({x},{y}) outside the {}x{} domain", d.rows(), d.cols())));
    }
    let mut set = Pattern::EMPTY;
    for (i, part) in d.parts().iter().enumerate() {
        let leaf = part
            .leaves()
            .iter()
            .find(|l| l.rect.contains(x, y))
            .ok_or_else(|| Error::invariant(format!("part {i} has no leaf at ({x},{y})")))?;
        if leaf.label {
            set = set.with(i);
        }
    }
    Ok(set)
}

pub fn oracle_tripartite(g: &TripartiteInstance, x: usize, y: usize, z: usize) -> Result<bool> {
    g.check_cell(x, y, z)?;
    Ok(g.value(x, y, z))
}

/// `cell` is `[x, y]`, or `[x, y, z]` for tripartite instances.
pub fn oracle_eval(bundle: &InstanceBundle, cell: &[usize]) -> Result<OracleValue> {
    match (&bundle.payload, cell) {
        (Payload::Cover(c), &[x, y]) => oracle_cover(c, x, y).map(OracleValue::Bool),
        (Payload::Decomposition(d), &[x, y]) => oracle_decomposition(d, x, y).map(OracleValue::Set),
        (Payload::Tripartite(g), &[x, y, z]) => oracle_tripartite(g, x, y, z).map(OracleValue::Bool),
        (p, _) => Err(Error::input(format!("a {} cell has the wrong number of coordinates", p.kind()))),
    }
}

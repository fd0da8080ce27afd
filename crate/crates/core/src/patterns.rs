//! Accepting-pattern families of covers and of disjunctive decompositions,
//! and pruning of witnesses that never matter.
//!
//! A pattern is the exact set of witnesses active on one cell. For a cover the
//! witnesses are its rectangles (by canonical index); for a decomposition
//! `f = f_0 ∨ … ∨ f_{m-1}` they are the part indices. The family ranges over
//! every cell of the domain, so it contains `∅` whenever `f` has a ⊥-cell.

use crate::bits::{ceil_log2, Mask, Pattern};
use crate::error::{Error, Result};
use crate::instance::{check_cells, check_universe};
use crate::partition::MonochromaticPartition;
use crate::rect::RectangleCover;

/// A duplicate-free, canonically sorted set of patterns over `{0..universe-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PatternFamily {
    universe: usize,
    patterns: Vec<Pattern>,
}

impl PatternFamily {
    pub fn new(universe: usize, mut patterns: Vec<Pattern>) -> Result<Self> {
        check_universe(universe)?;
        if let Some(p) = patterns.iter().find(|p| p.span() > universe) {
            return Err(Error::input(format!("pattern {p:?} lies outside a universe of {universe}")));
        }
        patterns.sort_unstable();
        patterns.dedup();
        Ok(PatternFamily { universe, patterns })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn contains(&self, p: Pattern) -> bool {
        self.patterns.binary_search(&p).is_ok()
    }

    /// True for the family `{∅}`.
    pub fn is_only_empty(&self) -> bool {
        self.patterns == [Pattern::EMPTY]
    }

    pub fn max_size(&self) -> usize {
        self.patterns.iter().map(|p| p.len()).max().unwrap_or(0)
    }

    /// Number of patterns containing witness `i`.
    pub fn count_containing(&self, i: usize) -> usize {
        self.patterns.iter().filter(|p| p.contains(i)).count()
    }

    pub fn is_subfamily_of(&self, other: &PatternFamily) -> bool {
        self.patterns.iter().all(|&p| other.contains(p))
    }

    /// Patterns satisfying `keep`, same universe.
    pub fn filter(&self, keep: impl Fn(Pattern) -> bool) -> PatternFamily {
        PatternFamily {
            universe: self.universe,
            patterns: self.patterns.iter().copied().filter(|&p| keep(p)).collect(),
        }
    }
}

/// `f = f_0 ∨ … ∨ f_{m-1}` with each part given by a deterministic protocol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    rows: usize,
    cols: usize,
    parts: Vec<MonochromaticPartition>,
}

impl Decomposition {
    pub fn new(rows: usize, cols: usize, parts: Vec<MonochromaticPartition>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::input("empty domain"));
        }
        for (i, p) in parts.iter().enumerate() {
            let inst = p.instance();
            if (inst.rows(), inst.cols()) != (rows, cols) {
                return Err(Error::input(format!(
                    "part {i} is {}x{}, expected {rows}x{cols}",
                    inst.rows(),
                    inst.cols()
                )));
            }
        }
        check_universe(parts.len())?;
        Ok(Decomposition { rows, cols, parts })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn m(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[MonochromaticPartition] {
        &self.parts
    }

    /// Largest declared part cost (`k`).
    pub fn max_cost(&self) -> u32 {
        self.parts.iter().map(|p| p.declared_cost()).max().unwrap_or(0)
    }

    pub fn witnesses(&self, x: usize, y: usize) -> Pattern {
        self.parts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.instance().value(x, y))
            .fold(Pattern::EMPTY, |acc, (i, _)| acc.with(i))
    }

    /// `⋁_i f_i(x, y)`
    pub fn value(&self, x: usize, y: usize) -> bool {
        self.parts.iter().any(|p| p.instance().value(x, y))
    }

    /// The parts listed in `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Decomposition {
        Decomposition {
            rows: self.rows,
            cols: self.cols,
            parts: indices.iter().map(|&i| self.parts[i].clone()).collect(),
        }
    }

    /// The negations of the parts listed in `indices`.
    pub fn select_negated(&self, indices: &[usize]) -> Decomposition {
        Decomposition {
            rows: self.rows,
            cols: self.cols,
            parts: indices.iter().map(|&i| self.parts[i].negated()).collect(),
        }
    }
}

/// The pattern of every cell, computed once and then restricted cheaply.
#[derive(Clone, Debug)]
pub struct CellPatterns {
    rows: usize,
    cols: usize,
    universe: usize,
    cells: Vec<Pattern>,
}

impl CellPatterns {
    pub fn of_cover(cover: &RectangleCover) -> Result<Self> {
        let inst = cover.instance();
        check_cells(inst.cells())?;
        check_universe(cover.rects().len())?;
        let cells = inst
            .cells_iter()
            .map(|(x, y)| {
                cover
                    .rects()
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.contains(x, y))
                    .fold(Pattern::EMPTY, |acc, (i, _)| acc.with(i))
            })
            .collect();
        Ok(CellPatterns { rows: inst.rows(), cols: inst.cols(), universe: cover.rects().len(), cells })
    }

    pub fn of_decomposition(d: &Decomposition) -> Result<Self> {
        check_cells(d.rows * d.cols)?;
        let cells =
            (0..d.rows).flat_map(|x| (0..d.cols).map(move |y| (x, y))).map(|(x, y)| d.witnesses(x, y)).collect();
        Ok(CellPatterns { rows: d.rows, cols: d.cols, universe: d.m(), cells })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> Pattern {
        self.cells[x * self.cols + y]
    }

    pub fn family(&self) -> PatternFamily {
        self.build(self.cells.clone())
    }

    /// The family over the sub-domain `rows × cols`.
    pub fn restricted(&self, rows: &Mask, cols: &Mask) -> PatternFamily {
        assert_eq!((rows.len(), cols.len()), (self.rows, self.cols), "restriction dims");
        let ys: Vec<usize> = cols.iter_ones().collect();
        let mut out = Vec::with_capacity(rows.count_ones() * ys.len());
        for x in rows.iter_ones() {
            let row = &self.cells[x * self.cols..(x + 1) * self.cols];
            out.extend(ys.iter().map(|&y| row[y]));
        }
        self.build(out)
    }

    fn build(&self, mut patterns: Vec<Pattern>) -> PatternFamily {
        patterns.sort_unstable();
        patterns.dedup();
        PatternFamily { universe: self.universe, patterns }
    }
}

/// `Γ_Π`: one pattern of rectangle indices per cell.
pub fn pattern_family_of_cover(cover: &RectangleCover) -> Result<PatternFamily> {
    Ok(CellPatterns::of_cover(cover)?.family())
}

/// `Γ_f`, optionally restricted to a `rows × cols` sub-domain.
pub fn pattern_family_of_decomposition(
    d: &Decomposition,
    restriction: Option<(&Mask, &Mask)>,
) -> Result<PatternFamily> {
    let cp = CellPatterns::of_decomposition(d)?;
    Ok(match restriction {
        None => cp.family(),
        Some((rows, cols)) => {
            if (rows.len(), cols.len()) != (d.rows, d.cols) {
                return Err(Error::input("restriction masks do not match the domain"));
            }
            cp.restricted(rows, cols)
        }
    })
}

/// `max(k, ceil(log2 |Γ|))`: the single parameter bounding both the part
/// costs and the number of patterns.
pub fn effective_k(max_cost: u32, family_size: usize) -> u32 {
    max_cost.max(ceil_log2(family_size))
}

/// A pruned value together with the original indices of what was kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pruned<T> {
    pub value: T,
    pub kept: Vec<usize>,
}

/// Removes witnesses that are never the unique witness on any accepting cell.
///
/// One witness is removed per pass, always the lowest-indexed candidate, until
/// no candidate remains. The computed predicate is unchanged.
pub trait PruneMeaningless: Sized {
    fn prune_meaningless(&self) -> Result<Pruned<Self>>;
}

/// Indices surviving the pruning fixpoint, given each witness's cell set.
fn prune_fixpoint(cells: usize, members: &[Vec<usize>]) -> Vec<usize> {
    let mut count = vec![0usize; cells];
    for m in members {
        for &c in m {
            count[c] += 1;
        }
    }
    let mut alive: Vec<usize> = (0..members.len()).collect();
    while let Some(pos) = alive.iter().position(|&i| members[i].iter().all(|&c| count[c] >= 2)) {
        for &c in &members[alive[pos]] {
            count[c] -= 1;
        }
        alive.remove(pos);
    }
    alive
}

impl PruneMeaningless for RectangleCover {
    fn prune_meaningless(&self) -> Result<Pruned<Self>> {
        let cols = self.instance().cols();
        let members: Vec<Vec<usize>> =
            self.rects().iter().map(|r| r.cells().map(|(x, y)| x * cols + y).collect()).collect();
        let kept = prune_fixpoint(self.instance().cells(), &members);
        let rects = kept.iter().map(|&i| self.rects()[i].clone()).collect();
        let value = RectangleCover::new(self.instance().clone(), rects)?;
        Ok(Pruned { value, kept })
    }
}

impl PruneMeaningless for Decomposition {
    fn prune_meaningless(&self) -> Result<Pruned<Self>> {
        let cols = self.cols;
        let members: Vec<Vec<usize>> = self
            .parts
            .iter()
            .map(|p| {
                p.instance()
                    .cells_iter()
                    .filter(|&(x, y)| p.instance().value(x, y))
                    .map(|(x, y)| x * cols + y)
                    .collect()
            })
            .collect();
        let kept = prune_fixpoint(self.rows * self.cols, &members);
        Ok(Pruned { value: self.select(&kept), kept })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::BipartiteInstance;
    use crate::partition::Leaf;
    use crate::rect::Rectangle;

    fn pat(ix: &[usize]) -> Pattern {
        Pattern::from_indices(ix.iter().copied())
    }

    fn eq_partition() -> MonochromaticPartition {
        let leaves = vec![
            Leaf { rect: Rectangle::from_indices(2, 2, [0], [0]), label: true },
            Leaf { rect: Rectangle::from_indices(2, 2, [0], [1]), label: false },
            Leaf { rect: Rectangle::from_indices(2, 2, [1], [0]), label: false },
            Leaf { rect: Rectangle::from_indices(2, 2, [1], [1]), label: true },
        ];
        MonochromaticPartition::from_leaves(2, 2, leaves, 2).unwrap()
    }

    #[test]
    fn equality_cover_family() {
        let eq = BipartiteInstance::equality(1);
        let r1 = Rectangle::from_indices(2, 2, [0], [0]);
        let r2 = Rectangle::from_indices(2, 2, [1], [1]);
        let cover = RectangleCover::new(eq, vec![r1.clone(), r2.clone()]).unwrap();
        let fam = pattern_family_of_cover(&cover).unwrap();
        let i1 = cover.rects().iter().position(|r| *r == r1).unwrap();
        let i2 = cover.rects().iter().position(|r| *r == r2).unwrap();
        let want = PatternFamily::new(2, vec![Pattern::EMPTY, pat(&[i1]), pat(&[i2])]).unwrap();
        assert_eq!(fam, want);
    }

    #[test]
    fn single_full_rectangle_family() {
        let all = BipartiteInstance::new(3, 2, vec![true; 6]).unwrap();
        let cover = RectangleCover::new(all, vec![Rectangle::full(3, 2)]).unwrap();
        assert_eq!(pattern_family_of_cover(&cover).unwrap().patterns(), &[pat(&[0])]);
    }

    #[test]
    fn disjointness_coordinate_cover_family() {
        // INTERSECT on 2-bit strings: ⊤ iff x ∧ y ≠ 0; r_i = {x_i = 1} × {y_i = 1}.
        let inst = BipartiteInstance::from_fn(4, 4, |x, y| x & y != 0).unwrap();
        let r = |i: usize| {
            Rectangle::from_indices(4, 4, (0..4).filter(|v| v >> i & 1 == 1), (0..4).filter(|v| v >> i & 1 == 1))
        };
        let cover = RectangleCover::new_valid(inst, vec![r(0), r(1)]).unwrap();
        // All 16 cells enumerated by hand: x = y = 3 hits both, (1,1) only r(0), etc.
        let fam = pattern_family_of_cover(&cover).unwrap();
        assert_eq!(fam.len(), 4);
        assert!(
            fam.contains(Pattern::EMPTY)
                && fam.contains(pat(&[0]))
                && fam.contains(pat(&[1]))
                && fam.contains(pat(&[0, 1]))
        );
    }

    #[test]
    fn decomposition_families() {
        let eq = eq_partition();
        let one = Decomposition::new(2, 2, vec![eq.clone()]).unwrap();
        assert_eq!(pattern_family_of_decomposition(&one, None).unwrap().patterns(), &[Pattern::EMPTY, pat(&[0])]);

        let two = Decomposition::new(2, 2, vec![eq.clone(), eq.negated()]).unwrap();
        let fam = pattern_family_of_decomposition(&two, None).unwrap();
        assert_eq!(fam.len(), 2);
        assert!(fam.contains(pat(&[0])) && fam.contains(pat(&[1])));

        let rows = Mask::from_indices(2, [1]);
        let cols = Mask::from_indices(2, [0]);
        let cell = pattern_family_of_decomposition(&two, Some((&rows, &cols))).unwrap();
        assert_eq!(cell.patterns(), &[pat(&[1])]);
    }

    #[test]
    fn prune_removes_duplicates_and_nested() {
        let all = BipartiteInstance::new(2, 2, vec![true; 4]).unwrap();
        let full = Rectangle::full(2, 2);
        let cover = RectangleCover::new(all.clone(), vec![full.clone(), full.clone()]).unwrap();
        assert_eq!(cover.prune_meaningless().unwrap().value.rects().len(), 1);

        let inner = Rectangle::from_indices(2, 2, [0], [0, 1]);
        let cover = RectangleCover::new(all, vec![full.clone(), inner]).unwrap();
        let pruned = cover.prune_meaningless().unwrap();
        assert_eq!(pruned.value.rects(), &[full]);
    }

    #[test]
    fn prune_drops_constant_false_part() {
        let d = Decomposition::new(2, 2, vec![eq_partition(), MonochromaticPartition::constant(2, 2, false)]).unwrap();
        let pruned = d.prune_meaningless().unwrap();
        assert_eq!(pruned.kept, vec![0]);
        assert_eq!(pruned.value.m(), 1);
    }

    #[test]
    fn prune_keeps_lowest_needed() {
        // Identical parts: the lowest is removed first, the second survives.
        let d = Decomposition::new(2, 2, vec![eq_partition(), eq_partition()]).unwrap();
        assert_eq!(d.prune_meaningless().unwrap().kept, vec![1]);
    }

    #[test]
    fn effective_k_combines() {
        assert_eq!(effective_k(2, 17), 5);
        assert_eq!(effective_k(6, 17), 6);
    }
}

//! Combinatorial rectangles and rectangle covers (nondeterministic protocols).

use crate::bits::{index_width, Mask};
use crate::error::{Error, Result};
use crate::instance::BipartiteInstance;

/// A product set `rows × cols`. Ordered lexicographically by `(rows, cols)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rectangle {
    pub rows: Mask,
    pub cols: Mask,
}

impl Rectangle {
    pub fn new(rows: Mask, cols: Mask) -> Self {
        Rectangle { rows, cols }
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Rectangle { rows: Mask::ones(rows), cols: Mask::ones(cols) }
    }

    pub fn from_indices(
        rows: usize,
        cols: usize,
        row_set: impl IntoIterator<Item = usize>,
        col_set: impl IntoIterator<Item = usize>,
    ) -> Self {
        Rectangle { rows: Mask::from_indices(rows, row_set), cols: Mask::from_indices(cols, col_set) }
    }

    /// Parses the two mask fields of an `R`/`L` line.
    pub fn parse(rows: &str, cols: &str) -> Option<Self> {
        Some(Rectangle { rows: Mask::parse(rows)?, cols: Mask::parse(cols)? })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.rows.get(x) && self.cols.get(y)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.none() || self.cols.none()
    }

    pub fn area(&self) -> usize {
        self.rows.count_ones() * self.cols.count_ones()
    }

    /// Cell-wise intersection. Panics on dimension mismatch; see
    /// [`rectangle_intersect`] for the checked form.
    pub fn intersect(&self, other: &Rectangle) -> Rectangle {
        Rectangle { rows: self.rows.and(&other.rows), cols: self.cols.and(&other.cols) }
    }

    /// `(rows × cols) ∩ self`
    pub fn restrict(&self, rows: &Mask, cols: &Mask) -> Rectangle {
        Rectangle { rows: self.rows.and(rows), cols: self.cols.and(cols) }
    }

    pub fn overlaps(&self, other: &Rectangle) -> bool {
        self.rows.intersects(&other.rows) && self.cols.intersects(&other.cols)
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter_ones().flat_map(move |x| self.cols.iter_ones().map(move |y| (x, y)))
    }
}

pub fn rectangle_intersect(a: &Rectangle, b: &Rectangle) -> Result<Rectangle> {
    if a.dims() != b.dims() {
        return Err(Error::input(format!(
            "cannot intersect a {:?} rectangle with a {:?} rectangle",
            a.dims(),
            b.dims()
        )));
    }
    Ok(a.intersect(b))
}

/// Sorts and removes duplicates, giving the canonical form of a rectangle list.
pub fn canonicalize(rects: &mut Vec<Rectangle>) {
    rects.sort();
    rects.dedup();
}

/// The witness set of a nondeterministic protocol for `instance`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RectangleCover {
    instance: BipartiteInstance,
    rects: Vec<Rectangle>,
    declared_cost: u32,
}

/// Outcome of [`RectangleCover::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverReport {
    Ok,
    /// A ⊤-cell lies in no rectangle.
    Uncovered {
        x: usize,
        y: usize,
    },
    /// A ⊥-cell lies inside rectangle `rect` (index into the canonical list).
    FalseCellCovered {
        x: usize,
        y: usize,
        rect: usize,
    },
}

impl CoverReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, CoverReport::Ok)
    }
}

impl RectangleCover {
    /// Builds a cover with the default declared cost `ceil(log2(max(|R|, 2)))`.
    /// Rectangles are canonicalized; soundness is not checked here.
    pub fn new(instance: BipartiteInstance, mut rects: Vec<Rectangle>) -> Result<Self> {
        for r in &rects {
            if r.dims() != (instance.rows(), instance.cols()) {
                return Err(Error::input(format!(
                    "rectangle of dims {:?} on a {}x{} instance",
                    r.dims(),
                    instance.rows(),
                    instance.cols()
                )));
            }
        }
        canonicalize(&mut rects);
        let declared_cost = index_width(rects.len());
        Ok(RectangleCover { instance, rects, declared_cost })
    }

    /// Like [`RectangleCover::new`] but rejects covers failing [`validate`](Self::validate).
    pub fn new_valid(instance: BipartiteInstance, rects: Vec<Rectangle>) -> Result<Self> {
        let cover = Self::new(instance, rects)?;
        match cover.validate() {
            CoverReport::Ok => Ok(cover),
            report => Err(Error::input(format!("invalid cover: {report:?}"))),
        }
    }

    pub fn with_declared_cost(mut self, cost: u32) -> Self {
        self.declared_cost = cost;
        self
    }

    pub fn instance(&self) -> &BipartiteInstance {
        &self.instance
    }

    pub fn rects(&self) -> &[Rectangle] {
        &self.rects
    }

    pub fn declared_cost(&self) -> u32 {
        self.declared_cost
    }

    /// Checks soundness and completeness by enumerating cells in row-major
    /// order; the first violating cell is reported.
    pub fn validate(&self) -> CoverReport {
        for (x, y) in self.instance.cells_iter() {
            let first = self.rects.iter().position(|r| r.contains(x, y));
            match (self.instance.value(x, y), first) {
                (true, None) => return CoverReport::Uncovered { x, y },
                (false, Some(rect)) => return CoverReport::FalseCellCovered { x, y, rect },
                _ => {}
            }
        }
        CoverReport::Ok
    }

    /// The predicate the rectangles compute, independent of the stored table.
    pub fn computed(&self, x: usize, y: usize) -> bool {
        self.rects.iter().any(|r| r.contains(x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(rows: &str, cols: &str) -> Rectangle {
        Rectangle::parse(rows, cols).unwrap()
    }

    #[test]
    fn intersect_identity_with_full_domain() {
        let b = r("0110", "101");
        assert_eq!(rectangle_intersect(&Rectangle::full(4, 3), &b).unwrap(), b);
    }

    #[test]
    fn intersect_hand_case() {
        let a = r("10", "11");
        let b = r("11", "01");
        assert_eq!(rectangle_intersect(&a, &b).unwrap(), r("10", "01"));
    }

    #[test]
    fn intersect_disjoint_is_empty() {
        let c = rectangle_intersect(&r("10", "10"), &r("01", "01")).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.area(), 0);
    }

    #[test]
    fn intersect_dimension_mismatch() {
        assert!(matches!(rectangle_intersect(&r("10", "10"), &r("100", "10")), Err(Error::Input(_))));
    }

    #[test]
    fn validate_equality_cover() {
        let eq = BipartiteInstance::equality(1);
        let ok = RectangleCover::new(eq.clone(), vec![r("10", "10"), r("01", "01")]).unwrap();
        assert_eq!(ok.validate(), CoverReport::Ok);

        let missing = RectangleCover::new(eq.clone(), vec![r("10", "10")]).unwrap();
        assert_eq!(missing.validate(), CoverReport::Uncovered { x: 1, y: 1 });

        let unsound = RectangleCover::new(eq, vec![r("11", "10")]).unwrap();
        assert_eq!(unsound.validate(), CoverReport::FalseCellCovered { x: 1, y: 0, rect: 0 });
    }

    #[test]
    fn cover_canonicalizes_and_defaults_cost() {
        let eq = BipartiteInstance::equality(1);
        let c = RectangleCover::new(eq, vec![r("10", "10"), r("01", "01"), r("10", "10")]).unwrap();
        assert_eq!(c.rects(), &[r("10", "10"), r("01", "01")]);
        assert_eq!(c.declared_cost(), 1);
        assert_eq!(c.clone().with_declared_cost(7).declared_cost(), 7);
    }
}

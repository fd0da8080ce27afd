//! Deterministic protocols: protocol trees and the leaf partitions they induce.

use crate::bits::Mask;
use crate::error::{Error, Result};
use crate::instance::BipartiteInstance;
use crate::rect::Rectangle;
use crate::transcript::Party;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Leaf {
    pub rect: Rectangle,
    pub label: bool,
}

/// Disjoint labeled rectangles tiling `A × B`, each monochromatic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonochromaticPartition {
    instance: BipartiteInstance,
    leaves: Vec<Leaf>,
    declared_cost: u32,
}

impl MonochromaticPartition {
    /// Validates tiling and monochromaticity against `instance`. Empty leaves
    /// are dropped and the rest sorted canonically.
    pub fn new(instance: BipartiteInstance, leaves: Vec<Leaf>, declared_cost: u32) -> Result<Self> {
        let leaves = normalize(&instance, leaves)?;
        for leaf in &leaves {
            if let Some((x, y)) = leaf.rect.cells().find(|&(x, y)| instance.value(x, y) != leaf.label) {
                return Err(Error::InvalidProtocol(format!(
                    "leaf {}x{} labeled {} is not monochromatic at ({x},{y})",
                    leaf.rect.rows, leaf.rect.cols, leaf.label as u8
                )));
            }
        }
        Ok(MonochromaticPartition { instance, leaves, declared_cost })
    }

    /// Builds the partition and the function it defines from the leaves alone.
    pub fn from_leaves(rows: usize, cols: usize, leaves: Vec<Leaf>, declared_cost: u32) -> Result<Self> {
        let mut table = vec![false; rows * cols];
        for leaf in &leaves {
            if leaf.rect.dims() != (rows, cols) {
                return Err(Error::input(format!("leaf of dims {:?} in a {rows}x{cols} partition", leaf.rect.dims())));
            }
            for (x, y) in leaf.rect.cells() {
                table[x * cols + y] = leaf.label;
            }
        }
        let instance = BipartiteInstance::new(rows, cols, table)?;
        Self::new(instance, leaves, declared_cost)
    }

    /// The one-leaf protocol for a constant function.
    pub fn constant(rows: usize, cols: usize, label: bool) -> Self {
        let leaf = Leaf { rect: Rectangle::full(rows, cols), label };
        Self::from_leaves(rows, cols, vec![leaf], 0).expect("constant partition")
    }

    pub fn instance(&self) -> &BipartiteInstance {
        &self.instance
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn declared_cost(&self) -> u32 {
        self.declared_cost
    }

    /// Rectangles of the ⊤-labeled leaves, canonically ordered.
    pub fn accepting(&self) -> Vec<Rectangle> {
        self.leaves.iter().filter(|l| l.label).map(|l| l.rect.clone()).collect()
    }

    /// Same leaves with flipped labels; computes the negation at the same cost.
    pub fn negated(&self) -> Self {
        let leaves = self.leaves.iter().map(|l| Leaf { rect: l.rect.clone(), label: !l.label }).collect();
        MonochromaticPartition { instance: self.instance.negated(), leaves, declared_cost: self.declared_cost }
    }

    /// Re-checks every invariant from scratch.
    pub fn check(&self) -> Result<()> {
        Self::new(self.instance.clone(), self.leaves.clone(), self.declared_cost).map(|_| ())
    }
}

fn normalize(instance: &BipartiteInstance, mut leaves: Vec<Leaf>) -> Result<Vec<Leaf>> {
    let (rows, cols) = (instance.rows(), instance.cols());
    leaves.retain(|l| !l.rect.is_empty());
    let mut hits = vec![0u32; rows * cols];
    for leaf in &leaves {
        if leaf.rect.dims() != (rows, cols) {
            return Err(Error::input(format!("leaf of dims {:?} on a {rows}x{cols} instance", leaf.rect.dims())));
        }
        for (x, y) in leaf.rect.cells() {
            hits[x * cols + y] += 1;
        }
    }
    if let Some(i) = hits.iter().position(|&h| h != 1) {
        let what = if hits[i] == 0 { "uncovered" } else { "covered by several leaves" };
        return Err(Error::InvalidProtocol(format!("cell ({},{}) is {what}", i / cols, i % cols)));
    }
    leaves.sort();
    Ok(leaves)
}

/// A node of a two-party protocol tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeNode {
    Leaf(bool),
    /// `owner` sends `predicate[input]`; the walk continues in `zero` or `one`.
    Split {
        owner: Party,
        predicate: Mask,
        zero: Box<TreeNode>,
        one: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn split(owner: Party, predicate: Mask, zero: TreeNode, one: TreeNode) -> Self {
        TreeNode::Split { owner, predicate, zero: Box::new(zero), one: Box::new(one) }
    }

    fn depth(&self) -> u32 {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Split { zero, one, .. } => 1 + zero.depth().max(one.depth()),
        }
    }
}

/// A deterministic protocol over `{0..rows-1} × {0..cols-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolTree {
    pub rows: usize,
    pub cols: usize,
    pub root: TreeNode,
}

impl ProtocolTree {
    pub fn new(rows: usize, cols: usize, root: TreeNode) -> Result<Self> {
        let tree = ProtocolTree { rows, cols, root };
        tree.check_shape(&tree.root)?;
        Ok(tree)
    }

    fn check_shape(&self, node: &TreeNode) -> Result<()> {
        if let TreeNode::Split { owner, predicate, zero, one } = node {
            let want = match owner {
                Party::Alice => self.rows,
                Party::Bob => self.cols,
            };
            if predicate.len() != want {
                return Err(Error::InvalidProtocol(format!(
                    "{owner}'s predicate has length {}, expected {want}",
                    predicate.len()
                )));
            }
            self.check_shape(zero)?;
            self.check_shape(one)?;
        }
        Ok(())
    }

    pub fn depth(&self) -> u32 {
        self.root.depth()
    }

    /// Runs the protocol on `(x, y)`; returns the output label.
    pub fn evaluate(&self, x: usize, y: usize) -> bool {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf(label) => return *label,
                TreeNode::Split { owner, predicate, zero, one } => {
                    let bit = predicate.get(if *owner == Party::Alice { x } else { y });
                    node = if bit { one } else { zero };
                }
            }
        }
    }

    /// The function this tree computes.
    pub fn induced_instance(&self) -> BipartiteInstance {
        BipartiteInstance::from_fn(self.rows, self.cols, |x, y| self.evaluate(x, y)).expect("tree dims are non-empty")
    }

    /// Root-to-leaf rectangles with their labels, in depth-first order.
    pub fn leaf_rectangles(&self) -> Vec<Leaf> {
        let mut out = Vec::new();
        collect(&self.root, Rectangle::full(self.rows, self.cols), &mut out);
        out
    }
}

fn collect(node: &TreeNode, rect: Rectangle, out: &mut Vec<Leaf>) {
    match node {
        TreeNode::Leaf(label) => out.push(Leaf { rect, label: *label }),
        TreeNode::Split { owner, predicate, zero, one } => {
            let (z, o) = match owner {
                Party::Alice => (
                    Rectangle::new(rect.rows.and_not(predicate), rect.cols.clone()),
                    Rectangle::new(rect.rows.and(predicate), rect.cols.clone()),
                ),
                Party::Bob => (
                    Rectangle::new(rect.rows.clone(), rect.cols.and_not(predicate)),
                    Rectangle::new(rect.rows.clone(), rect.cols.and(predicate)),
                ),
            };
            collect(zero, z, out);
            collect(one, o, out);
        }
    }
}

/// The leaf partition of `tree`, checked against `instance`, with declared
/// cost equal to the tree depth. Leaves whose rectangle is empty are dropped.
pub fn tree_to_partition(tree: &ProtocolTree, instance: &BipartiteInstance) -> Result<MonochromaticPartition> {
    if (tree.rows, tree.cols) != (instance.rows(), instance.cols()) {
        return Err(Error::input(format!(
            "tree over {}x{} applied to a {}x{} instance",
            tree.rows,
            tree.cols,
            instance.rows(),
            instance.cols()
        )));
    }
    MonochromaticPartition::new(instance.clone(), tree.leaf_rectangles(), tree.depth())
}

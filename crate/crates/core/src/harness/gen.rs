//! Seeded instance generation.
//!
//! Every part is a random protocol tree: each internal node lets a random
//! player (one with at least two live inputs) split their live inputs into
//! two halves of random membership; leaves get random labels. The generator
//! is xoshiro256** seeded through SplitMix64 (`seed_from_u64`), so a seed
//! fixes the output on every platform.

use super::format::{InstanceBundle, Payload};
use crate::bits::Mask;
use crate::error::{Error, Result};
use crate::instance::BipartiteInstance;
use crate::partition::{tree_to_partition, MonochromaticPartition, ProtocolTree, TreeNode};
use crate::patterns::{CellPatterns, Decomposition};
use crate::rect::RectangleCover;
use crate::threeparty::{canonical_one_way, TripartiteInstance};
use crate::transcript::Party;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use std::fmt;
use std::str::FromStr;

pub const DEFAULT_MAX_ATTEMPTS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Cover,
    Decomposition,
    Tripartite,
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cover" => Ok(Kind::Cover),
            "decomposition" => Ok(Kind::Decomposition),
            "tripartite" => Ok(Kind::Tripartite),
            other => Err(Error::input(format!("unknown instance kind `{other}`"))),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Cover => "cover",
            Kind::Decomposition => "decomposition",
            Kind::Tripartite => "tripartite",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub kind: Kind,
    pub rows: usize,
    pub cols: usize,
    /// Parts of a decomposition, rectangles of a cover, or `|C|`.
    pub m: usize,
    pub depth: u32,
    /// Upper bound on `|Γ|`, or on the slice catalog for tripartite instances.
    pub budget: Option<usize>,
    pub max_attempts: usize,
}

impl GenParams {
    pub fn new(kind: Kind, rows: usize, cols: usize, m: usize, depth: u32) -> Self {
        GenParams { kind, rows, cols, m, depth, budget: None, max_attempts: DEFAULT_MAX_ATTEMPTS }
    }

    pub fn budget(mut self, budget: usize) -> Self {
        self.budget = Some(budget);
        self
    }
}

pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, depth: u32) -> ProtocolTree {
    let root = node(rng, &Mask::ones(rows), &Mask::ones(cols), depth);
    ProtocolTree::new(rows, cols, root).expect("predicates span the full domain")
}

fn node<R: Rng + ?Sized>(rng: &mut R, rows: &Mask, cols: &Mask, depth: u32) -> TreeNode {
    let alice_can = rows.count_ones() >= 2;
    let bob_can = cols.count_ones() >= 2;
    if depth == 0 || !(alice_can || bob_can) {
        return TreeNode::Leaf(rng.random_bool(0.5));
    }
    let owner = match (alice_can, bob_can) {
        (true, true) if rng.random_bool(0.5) => Party::Alice,
        (true, true) => Party::Bob,
        (true, false) => Party::Alice,
        _ => Party::Bob,
    };
    let live = if owner == Party::Alice { rows } else { cols };
    let mut members: Vec<usize> = live.iter_ones().collect();
    members.shuffle(rng);
    let predicate = Mask::from_indices(live.len(), members[..members.len() / 2].iter().copied());
    let (zero, one) = match owner {
        Party::Alice => {
            (node(rng, &rows.and_not(&predicate), cols, depth - 1), node(rng, &rows.and(&predicate), cols, depth - 1))
        }
        Party::Bob => {
            (node(rng, rows, &cols.and_not(&predicate), depth - 1), node(rng, rows, &cols.and(&predicate), depth - 1))
        }
    };
    TreeNode::split(owner, predicate, zero, one)
}

fn random_partition<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, depth: u32) -> MonochromaticPartition {
    let tree = random_tree(rng, rows, cols, depth);
    tree_to_partition(&tree, &tree.induced_instance()).expect("a tree's own function")
}

/// Deterministic per `seed`. Each attempt draws a full instance and is
/// rejected if a filter fails; the last failing filter is reported when the
/// attempts run out.
pub fn gen_instance(seed: u64, params: &GenParams) -> Result<InstanceBundle> {
    if params.rows == 0 || params.cols == 0 {
        return Err(Error::input("dimensions must be positive"));
    }
    crate::instance::check_cells(params.rows * params.cols)?;
    crate::instance::check_universe(params.m)?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut filter = String::new();
    for _ in 0..params.max_attempts {
        match attempt(&mut rng, params)? {
            Ok(payload) => {
                return Ok(InstanceBundle::new(payload)?
                    .with_meta("seed", seed)
                    .with_meta("kind", params.kind)
                    .with_meta("depth", params.depth));
            }
            Err(failed) => filter = failed,
        }
    }
    Err(Error::Generation { attempts: params.max_attempts, filter })
}

/// `Ok(Err(filter))` is a rejected draw.
fn attempt<R: Rng + ?Sized>(rng: &mut R, p: &GenParams) -> Result<std::result::Result<Payload, String>> {
    let budget_ok = |n: usize| p.budget.is_none_or(|b| n <= b);
    match p.kind {
        Kind::Decomposition => {
            let parts: Vec<_> = (0..p.m).map(|_| random_partition(rng, p.rows, p.cols, p.depth)).collect();
            if parts.iter().any(|q| q.instance().is_constant()) {
                return Ok(Err("every part nonconstant".into()));
            }
            let d = Decomposition::new(p.rows, p.cols, parts)?;
            let gamma = CellPatterns::of_decomposition(&d)?.family().len();
            if !budget_ok(gamma) {
                return Ok(Err(format!("pattern budget |Γ| ≤ {}", p.budget.unwrap_or(0))));
            }
            Ok(Ok(Payload::Decomposition(d)))
        }
        Kind::Cover => {
            if p.m == 0 {
                return Err(Error::input("a cover needs at least one rectangle"));
            }
            let mut pool = Vec::new();
            while pool.len() < 2 * p.m {
                let part = random_partition(rng, p.rows, p.cols, p.depth);
                pool.extend(part.accepting());
            }
            pool.sort();
            pool.dedup();
            pool.shuffle(rng);
            pool.truncate(p.m);
            let table = BipartiteInstance::from_fn(p.rows, p.cols, |x, y| pool.iter().any(|r| r.contains(x, y)))?;
            let cover = RectangleCover::new(table, pool)?;
            let gamma = CellPatterns::of_cover(&cover)?.family().len();
            if !budget_ok(gamma) {
                return Ok(Err(format!("pattern budget |Γ| ≤ {}", p.budget.unwrap_or(0))));
            }
            Ok(Ok(Payload::Cover(cover)))
        }
        Kind::Tripartite => {
            let layers: Vec<_> = (0..p.m).map(|_| random_tree(rng, p.rows, p.cols, p.depth)).collect();
            let g = TripartiteInstance::from_fn(p.rows, p.cols, p.m, |x, y, z| layers[z].evaluate(x, y))?;
            if !budget_ok(canonical_one_way(&g).len()) {
                return Ok(Err(format!("slice budget |catalog| ≤ {}", p.budget.unwrap_or(0))));
            }
            Ok(Ok(Payload::Tripartite(g)))
        }
    }
}

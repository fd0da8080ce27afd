//! Alice and Bob talk in the open, then send one message to Charlie, who
//! answers `g(x, y, z)` from that message and `z` alone.
//!
//! The compiler views each `z` as a two-party function `f_z(x, y) = g(x, y, z)`
//! with a cheap deterministic protocol, runs exhaustive witness search to
//! learn `S = {z : f_z(x, y) = ⊤}`, and forwards the one-way message of any
//! pair whose slice equals `S`.

use crate::bits::{ceil_log2, index_width, Mask, Pattern};
use crate::error::{Error, Result};
use crate::instance::{check_cells, check_universe, BipartiteInstance};
use crate::partition::{Leaf, MonochromaticPartition};
use crate::patterns::Decomposition;
use crate::rect::Rectangle;
use crate::transcript::{Party, Session, Transcript};
use crate::xi::{XiPlan, XiRound};
use std::collections::HashMap;

/// Step tag of the final message to Charlie.
pub const CHARLIE_STEP: &str = "charlie";

/// `g : A × B × C → {0, 1}`, stored at index `(x·|B| + y)·|C| + z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TripartiteInstance {
    a: usize,
    b: usize,
    c: usize,
    table: Mask,
}

impl TripartiteInstance {
    pub fn new(a: usize, b: usize, c: usize, table: Vec<bool>) -> Result<Self> {
        if a == 0 || b == 0 || c == 0 {
            return Err(Error::input("tripartite dimensions must be positive"));
        }
        if table.len() != a * b * c {
            return Err(Error::input(format!("expected {} table entries, got {}", a * b * c, table.len())));
        }
        check_cells(a * b)?;
        check_universe(c)?;
        Ok(TripartiteInstance { a, b, c, table: Mask::from_bools(table) })
    }

    pub fn from_fn(a: usize, b: usize, c: usize, g: impl Fn(usize, usize, usize) -> bool) -> Result<Self> {
        let mut table = Vec::with_capacity(a * b * c);
        for x in 0..a {
            for y in 0..b {
                table.extend((0..c).map(|z| g(x, y, z)));
            }
        }
        Self::new(a, b, c, table)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.a, self.b, self.c)
    }

    #[inline]
    pub fn value(&self, x: usize, y: usize, z: usize) -> bool {
        self.table.get((x * self.b + y) * self.c + z)
    }

    pub fn check_cell(&self, x: usize, y: usize, z: usize) -> Result<()> {
        if x >= self.a || y >= self.b || z >= self.c {
            return Err(Error::input(format!("cell ({x},{y},{z}) outside {}x{}x{}", self.a, self.b, self.c)));
        }
        Ok(())
    }

    /// `z ↦ g(x, y, z)` as a pattern over `C`.
    pub fn slice(&self, x: usize, y: usize) -> Pattern {
        Pattern::from_indices((0..self.c).filter(|&z| self.value(x, y, z)))
    }

    /// `f_z(x, y) = g(x, y, z)`
    pub fn layer(&self, z: usize) -> BipartiteInstance {
        BipartiteInstance::from_fn(self.a, self.b, |x, y| self.value(x, y, z)).expect("guarded dims")
    }
}

/// A one-way protocol from the merged Alice and Bob to Charlie: a message per
/// pair and Charlie's answer function per message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceCatalog {
    cols: usize,
    message_of: Vec<usize>,
    outputs: Vec<Pattern>,
    first_message: HashMap<Pattern, usize>,
}

impl SliceCatalog {
    /// Number of distinct messages.
    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// `ℓ = ceil(log2 max(|catalog|, 2))`
    pub fn ell(&self) -> u32 {
        index_width(self.outputs.len())
    }

    pub fn message(&self, x: usize, y: usize) -> usize {
        self.message_of[x * self.cols + y]
    }

    /// Charlie's answer table for each message, as a pattern over `C`.
    pub fn outputs(&self) -> &[Pattern] {
        &self.outputs
    }

    /// The message of the first pair whose slice is `s`.
    pub fn message_for(&self, s: Pattern) -> Option<usize> {
        self.first_message.get(&s).copied()
    }

    /// A caller-supplied message map; each message must determine the slice.
    pub fn from_message_map(g: &TripartiteInstance, message_of: Vec<usize>) -> Result<Self> {
        let (a, b, _) = g.dims();
        if message_of.len() != a * b {
            return Err(Error::input(format!("message map has {} entries, expected {}", message_of.len(), a * b)));
        }
        let count = message_of.iter().max().map_or(0, |m| m + 1);
        let mut outputs: Vec<Option<Pattern>> = vec![None; count];
        let mut first_message = HashMap::new();
        for x in 0..a {
            for y in 0..b {
                let msg = message_of[x * b + y];
                let s = g.slice(x, y);
                match outputs[msg] {
                    Some(prev) if prev != s => {
                        return Err(Error::input(format!("message {msg} is sent on pairs with different slices")));
                    }
                    _ => outputs[msg] = Some(s),
                }
                first_message.entry(s).or_insert(msg);
            }
        }
        let outputs = outputs
            .into_iter()
            .enumerate()
            .map(|(m, o)| o.ok_or_else(|| Error::input(format!("message {m} is never sent"))))
            .collect::<Result<_>>()?;
        Ok(SliceCatalog { cols: b, message_of, outputs, first_message })
    }
}

/// The minimal one-way protocol: the message is the slice's index among the
/// distinct slices in first-occurrence order.
pub fn canonical_one_way(g: &TripartiteInstance) -> SliceCatalog {
    let (a, b, _) = g.dims();
    let mut seen: HashMap<Pattern, usize> = HashMap::new();
    let message_of = (0..a)
        .flat_map(|x| (0..b).map(move |y| (x, y)))
        .map(|(x, y)| {
            let n = seen.len();
            *seen.entry(g.slice(x, y)).or_insert(n)
        })
        .collect();
    SliceCatalog::from_message_map(g, message_of).expect("slice identity is a valid message map")
}

/// Produces a deterministic protocol for one layer.
pub trait PartitionBuilder {
    fn build(&self, f: &BipartiteInstance) -> Result<MonochromaticPartition>;
}

/// Alice names her row class, Bob answers with the value.
#[derive(Clone, Copy, Debug, Default)]
pub struct RowClassBuilder;

/// Bob names his column class, Alice answers with the value.
#[derive(Clone, Copy, Debug, Default)]
pub struct ColumnClassBuilder;

/// Whichever of the row and column protocols is cheaper; rows on ties.
#[derive(Clone, Copy, Debug, Default)]
pub struct CheapestBuilder;

fn class_partition(f: &BipartiteInstance, by_rows: bool) -> MonochromaticPartition {
    let (rows, cols) = (f.rows(), f.cols());
    if f.is_constant() {
        return MonochromaticPartition::constant(rows, cols, f.value(0, 0));
    }
    let outer = if by_rows { rows } else { cols };
    let line = |i: usize| if by_rows { f.row(i) } else { f.col(i) };
    let mut classes: Vec<(Mask, Mask)> = Vec::new();
    for i in 0..outer {
        let l = line(i);
        match classes.iter_mut().find(|(v, _)| *v == l) {
            Some((_, members)) => members.set(i, true),
            None => classes.push((l, Mask::from_indices(outer, [i]))),
        }
    }
    let mut leaves = Vec::new();
    for (values, members) in &classes {
        for (label, side) in [(true, values.clone()), (false, values.not())] {
            let rect =
                if by_rows { Rectangle::new(members.clone(), side) } else { Rectangle::new(side, members.clone()) };
            leaves.push(Leaf { rect, label });
        }
    }
    let cost = ceil_log2(classes.len()) + 1;
    MonochromaticPartition::new(f.clone(), leaves, cost).expect("class leaves tile the domain")
}

impl PartitionBuilder for RowClassBuilder {
    fn build(&self, f: &BipartiteInstance) -> Result<MonochromaticPartition> {
        Ok(class_partition(f, true))
    }
}

impl PartitionBuilder for ColumnClassBuilder {
    fn build(&self, f: &BipartiteInstance) -> Result<MonochromaticPartition> {
        Ok(class_partition(f, false))
    }
}

impl PartitionBuilder for CheapestBuilder {
    fn build(&self, f: &BipartiteInstance) -> Result<MonochromaticPartition> {
        let r = class_partition(f, true);
        let c = class_partition(f, false);
        Ok(if c.declared_cost() < r.declared_cost() { c } else { r })
    }
}

/// `(f_z)_{z ∈ C}` with `k` the largest part cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceDecomposition {
    pub decomposition: Decomposition,
    pub k: u32,
}

pub fn slice_decomposition(g: &TripartiteInstance, builder: &dyn PartitionBuilder) -> Result<SliceDecomposition> {
    let (a, b, c) = g.dims();
    let parts = (0..c).map(|z| builder.build(&g.layer(z))).collect::<Result<Vec<_>>>()?;
    let decomposition = Decomposition::new(a, b, parts)?;
    let k = decomposition.max_cost();
    Ok(SliceDecomposition { decomposition, k })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreePartyRun {
    pub answer: bool,
    /// `{z : f_z(x, y) = ⊤}` as found by the search.
    pub set: Pattern,
    pub message: usize,
    /// Search frames followed by the `charlie` frame.
    pub transcript: Transcript,
    pub search_trace: Vec<XiRound>,
}

impl ThreePartyRun {
    /// Bits Alice and Bob exchange before the final message.
    pub fn broadcast_bits(&self) -> usize {
        self.transcript.total_bits() - self.message_bits()
    }

    pub fn message_bits(&self) -> usize {
        self.transcript.bits_in(CHARLIE_STEP)
    }
}

/// A compiled three-party protocol for a fixed `g`.
pub struct ThreePartyCompiler {
    instance: TripartiteInstance,
    catalog: SliceCatalog,
    slices: SliceDecomposition,
    search: XiPlan,
}

impl ThreePartyCompiler {
    pub fn new(g: &TripartiteInstance, builder: &dyn PartitionBuilder) -> Result<Self> {
        Self::with_catalog(g, canonical_one_way(g), builder)
    }

    pub fn with_catalog(g: &TripartiteInstance, catalog: SliceCatalog, builder: &dyn PartitionBuilder) -> Result<Self> {
        let slices = slice_decomposition(g, builder)?;
        let search = XiPlan::new(&slices.decomposition)?;
        let gamma = search.family().len();
        if gamma > catalog.len() || catalog.len() > 1 << catalog.ell() {
            return Err(Error::invariant(format!(
                "|Γ| = {gamma}, |catalog| = {}, ℓ = {} out of order",
                catalog.len(),
                catalog.ell()
            )));
        }
        Ok(ThreePartyCompiler { instance: g.clone(), catalog, slices, search })
    }

    pub fn instance(&self) -> &TripartiteInstance {
        &self.instance
    }

    pub fn catalog(&self) -> &SliceCatalog {
        &self.catalog
    }

    pub fn slices(&self) -> &SliceDecomposition {
        &self.slices
    }

    pub fn search(&self) -> &XiPlan {
        &self.search
    }

    pub fn run(&self, x: usize, y: usize, z: usize) -> Result<ThreePartyRun> {
        self.instance.check_cell(x, y, z)?;
        let mut session = Session::live(x, y);
        let (set, search_trace, message) = self.drive(&mut session)?;
        let transcript = session.finish()?;
        let answer = self.charlie(&transcript, z)?;
        Ok(ThreePartyRun { answer, set, message, transcript, search_trace })
    }

    /// Rebuilds the whole run from the transcript, as a merged Alice and Bob
    /// would, and checks that it ends in the message Charlie reads.
    pub fn replay(&self, transcript: &Transcript, z: usize) -> Result<ThreePartyRun> {
        let mut session = Session::replay(transcript);
        let (set, search_trace, message) = self.drive(&mut session)?;
        let transcript = session.finish()?;
        let answer = self.charlie(&transcript, z)?;
        Ok(ThreePartyRun { answer, set, message, transcript, search_trace })
    }

    fn drive(&self, session: &mut Session) -> Result<(Pattern, Vec<XiRound>, usize)> {
        let (set, trace) = self.search.run_in(session)?;
        let message = self
            .catalog
            .message_for(set)
            .ok_or_else(|| Error::invariant(format!("search result {set:?} is no slice of g")))?;
        session.begin(trace.len() + 1, CHARLIE_STEP);
        let sent = session.word(Party::Alice, self.catalog.ell(), |_| message)?;
        Ok((set, trace, sent))
    }

    /// Charlie's answer from the final frame and `z` alone.
    pub fn charlie(&self, transcript: &Transcript, z: usize) -> Result<bool> {
        let frame = transcript
            .frames()
            .last()
            .filter(|f| f.step == CHARLIE_STEP)
            .ok_or_else(|| Error::Replay("transcript has no final message".into()))?;
        if frame.bits.len() != self.catalog.ell() as usize {
            return Err(Error::Replay(format!("final message has {} bits, expected ℓ", frame.bits.len())));
        }
        let message = frame.bits.iter().fold(0usize, |acc, b| acc << 1 | b.value as usize);
        let output = self
            .catalog
            .outputs()
            .get(message)
            .ok_or_else(|| Error::Replay(format!("message {message} is not in the catalog")))?;
        Ok(output.contains(z))
    }
}

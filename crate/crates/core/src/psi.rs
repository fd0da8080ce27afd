//! Deterministic simulation of a disjunctive decomposition with few accepting
//! patterns, returning a witness part on acceptance.
//!
//! The decomposition is first pruned so that every remaining part is the sole
//! witness somewhere (`m <= |Γ|`); witness indices are reported in the
//! caller's numbering.
//!
//! Per round, with live domain `A_j × B_j` and family `Γ_j`:
//! - `Γ_j = {∅}` rejects.
//! - If `σ_{j-1}` misses every pattern, a new `σ_j` is chosen by
//!   [`find_hitting_set_for_window`] with `2t = s_j`, where `s_j` drops to the
//!   largest pattern size once the window `[s/2, s]` is empty.
//! - `t_j` is the largest `|γ ∩ σ_j|`, `Δ_j` the traces of that size and `Π_j`
//!   the live parts of the rectangles in `R_δ`, `δ ∈ Δ_j`. These rectangles
//!   are pairwise disjoint.
//! - `psi.step6`: Alice sends a found bit and an index into `Π^A`; Bob replies
//!   `[y ∈ r_B]`. `psi.step7` mirrors it over `Π^B`. Step 8 is silent.

use crate::bits::{ceil_log2, Mask, Pattern};
use crate::error::{Error, Result};
use crate::hitting::find_hitting_set_for_window;
use crate::patterns::{CellPatterns, Decomposition, PatternFamily, PruneMeaningless};
use crate::rect::{canonicalize, Rectangle};
use crate::transcript::{Party, Session, Transcript};
use std::collections::HashMap;
use std::f64::consts::E;
use std::sync::{Arc, Mutex};

/// Cap on `∏_{i∈δ} |R_i|` when building `R_δ`.
pub const R_DELTA_CAP: u128 = 1 << 20;

/// All non-empty intersections of one accepting leaf per part of `δ`,
/// canonically sorted. Indices in `δ` refer to `d`'s parts.
pub fn build_r_delta(d: &Decomposition, delta: Pattern) -> Result<Vec<Rectangle>> {
    let accepting: Vec<Vec<Rectangle>> = d.parts().iter().map(|p| p.accepting()).collect();
    r_delta_from(&accepting, delta, d.rows(), d.cols())
}

fn r_delta_from(accepting: &[Vec<Rectangle>], delta: Pattern, rows: usize, cols: usize) -> Result<Vec<Rectangle>> {
    if delta.is_empty() {
        return Err(Error::input("R_δ is defined for non-empty δ only"));
    }
    if delta.span() > accepting.len() {
        return Err(Error::input(format!("δ = {delta:?} exceeds the {} parts", accepting.len())));
    }
    let product = delta.iter().map(|i| accepting[i].len() as u128).try_fold(1u128, |acc, n| {
        let p = acc.saturating_mul(n);
        (p <= R_DELTA_CAP).then_some(p)
    });
    if product.is_none() {
        return Err(Error::Resource(format!("R_δ for δ = {delta:?} exceeds the cap of {R_DELTA_CAP} intersections")));
    }
    let mut acc = vec![Rectangle::full(rows, cols)];
    for i in delta.iter() {
        acc = acc
            .iter()
            .flat_map(|a| accepting[i].iter().map(move |r| a.intersect(r)))
            .filter(|r| !r.is_empty())
            .collect();
    }
    canonicalize(&mut acc);
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PsiAction {
    /// Step 6 found `rect ∈ Π^A` with `x ∈ r_A`.
    AliceHit { rect: Rectangle, y_in: bool },
    /// Step 7 found `rect ∈ Π^B` with `y ∈ r_B`.
    BobHit { rect: Rectangle, x_in: bool },
    /// Step 8: every row of `Π^A` and column of `Π^B` is dropped.
    Exhaust,
    /// `Γ_j = {∅}`.
    Reject,
}

/// Public state of one round. On a rejecting round only the domain, the
/// family size and the carried-over `s`, `σ` are meaningful.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PsiRound {
    pub round: usize,
    pub rows: Mask,
    pub cols: Mask,
    pub family_size: usize,
    pub s: usize,
    pub sigma: Pattern,
    pub sigma_rechosen: bool,
    pub t: usize,
    /// Pruned numbering.
    pub delta: Vec<Pattern>,
    pub pi: usize,
    pub pi_a: usize,
    pub pi_b: usize,
    /// `Π = Π^A ∪ Π^B`
    pub pi_covered: bool,
    pub action: PsiAction,
}

/// Counters over a run's epochs, with the bounds they must respect.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EpochLedger {
    /// `|Γ_1|` of the pruned decomposition.
    pub gamma1: usize,
    pub s_changes: usize,
    /// `σ` choices within each `s`-epoch, the first epoch included.
    pub sigma_changes: Vec<usize>,
    pub t_increases: usize,
    pub halving_failures: usize,
    pub cover_failures: usize,
    pub step8: usize,
    pub max_consecutive_step8: usize,
}

impl EpochLedger {
    pub fn from_trace(gamma1: usize, s0: usize, trace: &[PsiRound]) -> Self {
        let mut ledger = EpochLedger { gamma1, sigma_changes: vec![0], ..Default::default() };
        let live: Vec<&PsiRound> = trace.iter().filter(|r| r.action != PsiAction::Reject).collect();
        let mut prev_s = s0;
        let mut run8 = 0;
        for (j, r) in live.iter().enumerate() {
            if r.s != prev_s {
                ledger.s_changes += 1;
                ledger.sigma_changes.push(0);
            }
            prev_s = r.s;
            if r.sigma_rechosen {
                *ledger.sigma_changes.last_mut().unwrap() += 1;
            }
            if !r.pi_covered {
                ledger.cover_failures += 1;
            }
            if r.action == PsiAction::Exhaust {
                ledger.step8 += 1;
                run8 += 1;
                ledger.max_consecutive_step8 = ledger.max_consecutive_step8.max(run8);
            } else {
                run8 = 0;
            }
            if let Some(next) = live.get(j + 1) {
                if !next.sigma_rechosen {
                    if next.t > r.t {
                        ledger.t_increases += 1;
                    }
                    if next.t == r.t && next.pi > r.pi / 2 {
                        ledger.halving_failures += 1;
                    }
                }
            }
        }
        ledger
    }

    /// Human-readable descriptions of every bound that fails.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let g = self.gamma1 as f64;
        if (self.s_changes as f64).exp2() > g.max(1.0) {
            out.push(format!("s changed {} times with |Γ_1| = {}", self.s_changes, self.gamma1));
        }
        for (e, &c) in self.sigma_changes.iter().enumerate() {
            if c > 0 && ((c - 1) as f64).exp2() > g.max(1.0) {
                out.push(format!("σ changed {c} times in s-epoch {e} with |Γ_1| = {}", self.gamma1));
            }
        }
        if self.t_increases > 0 {
            out.push(format!("t increased {} times within a (σ, s)-epoch", self.t_increases));
        }
        if self.halving_failures > 0 {
            out.push(format!("Π failed to halve {} times within a (σ, s, t)-epoch", self.halving_failures));
        }
        if self.cover_failures > 0 {
            out.push(format!("Π ≠ Π^A ∪ Π^B in {} rounds", self.cover_failures));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessResult {
    pub verdict: bool,
    /// A part with `f_i(x, y) = ⊤`, in the caller's numbering.
    pub witness: Option<usize>,
    pub transcript: Transcript,
    pub trace: Vec<PsiRound>,
    pub ledger: EpochLedger,
}

impl WitnessResult {
    pub fn rounds(&self) -> usize {
        self.trace.len()
    }
}

/// Per-decomposition data shared by every run: the pruned parts, their cell
/// patterns and a cache of `R_δ`.
pub struct PsiPlan {
    rows: usize,
    cols: usize,
    kept: Vec<usize>,
    pruned: Decomposition,
    cells: CellPatterns,
    gamma1: PatternFamily,
    accepting: Vec<Vec<Rectangle>>,
    r_delta: Mutex<HashMap<Pattern, Arc<Vec<Rectangle>>>>,
}

impl PsiPlan {
    pub fn new(d: &Decomposition) -> Result<Self> {
        let pruned = d.prune_meaningless()?;
        let cells = CellPatterns::of_decomposition(&pruned.value)?;
        let gamma1 = cells.family();
        let accepting = pruned.value.parts().iter().map(|p| p.accepting()).collect();
        Ok(PsiPlan {
            rows: d.rows(),
            cols: d.cols(),
            kept: pruned.kept,
            pruned: pruned.value,
            cells,
            gamma1,
            accepting,
            r_delta: Mutex::new(HashMap::new()),
        })
    }

    /// Original indices of the parts that survived pruning.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn pruned(&self) -> &Decomposition {
        &self.pruned
    }

    /// `Γ_1` of the pruned decomposition.
    pub fn family(&self) -> &PatternFamily {
        &self.gamma1
    }

    /// `64·(log2 |Γ_1| + 1)² + 8`
    pub fn round_guard(&self) -> usize {
        let l = (self.gamma1.len().max(1) as f64).log2() + 1.0;
        (64.0 * l * l).floor() as usize + 8
    }

    fn r_delta(&self, delta: Pattern) -> Result<Arc<Vec<Rectangle>>> {
        if let Some(r) = self.r_delta.lock().unwrap().get(&delta) {
            return Ok(r.clone());
        }
        let built = Arc::new(r_delta_from(&self.accepting, delta, self.rows, self.cols)?);
        self.r_delta.lock().unwrap().insert(delta, built.clone());
        Ok(built)
    }

    pub fn run(&self, x: usize, y: usize) -> Result<WitnessResult> {
        if x >= self.rows || y >= self.cols {
            return Err(Error::input(format!("cell ({x},{y}) outside the {}x{} domain", self.rows, self.cols)));
        }
        let mut session = Session::live(x, y);
        let (verdict, witness, trace) = self.drive(&mut session)?;
        Ok(self.finish(verdict, witness, trace, session.finish()?))
    }

    pub fn replay(&self, transcript: &Transcript) -> Result<WitnessResult> {
        let mut session = Session::replay(transcript);
        let (verdict, witness, trace) = self.drive(&mut session)?;
        Ok(self.finish(verdict, witness, trace, session.finish()?))
    }

    /// Runs inside an existing session, e.g. as a subroutine of another
    /// protocol. Returns the verdict, the witness and the round trace.
    pub fn run_in(&self, session: &mut Session) -> Result<(bool, Option<usize>, Vec<PsiRound>)> {
        self.drive(session)
    }

    fn finish(
        &self,
        verdict: bool,
        witness: Option<usize>,
        trace: Vec<PsiRound>,
        transcript: Transcript,
    ) -> WitnessResult {
        let ledger = EpochLedger::from_trace(self.gamma1.len(), self.gamma1.max_size(), &trace);
        WitnessResult { verdict, witness, transcript, trace, ledger }
    }

    fn drive(&self, session: &mut Session) -> Result<(bool, Option<usize>, Vec<PsiRound>)> {
        let guard = self.round_guard();
        let mut rows = Mask::ones(self.rows);
        let mut cols = Mask::ones(self.cols);
        let mut s = self.gamma1.max_size();
        let mut sigma = Pattern::EMPTY;
        let mut trace = Vec::new();

        for round in 1.. {
            if round > guard {
                return Err(Error::invariant(format!("Ψ exceeded its round guard of {guard}")));
            }
            let family = self.cells.restricted(&rows, &cols);
            let mut state = PsiRound {
                round,
                rows: rows.clone(),
                cols: cols.clone(),
                family_size: family.len(),
                s,
                sigma,
                sigma_rechosen: false,
                t: 0,
                delta: Vec::new(),
                pi: 0,
                pi_a: 0,
                pi_b: 0,
                pi_covered: true,
                action: PsiAction::Reject,
            };
            if family.is_only_empty() {
                trace.push(state);
                return Ok((false, None, trace));
            }

            if family.patterns().iter().all(|g| g.intersect(sigma).is_empty()) {
                let in_window = |g: &Pattern| 2 * g.len() >= s && g.len() <= s;
                if !family.patterns().iter().any(in_window) {
                    s = family.max_size();
                }
                sigma = find_hitting_set_for_window(&family, s)?.sigma;
                state.s = s;
                state.sigma = sigma;
                state.sigma_rechosen = true;
            }

            let t = family.patterns().iter().map(|g| g.intersect(sigma).len()).max().unwrap_or(0);
            if t == 0 {
                return Err(Error::invariant(format!("t = 0 in round {round}")));
            }
            let mut delta: Vec<Pattern> =
                family.patterns().iter().map(|g| g.intersect(sigma)).filter(|d| d.len() == t).collect();
            delta.sort();
            delta.dedup();

            let mut pi = Vec::new();
            for &d in &delta {
                pi.extend(self.r_delta(d)?.iter().map(|r| r.restrict(&rows, &cols)).filter(|r| !r.is_empty()));
            }
            canonicalize(&mut pi);
            let n = pi.len();
            let disjoint_count = |side: fn(&Rectangle) -> &Mask, r: &Rectangle| {
                pi.iter().filter(|o| !side(r).intersects(side(o))).count()
            };
            let pi_a: Vec<&Rectangle> = pi.iter().filter(|r| 2 * disjoint_count(|r| &r.rows, r) + 1 >= n).collect();
            let pi_b: Vec<&Rectangle> = pi.iter().filter(|r| 2 * disjoint_count(|r| &r.cols, r) + 1 >= n).collect();
            state.t = t;
            state.pi = n;
            state.pi_a = pi_a.len();
            state.pi_b = pi_b.len();
            state.pi_covered = pi.iter().all(|r| pi_a.contains(&r) || pi_b.contains(&r));
            state.delta = delta;

            if !pi_a.is_empty() {
                session.begin(round, "psi.step6");
                let pick = |x: usize| pi_a.iter().position(|r| r.rows.get(x));
                if session.alice(|x| pick(x).is_some())? {
                    let idx = session.word(Party::Alice, ceil_log2(pi_a.len()), |x| pick(x).unwrap_or(0))?;
                    let rect =
                        (*pi_a.get(idx).ok_or_else(|| Error::Replay(format!("Π^A index {idx} out of range")))?).clone();
                    let y_in = session.bob(|y| rect.cols.get(y))?;
                    if y_in {
                        let witness = self.attribute(&state.delta, &rect, &rows, &cols)?;
                        state.action = PsiAction::AliceHit { rect, y_in };
                        trace.push(state);
                        return Ok((true, Some(witness), trace));
                    }
                    rows = rows.and(&rect.rows);
                    cols = cols.and_not(&rect.cols);
                    state.action = PsiAction::AliceHit { rect, y_in };
                    trace.push(state);
                    continue;
                }
            }

            if !pi_b.is_empty() {
                session.begin(round, "psi.step7");
                let pick = |y: usize| pi_b.iter().position(|r| r.cols.get(y));
                if session.bob(|y| pick(y).is_some())? {
                    let idx = session.word(Party::Bob, ceil_log2(pi_b.len()), |y| pick(y).unwrap_or(0))?;
                    let rect =
                        (*pi_b.get(idx).ok_or_else(|| Error::Replay(format!("Π^B index {idx} out of range")))?).clone();
                    let x_in = session.alice(|x| rect.rows.get(x))?;
                    if x_in {
                        let witness = self.attribute(&state.delta, &rect, &rows, &cols)?;
                        state.action = PsiAction::BobHit { rect, x_in };
                        trace.push(state);
                        return Ok((true, Some(witness), trace));
                    }
                    rows = rows.and_not(&rect.rows);
                    cols = cols.and(&rect.cols);
                    state.action = PsiAction::BobHit { rect, x_in };
                    trace.push(state);
                    continue;
                }
            }

            for r in &pi_a {
                rows = rows.and_not(&r.rows);
            }
            for r in &pi_b {
                cols = cols.and_not(&r.cols);
            }
            state.action = PsiAction::Exhaust;
            trace.push(state);
        }
        unreachable!()
    }

    /// The smallest part of the least `δ` whose `R_δ` yields `rect` on the
    /// live domain, in the caller's numbering.
    fn attribute(&self, delta: &[Pattern], rect: &Rectangle, rows: &Mask, cols: &Mask) -> Result<usize> {
        for &d in delta {
            if self.r_delta(d)?.iter().any(|r| r.restrict(rows, cols) == *rect) {
                return Ok(self.kept[d.min().expect("δ is non-empty")]);
            }
        }
        Err(Error::invariant("halting rectangle produced by no δ"))
    }
}

pub fn run_psi(d: &Decomposition, x: usize, y: usize) -> Result<WitnessResult> {
    PsiPlan::new(d)?.run(x, y)
}

/// Reconstructs a run from its transcript alone.
pub fn replay_psi(d: &Decomposition, transcript: &Transcript) -> Result<WitnessResult> {
    PsiPlan::new(d)?.replay(transcript)
}

/// Checks a finished run against the truth table and the per-round laws:
/// `(x, y)` stays live, `Γ_j` is the restricted family, `t_j` respects the
/// hitting bound, and the epoch ledger is clean.
pub fn check_psi(plan: &PsiPlan, d: &Decomposition, run: &WitnessResult, x: usize, y: usize) -> Result<()> {
    if run.verdict != d.value(x, y) {
        return Err(Error::invariant(format!("Ψ answered {} at ({x},{y})", run.verdict)));
    }
    match run.witness {
        Some(i) if !d.parts()[i].instance().value(x, y) => {
            return Err(Error::invariant(format!("witness {i} is false at ({x},{y})")));
        }
        None if run.verdict => return Err(Error::invariant("⊤ without a witness")),
        _ => {}
    }
    let bound = 8.0 * E + (plan.gamma1.len() as f64).log2();
    for r in &run.trace {
        if !(r.rows.get(x) && r.cols.get(y)) {
            return Err(Error::invariant(format!("input left the live domain in round {}", r.round)));
        }
        if r.family_size != plan.cells.restricted(&r.rows, &r.cols).len() {
            return Err(Error::invariant(format!("family size mismatch in round {}", r.round)));
        }
        if r.t as f64 > bound {
            return Err(Error::invariant(format!("t = {} exceeds {bound:.3} in round {}", r.t, r.round)));
        }
    }
    if let Some(v) = run.ledger.violations().into_iter().next() {
        return Err(Error::invariant(v));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{Leaf, MonochromaticPartition};

    fn leaf(rows: &[usize], cols: &[usize], label: bool) -> Leaf {
        Leaf { rect: Rectangle::from_indices(2, 2, rows.iter().copied(), cols.iter().copied()), label }
    }

    fn eq() -> MonochromaticPartition {
        let leaves =
            vec![leaf(&[0], &[0], true), leaf(&[0], &[1], false), leaf(&[1], &[0], false), leaf(&[1], &[1], true)];
        MonochromaticPartition::from_leaves(2, 2, leaves, 2).unwrap()
    }

    fn row_zero() -> MonochromaticPartition {
        MonochromaticPartition::from_leaves(2, 2, vec![leaf(&[0], &[0, 1], true), leaf(&[1], &[0, 1], false)], 1)
            .unwrap()
    }

    #[test]
    fn r_delta_identity_and_intersection() {
        let d = Decomposition::new(2, 2, vec![eq(), row_zero()]).unwrap();
        let single = build_r_delta(&d, Pattern::from_indices([0])).unwrap();
        assert_eq!(single, eq().accepting());
        let both = build_r_delta(&d, Pattern::from_indices([0, 1])).unwrap();
        assert_eq!(both, vec![Rectangle::from_indices(2, 2, [0], [0])]);
    }

    #[test]
    fn r_delta_disjoint_is_empty() {
        let a =
            MonochromaticPartition::from_leaves(2, 2, vec![leaf(&[0], &[0, 1], true), leaf(&[1], &[0, 1], false)], 1);
        let b =
            MonochromaticPartition::from_leaves(2, 2, vec![leaf(&[0], &[0, 1], false), leaf(&[1], &[0, 1], true)], 1);
        let d = Decomposition::new(2, 2, vec![a.unwrap(), b.unwrap()]).unwrap();
        assert!(build_r_delta(&d, Pattern::from_indices([0, 1])).unwrap().is_empty());
        assert!(matches!(build_r_delta(&d, Pattern::EMPTY), Err(Error::Input(_))));
    }

    #[test]
    fn equality_accepts_with_witness() {
        // Γ = {∅, {0}}, σ = {0}, t = 1, Π = Π^A = both diagonal cells. Alice
        // finds {0}×{0}, index 0, Bob confirms: bits 1, 0, 1.
        let d = Decomposition::new(2, 2, vec![eq()]).unwrap();
        let run = run_psi(&d, 0, 0).unwrap();
        assert!(run.verdict);
        assert_eq!(run.witness, Some(0));
        assert_eq!(run.transcript.bitstring(), "101");
        assert_eq!(run.rounds(), 1);
    }

    #[test]
    fn equality_rejects_off_diagonal() {
        // Alice finds {0}×{0}, Bob denies, so A = {0}, B = {1}; Γ_2 = {∅}.
        let d = Decomposition::new(2, 2, vec![eq()]).unwrap();
        let run = run_psi(&d, 0, 1).unwrap();
        assert!(!run.verdict);
        assert_eq!(run.witness, None);
        assert_eq!(run.rounds(), 2);
        assert_eq!(run.trace[1].action, PsiAction::Reject);
        assert_eq!(run.transcript.bitstring(), "100");
    }

    #[test]
    fn constant_true_part_accepts_first_round() {
        let full = MonochromaticPartition::constant(2, 2, true);
        let d = Decomposition::new(2, 2, vec![full, eq()]).unwrap();
        let plan = PsiPlan::new(&d).unwrap();
        assert_eq!(plan.kept(), &[0]);
        for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let run = plan.run(x, y).unwrap();
            assert!(run.verdict);
            assert_eq!(run.rounds(), 1);
            assert!(matches!(run.trace[0].action, PsiAction::AliceHit { y_in: true, .. }));
            check_psi(&plan, &d, &run, x, y).unwrap();
        }
    }

    #[test]
    fn witnesses_map_back_through_pruning() {
        // Part 0 is constant ⊥ and gets pruned; EQ is part 1.
        let d = Decomposition::new(2, 2, vec![MonochromaticPartition::constant(2, 2, false), eq()]).unwrap();
        let run = run_psi(&d, 1, 1).unwrap();
        assert_eq!(run.witness, Some(1));
    }

    #[test]
    fn every_cell_and_replay() {
        let d = Decomposition::new(2, 2, vec![eq(), row_zero()]).unwrap();
        let plan = PsiPlan::new(&d).unwrap();
        for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let run = plan.run(x, y).unwrap();
            check_psi(&plan, &d, &run, x, y).unwrap();
            assert_eq!(plan.replay(&run.transcript).unwrap(), run);
        }
    }

    #[test]
    fn ledger_flags_growth() {
        let base = PsiRound {
            round: 1,
            rows: Mask::ones(1),
            cols: Mask::ones(1),
            family_size: 2,
            s: 1,
            sigma: Pattern::from_indices([0]),
            sigma_rechosen: true,
            t: 1,
            delta: vec![],
            pi: 2,
            pi_a: 2,
            pi_b: 0,
            pi_covered: true,
            action: PsiAction::Exhaust,
        };
        let next = PsiRound { round: 2, sigma_rechosen: false, t: 2, pi: 2, ..base.clone() };
        let ledger = EpochLedger::from_trace(2, 1, &[base, next]);
        assert_eq!(ledger.t_increases, 1);
        assert_eq!(ledger.max_consecutive_step8, 2);
        assert_eq!(ledger.violations().len(), 1);
    }
}
